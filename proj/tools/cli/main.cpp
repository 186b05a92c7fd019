#include <iostream>

#include "common.hpp"
#include "gazekit/error.hpp"
#include "gazekit/version.hpp"

int main(int argc, char** argv) {
  using namespace gazekit::cli;
  CLI::App app{"gazekit: 3D field-of-view, gaze supervision and evaluation tools"};
  app.set_version_flag("--version", gazekit::kVersion);
  app.set_config("--config", "", "TOML/INI file mirroring the command-line flags (flags win)");
  app.require_subcommand(1);

  CommonOptions common;
  app.add_option("--threads", common.threads, "Worker threads for per-instance work")
      ->check(CLI::Range(1, 256));
  app.add_option("--seed", common.seed, "Seed for every random draw");

  int exit_code = kSuccess;
  add_unproject(app, exit_code);
  add_fov(app, exit_code);
  add_eval(app, common, exit_code);
  add_stats(app, exit_code);
  add_stability(app, common, exit_code);
  add_losses(app, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  } catch (const gazekit::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const gazekit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return exit_code;
}
