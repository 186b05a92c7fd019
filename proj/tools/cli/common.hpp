#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gazekit/json_writer.hpp"

namespace gazekit::cli {

enum ExitCode : int {
  kSuccess = 0,
  kDataError = 1,
  kUsageError = 2,
};

/// Writes `content` to `path`, or to stdout when the path is empty.
void write_output(const std::string& path, const std::string& content);

/// Pretty-printed deterministic JSON with a trailing newline.
std::string render_json(const OrderedJson& j);

OrderedJson optional_number(const std::optional<double>& v);

/// Parses one JSON Lines file; `fn(json, line_number)` is called for every
/// non-blank line. Malformed JSON raises ParseError with the line number.
void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const nlohmann::json&, std::size_t)>& fn);

struct CommonOptions {
  int threads = 1;
  std::uint64_t seed = 0;
};

void add_unproject(CLI::App& app, int& exit_code);
void add_fov(CLI::App& app, int& exit_code);
void add_eval(CLI::App& app, const CommonOptions& common, int& exit_code);
void add_stats(CLI::App& app, int& exit_code);
void add_stability(CLI::App& app, const CommonOptions& common, int& exit_code);
void add_losses(CLI::App& app, int& exit_code);

}  // namespace gazekit::cli
