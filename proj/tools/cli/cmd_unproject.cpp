#include <algorithm>
#include <iostream>
#include <limits>
#include <sstream>

#include "common.hpp"
#include "gazekit/geometry.hpp"
#include "gazekit/raster_io.hpp"

namespace gazekit::cli {
namespace {

struct UnprojectOptions {
  std::string depth;
  std::string intrinsics;
  std::string out;
  std::string summary;
};

int run_unproject(const UnprojectOptions& o) {
  const auto sidecar = io::read_intrinsics_sidecar(o.intrinsics);
  const DepthMap depth = io::load_depth(o.depth, sidecar.scale_m_per_unit);
  const PointCloud cloud = unproject(depth, sidecar.intrinsics);

  std::ostringstream ply;
  ply << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& p : cloud.points) {
    ply << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
  }
  write_output(o.out, ply.str());

  double zmin = std::numeric_limits<double>::infinity();
  double zmax = -std::numeric_limits<double>::infinity();
  for (const auto& p : cloud.points) {
    zmin = std::min(zmin, p.z());
    zmax = std::max(zmax, p.z());
  }
  OrderedJson s;
  s["width"] = depth.width();
  s["height"] = depth.height();
  s["valid_pixels"] = cloud.points.size();
  s["depth_min"] = cloud.points.empty() ? OrderedJson(nullptr) : OrderedJson(zmin);
  s["depth_max"] = cloud.points.empty() ? OrderedJson(nullptr) : OrderedJson(zmax);
  if (!o.summary.empty() || !o.out.empty()) write_output(o.summary, render_json(s));

  if (cloud.points.empty()) {
    std::cerr << "warning: depth map has no valid pixels; wrote an empty point cloud\n";
    return kDataError;
  }
  return kSuccess;
}

}  // namespace

void add_unproject(CLI::App& app, int& exit_code) {
  auto opts = std::make_shared<UnprojectOptions>();
  auto* sub = app.add_subcommand("unproject", "Back-project a depth raster into a camera-frame point cloud");
  sub->add_option("--depth", opts->depth, "GPDM or 16-bit PGM depth raster")->required()->check(CLI::ExistingFile);
  sub->add_option("--intrinsics", opts->intrinsics, "JSON intrinsics sidecar")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", opts->out, "ASCII PLY output (stdout if omitted)");
  sub->add_option("--summary", opts->summary, "Summary JSON output (stdout if omitted)");
  sub->callback([opts, &exit_code] { exit_code = run_unproject(*opts); });
}

}  // namespace gazekit::cli
