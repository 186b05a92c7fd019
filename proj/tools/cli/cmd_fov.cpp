#include <sstream>

#include "common.hpp"
#include "gazekit/fov.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/raster_io.hpp"

namespace gazekit::cli {
namespace {

struct FovOptions {
  std::string depth;
  std::string intrinsics;
  std::vector<double> eye_px;
  std::vector<double> head_box;
  std::optional<double> eye_depth;
  std::vector<double> gaze;
  std::vector<double> gaze2d;
  bool cone = false;
  std::string out;
  std::string preview;
  std::string summary;
};

int run_fov(const FovOptions& o) {
  if (o.cone && o.gaze2d.empty()) {
    throw ConfigError("--cone needs --gaze2d; a 3D --gaze vector is not used by the 2D cone");
  }
  if (!o.cone && !o.gaze2d.empty()) throw ConfigError("--gaze2d is only valid together with --cone");
  if (!o.cone && o.gaze.empty()) throw ConfigError("3D field of view needs --gaze gx gy gz");
  if (!o.cone && o.depth.empty()) throw ConfigError("3D field of view needs --depth");

  const auto sidecar = io::read_intrinsics_sidecar(o.intrinsics);
  const CameraIntrinsics& k = sidecar.intrinsics;
  Vec2 eye_px;
  if (!o.eye_px.empty()) {
    eye_px = {o.eye_px[0], o.eye_px[1]};
  } else {
    const Box box{o.head_box[0], o.head_box[1], o.head_box[2], o.head_box[3]};
    if (!box.valid()) throw ConfigError("--head-box needs x0 < x1 and y0 < y1");
    eye_px = {box.center().x() * k.width, box.center().y() * k.height};
  }

  OrderedJson summary;
  FovField field;
  if (o.cone) {
    summary["mode"] = "cone2d";
    field = cone2d_heatmap(eye_px, Vec2(o.gaze2d[0], o.gaze2d[1]), k.width, k.height);
  } else {
    summary["mode"] = "fov3d";
    const DepthMap depth = io::load_depth(o.depth, sidecar.scale_m_per_unit);
    const Vec3 eye = o.eye_depth ? unproject_pixel(eye_px.x(), eye_px.y(), *o.eye_depth, k)
                                 : locate_eye(depth, k, eye_px.x(), eye_px.y());
    const EyeFrame frame = build_eye_frame(eye);
    const PointCloud cloud = to_eye_frame(unproject(depth, k), frame);
    const GazeVector gaze(Vec3(o.gaze[0], o.gaze[1], o.gaze[2]), 1e-6);
    field = fov_heatmap(cloud, gaze);
    summary["eye_camera"] = {eye.x(), eye.y(), eye.z()};
  }

  std::vector<double> raster = field.values.values;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < raster.size(); ++i) {
    if (field.mask[i]) {
      ++valid;
    } else {
      raster[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (!o.out.empty()) io::write_gpdm(o.out, field.values.width, field.values.height, raster);
  if (!o.preview.empty()) io::write_pgm8(o.preview, field.values.width, field.values.height, field.values.values);

  const std::size_t best = argmax_index(field.values);
  summary["width"] = field.values.width;
  summary["height"] = field.values.height;
  summary["valid_pixels"] = valid;
  summary["max_value"] = field.values.values[best];
  summary["argmax_px"] = {best % static_cast<std::size_t>(field.values.width),
                          best / static_cast<std::size_t>(field.values.width)};
  write_output(o.summary, render_json(summary));
  return kSuccess;
}

}  // namespace

void add_fov(CLI::App& app, int& exit_code) {
  auto o = std::make_shared<FovOptions>();
  auto* sub = app.add_subcommand("fov", "Render a 3D field-of-view heatmap (or the 2D cone baseline)");
  sub->add_option("--depth", o->depth, "Depth raster (3D mode)")->check(CLI::ExistingFile);
  sub->add_option("--intrinsics", o->intrinsics, "JSON intrinsics sidecar")->required()->check(CLI::ExistingFile);
  auto* eye = sub->add_option("--eye-px", o->eye_px, "Eye anchor in pixels")->expected(2);
  auto* head = sub->add_option("--head-box", o->head_box, "Normalised head box; its centre is the eye anchor")
                   ->expected(4);
  eye->excludes(head);
  head->excludes(eye);
  sub->add_option("--eye-depth", o->eye_depth, "Eye depth in metres (default: 3x3 median of the depth map)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--gaze", o->gaze, "Unit gaze vector in the eye frame")->expected(3);
  sub->add_flag("--cone", o->cone, "Use the planar cone baseline instead of the 3D field");
  sub->add_option("--gaze2d", o->gaze2d, "Unit 2D image-plane gaze direction (cone mode)")->expected(2);
  sub->add_option("--out", o->out, "GPDM raster output");
  sub->add_option("--preview", o->preview, "8-bit PGM preview");
  sub->add_option("--summary", o->summary, "Summary JSON (stdout if omitted)");
  sub->callback([o, &exit_code] {
    if (o->eye_px.empty() && o->head_box.empty()) throw ConfigError("one of --eye-px or --head-box is required");
    exit_code = run_fov(*o);
  });
}

}  // namespace gazekit::cli
