// Thin numeric-buffer bindings over the core kernels. File I/O stays in the CLI.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gazekit/fov.hpp"
#include "gazekit/geometry.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/supervision.hpp"
#include "gazekit/version.hpp"

namespace py = pybind11;
using namespace gazekit;

namespace {

// float64 C-contiguous input is viewed in place; anything else is copied once.
using In = py::array_t<double, py::array::c_style | py::array::forcecast>;

void require_shape(const In& a, std::initializer_list<py::ssize_t> shape, const char* name) {
  bool ok = a.ndim() == static_cast<py::ssize_t>(shape.size());
  std::size_t i = 0;
  for (py::ssize_t s : shape) {
    ok = ok && (s < 0 || a.shape(i) == s);
    ++i;
  }
  if (!ok) {
    std::string want = "(";
    for (py::ssize_t s : shape) want += (s < 0 ? std::string("N") : std::to_string(s)) + ",";
    want.back() = ')';
    throw InvalidInput(std::string(name) + " must have shape " + want);
  }
}

Vec3 vec3(const In& a, const char* name) {
  require_shape(a, {3}, name);
  return {a.at(0), a.at(1), a.at(2)};
}

Vec2 vec2(const In& a, const char* name) {
  require_shape(a, {2}, name);
  return {a.at(0), a.at(1)};
}

std::vector<Vec2> points2(const In& a, const char* name) {
  require_shape(a, {-1, 2}, name);
  std::vector<Vec2> out;
  const auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < r.shape(0); ++i) out.emplace_back(r(i, 0), r(i, 1));
  return out;
}

std::vector<Box> boxes(const In& a) {
  require_shape(a, {-1, 4}, "boxes");
  std::vector<Box> out;
  const auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < r.shape(0); ++i) out.push_back({r(i, 0), r(i, 1), r(i, 2), r(i, 3)});
  return out;
}

Grid grid(const In& a, const char* name) {
  if (a.ndim() != 2) throw InvalidInput(std::string(name) + " must be a 2D array");
  const double* p = a.data();
  return Grid(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), std::vector<double>(p, p + a.size()));
}

// N x 3 eye-frame points as a 1 x N cloud.
PointCloud eye_cloud(const In& a) {
  require_shape(a, {-1, 3}, "cloud");
  PointCloud c;
  c.frame = Frame::kEye;
  c.width = static_cast<int>(a.shape(0));
  c.height = 1;
  const auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    c.points.emplace_back(r(i, 0), r(i, 1), r(i, 2));
    c.point_pixel.push_back(i);
    c.pixel_point.push_back(i);
  }
  return c;
}

// H x W x 3 eye-frame points with NaN rows for invalid pixels.
PointCloud eye_image_cloud(const In& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidInput("cloud must have shape (H,W,3)");
  PointCloud c;
  c.frame = Frame::kEye;
  c.height = static_cast<int>(a.shape(0));
  c.width = static_cast<int>(a.shape(1));
  const auto r = a.unchecked<3>();
  for (py::ssize_t y = 0; y < c.height; ++y) {
    for (py::ssize_t x = 0; x < c.width; ++x) {
      const Vec3 p(r(y, x, 0), r(y, x, 1), r(y, x, 2));
      if (p.allFinite()) {
        c.pixel_point.push_back(static_cast<std::int64_t>(c.points.size()));
        c.point_pixel.push_back(y * c.width + x);
        c.points.push_back(p);
      } else {
        c.pixel_point.push_back(-1);
      }
    }
  }
  return c;
}

py::array_t<double> to_array(const std::vector<double>& v, std::vector<py::ssize_t> shape) {
  py::array_t<double> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> vec_array(const Vec3& v) { return to_array({v.x(), v.y(), v.z()}, {3}); }

CameraIntrinsics intrinsics(double focal, int w, int h, std::optional<double> cx, std::optional<double> cy) {
  auto k = CameraIntrinsics::centered(focal, w, h);
  if (cx) k.principal_x = *cx;
  if (cy) k.principal_y = *cy;
  return k;
}

}  // namespace

PYBIND11_MODULE(gazekit, m) {
  m.doc() = "Gaze field-of-view, supervision and metric kernels on numpy buffers";
  m.attr("__version__") = kVersion;
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

  m.def(
      "unproject",
      [](const In& depth, double focal, std::optional<double> cx, std::optional<double> cy) {
        if (depth.ndim() != 2) throw InvalidInput("depth must be a 2D array");
        const int h = static_cast<int>(depth.shape(0)), w = static_cast<int>(depth.shape(1));
        const DepthMap d(w, h, std::vector<double>(depth.data(), depth.data() + depth.size()));
        const auto k = intrinsics(focal, w, h, cx, cy);
        std::vector<double> flat(static_cast<std::size_t>(w) * h * 3, std::nan(""));
        {
          py::gil_scoped_release release;
          const PointCloud c = unproject(d, k);
          for (std::size_t i = 0; i < c.points.size(); ++i) {
            for (int j = 0; j < 3; ++j) flat[3 * c.point_pixel[i] + j] = c.points[i][j];
          }
        }
        return to_array(flat, {h, w, 3});
      },
      py::arg("depth"), py::arg("focal_px"), py::arg("cx") = py::none(), py::arg("cy") = py::none(),
      "Camera-frame points (H,W,3); NaN where depth is invalid.");

  m.def(
      "eye_frame",
      [](const In& eye) {
        const EyeFrame f = build_eye_frame(vec3(eye, "eye"));
        std::vector<double> rows{f.ex.x(), f.ex.y(), f.ex.z(), f.ey.x(), f.ey.y(), f.ey.z(),
                                 f.ez.x(), f.ez.y(), f.ez.z()};
        return to_array(rows, {3, 3});
      },
      py::arg("eye"), "Rows ex, ey, ez of the eye frame anchored at `eye`.");

  m.def(
      "to_eye_frame",
      [](const In& points, const In& eye) {
        const EyeFrame f = build_eye_frame(vec3(eye, "eye"));
        require_shape(points, {-1, 3}, "points");
        std::vector<double> out(points.size());
        const auto r = points.unchecked<2>();
        for (py::ssize_t i = 0; i < r.shape(0); ++i) {
          const Vec3 q = f.to_local(Vec3(r(i, 0), r(i, 1), r(i, 2)));
          for (int j = 0; j < 3; ++j) out[3 * i + j] = q[j];
        }
        return to_array(out, {points.shape(0), 3});
      },
      py::arg("points"), py::arg("eye"));

  m.def(
      "fov_heatmap",
      [](const In& cloud, const In& gaze) {
        const PointCloud c = eye_cloud(cloud);
        const GazeVector g(vec3(gaze, "gaze"), 1e-6);
        FovField f;
        {
          py::gil_scoped_release release;
          f = fov_heatmap(c, g);
        }
        return to_array(f.values.values, {c.width});
      },
      py::arg("cloud"), py::arg("gaze"), "Field value per eye-frame point (N,3) for a unit gaze.");

  m.def(
      "fov_jacobian",
      [](const In& cloud, const In& gaze) {
        const PointCloud c = eye_cloud(cloud);
        const Vec3 g = vec3(gaze, "gaze");
        FovJacobian j;
        {
          py::gil_scoped_release release;
          j = fov_jacobian(c, g);
        }
        std::vector<double> out;
        out.reserve(3 * j.gradients.size());
        for (const auto& v : j.gradients) out.insert(out.end(), {v.x(), v.y(), v.z()});
        return to_array(out, {c.width, 3});
      },
      py::arg("cloud"), py::arg("gaze"), "d field / d gaze per point, shape (N,3).");

  m.def("fov_value", &fov_value, py::arg("cosine"));
  m.def("fov_slope", &fov_slope, py::arg("cosine"));

  m.def(
      "pseudo_gaze_gt",
      [](const In& cloud, int gaze_x, int gaze_y, std::optional<int> fallback_radius) -> py::object {
        const PointCloud c = eye_image_cloud(cloud);
        if (!fallback_radius) return vec_array(pseudo_gaze_gt(c, gaze_x, gaze_y).direction());
        const auto g = pseudo_gaze_gt_with_fallback(c, gaze_x, gaze_y, *fallback_radius);
        if (!g) return py::none();
        return vec_array(g->direction());
      },
      py::arg("cloud"), py::arg("gaze_x"), py::arg("gaze_y"), py::arg("fallback_radius") = py::none(),
      "Unit eye-to-target direction from an (H,W,3) eye-frame cloud with NaN holes.");

  m.def(
      "render_gt_heatmap",
      [](const In& peak, int width, int height, double sigma) {
        const auto g = render_gt_heatmap(vec2(peak, "peak"), width, height, sigma);
        return to_array(g.values.values, {height, width});
      },
      py::arg("peak"), py::arg("width"), py::arg("height"), py::arg("sigma") = kDefaultGtSigma);
  m.def(
      "normalized_to_grid",
      [](const In& p, int w, int h) {
        const Vec2 g = normalized_to_grid(vec2(p, "point"), w, h);
        return std::make_pair(g.x(), g.y());
      },
      py::arg("point"), py::arg("width"), py::arg("height"));

  m.def(
      "loss_heatmap", [](const In& p, const In& t) { return loss_heatmap(grid(p, "predicted"), grid(t, "target")); },
      py::arg("predicted"), py::arg("target"));
  m.def(
      "loss_direction",
      [](const In& p, const In& t) { return loss_direction(vec3(p, "predicted"), vec3(t, "target")); },
      py::arg("predicted"), py::arg("target"));
  m.def("loss_inout", &loss_inout, py::arg("predicted"), py::arg("target"));
  m.def(
      "loss_total",
      [](double hm, double dir, double io, double w_hm, double w_dir, double w_io) {
        return loss_total({hm, dir, io}, {w_hm, w_dir, w_io});
      },
      py::arg("heatmap"), py::arg("direction"), py::arg("inout"), py::arg("lambda_hm") = 100.0,
      py::arg("lambda_dir") = 0.1, py::arg("lambda_io") = 1.0);

  m.def(
      "binarize_gt",
      [](const In& pts, int w, int h, double radius) {
        const auto mask = binarize_gt(points2(pts, "gt_points"), w, h, radius);
        py::array_t<bool> out({h, w});
        std::copy(mask.values.begin(), mask.values.end(), out.mutable_data());
        return out;
      },
      py::arg("gt_points"), py::arg("width"), py::arg("height"), py::arg("radius_px"));
  m.def(
      "auc",
      [](const In& pred, const py::array_t<bool, py::array::c_style | py::array::forcecast>& gt) {
        const Grid g = grid(pred, "predicted");
        if (gt.ndim() != 2 || gt.shape(0) != g.height || gt.shape(1) != g.width) {
          throw InvalidInput("gt mask must match the heatmap shape");
        }
        BinaryMask m{g.width, g.height, std::vector<std::uint8_t>(gt.data(), gt.data() + gt.size())};
        py::gil_scoped_release release;
        return auc(g, m);
      },
      py::arg("predicted"), py::arg("gt_mask"));
  m.def(
      "argmax_point",
      [](const In& hm) {
        const Vec2 p = argmax_point(grid(hm, "heatmap"));
        return std::make_pair(p.x(), p.y());
      },
      py::arg("heatmap"));
  m.def(
      "distances",
      [](const In& p, const In& gts) {
        const auto d = distances(vec2(p, "predicted"), points2(gts, "gt_points"));
        return std::make_pair(d.min, d.avg);
      },
      py::arg("predicted"), py::arg("gt_points"), "(min, avg) Euclidean distance on the unit square.");
  m.def(
      "average_precision",
      [](const In& scores, const py::array_t<int, py::array::c_style | py::array::forcecast>& labels) {
        require_shape(scores, {-1}, "scores");
        if (labels.ndim() != 1 || labels.shape(0) != scores.shape(0)) {
          throw InvalidInput("labels must have the same length as scores");
        }
        return average_precision(std::span<const double>(scores.data(), scores.size()),
                                 std::span<const int>(labels.data(), labels.size()));
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "phead_gt",
      [](const In& pts, const In& bx, const std::string& rule) {
        return phead_gt(points2(pts, "gt_points"), boxes(bx), parse_head_rule(rule));
      },
      py::arg("gt_points"), py::arg("boxes"), py::arg("rule") = "single");
  m.def(
      "phead_precision",
      [](const In& preds, const std::vector<In>& per_instance_boxes, const std::vector<bool>& gt_is_head) {
        const auto p = points2(preds, "predicted");
        if (per_instance_boxes.size() != p.size() || gt_is_head.size() != p.size()) {
          throw InvalidInput("predicted, boxes and gt_is_head must have equal length");
        }
        std::vector<PHeadInstance> inst;
        for (std::size_t i = 0; i < p.size(); ++i) inst.push_back({p[i], boxes(per_instance_boxes[i]), gt_is_head[i]});
        return phead_precision(inst);
      },
      py::arg("predicted"), py::arg("boxes"), py::arg("gt_is_head"));
}
