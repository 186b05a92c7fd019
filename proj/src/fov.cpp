#include "gazekit/fov.hpp"

#include <algorithm>
#include <cmath>

namespace gazekit {
namespace {

constexpr double kEyeRadius = 1e-9;

void require_eye_frame(const PointCloud& cloud) {
  if (cloud.frame != Frame::kEye) throw InvalidInput("point cloud must be in the eye frame");
}

}  // namespace

GazeVector::GazeVector(const Vec3& direction, double tolerance) : direction_(direction) {
  const double n = direction.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > tolerance) {
    throw InvalidInput("gaze vector must be unit norm");
  }
}

GazeVector GazeVector::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("cannot normalise a zero gaze vector");
  return GazeVector(v / n);
}

MaskedField cosine_field(const PointCloud& eye_cloud, const GazeVector& gaze) {
  require_eye_frame(eye_cloud);
  MaskedField out{Grid(eye_cloud.width, eye_cloud.height),
                  std::vector<std::uint8_t>(eye_cloud.pixel_point.size(), 0)};
  const Vec3& g = gaze.direction();
  for (std::size_t i = 0; i < eye_cloud.points.size(); ++i) {
    const Vec3& p = eye_cloud.points[i];
    const double n = p.norm();
    if (n < kEyeRadius) continue;
    const auto pix = static_cast<std::size_t>(eye_cloud.point_pixel[i]);
    out.values.values[pix] = std::clamp(g.dot(p) / n, -1.0, 1.0);
    out.mask[pix] = 1;
  }
  return out;
}

double fov_value(double c) {
  if (c > kFovCosineThreshold) return c;
  return kFovCosineThreshold * std::exp(kFovDecayRate * c) /
         std::exp(kFovDecayRate * kFovCosineThreshold);
}

double fov_slope(double c) {
  if (c > kFovCosineThreshold) return 1.0;
  return kFovDecayRate * fov_value(c);
}

FovField fov_heatmap(const MaskedField& cosines) {
  FovField out{Grid(cosines.values.width, cosines.values.height), cosines.mask};
  for (std::size_t i = 0; i < out.mask.size(); ++i) {
    if (out.mask[i]) out.values.values[i] = fov_value(cosines.values.values[i]);
  }
  return out;
}

FovField fov_heatmap(const PointCloud& eye_cloud, const GazeVector& gaze) {
  return fov_heatmap(cosine_field(eye_cloud, gaze));
}

FovJacobian fov_jacobian(const PointCloud& eye_cloud, const Vec3& gaze) {
  require_eye_frame(eye_cloud);
  FovJacobian out;
  out.width = eye_cloud.width;
  out.height = eye_cloud.height;
  out.gradients.assign(eye_cloud.pixel_point.size(), Vec3::Zero());
  out.mask.assign(eye_cloud.pixel_point.size(), 0);
  for (std::size_t i = 0; i < eye_cloud.points.size(); ++i) {
    const Vec3& p = eye_cloud.points[i];
    const double n = p.norm();
    if (n < kEyeRadius) continue;
    const Vec3 u = p / n;
    const auto pix = static_cast<std::size_t>(eye_cloud.point_pixel[i]);
    out.gradients[pix] = fov_slope(gaze.dot(u)) * u;
    out.mask[pix] = 1;
  }
  return out;
}

FovField cone2d_heatmap(const Vec2& head_px, const Vec2& gaze2d, int width, int height) {
  if (width < 1 || height < 1) throw InvalidInput("cone field dimensions must be at least 1x1");
  if (!(head_px.x() >= 0.0 && head_px.y() >= 0.0 && head_px.x() <= width - 1.0 &&
        head_px.y() <= height - 1.0)) {
    throw InvalidInput("head pixel lies outside the image");
  }
  if (std::abs(gaze2d.norm() - 1.0) > 1e-6) throw InvalidInput("2D gaze direction must be unit norm");
  FovField out{Grid(width, height),
               std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 1)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec2 d(x - head_px.x(), y - head_px.y());
      const double n = d.norm();
      out.values.at(x, y) = n > 0.0 ? std::max(0.0, d.dot(gaze2d) / n) : 0.0;
    }
  }
  return out;
}

}  // namespace gazekit
