#include "gazekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gazekit {

CameraIntrinsics CameraIntrinsics::centered(double focal_px, int width, int height) {
  CameraIntrinsics k;
  k.focal_px = focal_px;
  k.width = width;
  k.height = height;
  k.principal_x = width / 2.0;
  k.principal_y = height / 2.0;
  k.validate();
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(focal_px > 0.0) || !std::isfinite(focal_px)) {
    throw InvalidInput("focal length must be positive, got " + std::to_string(focal_px));
  }
  if (width < 1 || height < 1) {
    throw InvalidInput("image dimensions must be at least 1x1");
  }
  if (!std::isfinite(principal_x) || !std::isfinite(principal_y)) {
    throw InvalidInput("principal point must be finite");
  }
}

DepthMap::DepthMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 0 || height < 0 ||
      values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidInput("depth value count does not match width x height");
  }
  valid_.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double z = values_[i];
    valid_[i] = (std::isfinite(z) && z > 0.0) ? 1 : 0;
  }
}

std::size_t DepthMap::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

std::optional<Vec3> PointCloud::at_pixel(int x, int y) const {
  if (x < 0 || y < 0 || x >= width || y >= height) return std::nullopt;
  const auto idx = pixel_point[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                               static_cast<std::size_t>(x)];
  if (idx < 0) return std::nullopt;
  return points[static_cast<std::size_t>(idx)];
}

Vec3 unproject_pixel(double x, double y, double z, const CameraIntrinsics& k) {
  return {(x - k.principal_x) * z / k.focal_px, (y - k.principal_y) * z / k.focal_px, z};
}

PointCloud unproject(const DepthMap& depth, const CameraIntrinsics& k) {
  k.validate();
  if (depth.width() != k.width || depth.height() != k.height) {
    throw InvalidInput("depth map is " + std::to_string(depth.width()) + "x" +
                       std::to_string(depth.height()) + " but intrinsics describe " +
                       std::to_string(k.width) + "x" + std::to_string(k.height));
  }
  PointCloud cloud;
  cloud.width = k.width;
  cloud.height = k.height;
  cloud.frame = Frame::kCamera;
  cloud.pixel_point.assign(depth.size(), -1);
  cloud.points.reserve(depth.valid_count());
  cloud.point_pixel.reserve(depth.valid_count());
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const std::size_t i = depth.index(x, y);
      if (!depth.valid_index(i)) continue;
      cloud.pixel_point[i] = static_cast<std::int64_t>(cloud.points.size());
      cloud.point_pixel.push_back(static_cast<std::int64_t>(i));
      cloud.points.push_back(unproject_pixel(x, y, depth.values()[i], k));
    }
  }
  return cloud;
}

PixelCoord project(const Vec3& point, const CameraIntrinsics& k) {
  if (!(point.z() > 0.0)) {
    throw InvalidInput("point is behind the camera (Z <= 0)");
  }
  return {k.focal_px * point.x() / point.z() + k.principal_x,
          k.focal_px * point.y() / point.z() + k.principal_y};
}

EyeFrame build_eye_frame(const Vec3& eye) {
  const double n = eye.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InvalidInput("eye position must have non-zero finite norm");
  }
  EyeFrame f;
  f.origin = eye;
  f.ez = eye / n;
  const Vec3 down(0.0, 1.0, 0.0);
  Vec3 ex = down.cross(f.ez);
  if (ex.norm() < 1e-9) {
    // ez is (anti)parallel to the camera down axis.
    ex = Vec3::UnitX() - f.ez.x() * f.ez;
  }
  f.ex = ex.normalized();
  f.ey = f.ez.cross(f.ex);
  return f;
}

Vec3 EyeFrame::to_local(const Vec3& p) const {
  const Vec3 d = p - origin;
  return {ex.dot(d), ey.dot(d), ez.dot(d)};
}

Vec3 EyeFrame::to_camera(const Vec3& q) const {
  return origin + q.x() * ex + q.y() * ey + q.z() * ez;
}

PointCloud to_eye_frame(const PointCloud& cloud, const EyeFrame& frame) {
  if (cloud.frame != Frame::kCamera) throw InvalidInput("point cloud is already in the eye frame");
  PointCloud out = cloud;
  out.frame = Frame::kEye;
  for (auto& p : out.points) p = frame.to_local(p);
  return out;
}

PointCloud to_camera_frame(const PointCloud& cloud, const EyeFrame& frame) {
  if (cloud.frame != Frame::kEye) throw InvalidInput("point cloud is already in the camera frame");
  PointCloud out = cloud;
  out.frame = Frame::kCamera;
  for (auto& p : out.points) p = frame.to_camera(p);
  return out;
}

CameraIntrinsics crop_intrinsics(const CameraIntrinsics& k, const CropRect& crop, CropMode mode,
                                 std::optional<double> focal_override) {
  k.validate();
  if (crop.width < 1 || crop.height < 1 || crop.x0 < 0 || crop.y0 < 0 ||
      crop.x0 + crop.width > k.width || crop.y0 + crop.height > k.height) {
    throw InvalidInput("crop rectangle lies outside the image");
  }
  CameraIntrinsics out = k;
  out.width = crop.width;
  out.height = crop.height;
  switch (mode) {
    case CropMode::kConsistent:
      out.principal_x = k.principal_x - crop.x0;
      out.principal_y = k.principal_y - crop.y0;
      break;
    case CropMode::kRecentered:
      out.principal_x = crop.width / 2.0;
      out.principal_y = crop.height / 2.0;
      if (focal_override) out.focal_px = *focal_override;
      break;
  }
  out.validate();
  return out;
}

std::optional<double> median_depth_3x3(const DepthMap& depth, int x, int y) {
  std::vector<double> window;
  window.reserve(9);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int px = x + dx;
      const int py = y + dy;
      if (depth.contains(px, py) && depth.valid(px, py)) window.push_back(depth.at(px, py));
    }
  }
  if (window.empty()) return std::nullopt;
  std::sort(window.begin(), window.end());
  const std::size_t m = window.size() / 2;
  if (window.size() % 2 == 1) return window[m];
  return 0.5 * (window[m - 1] + window[m]);
}

Vec3 locate_eye(const DepthMap& depth, const CameraIntrinsics& k, double eye_x, double eye_y) {
  const int px = static_cast<int>(std::lround(eye_x));
  const int py = static_cast<int>(std::lround(eye_y));
  if (!depth.contains(px, py)) throw InvalidInput("eye anchor lies outside the depth map");
  const auto z = median_depth_3x3(depth, px, py);
  if (!z) throw InvalidInput("no valid depth around the eye anchor");
  return unproject_pixel(eye_x, eye_y, *z, k);
}

}  // namespace gazekit
