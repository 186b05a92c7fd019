#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "gazekit/grid.hpp"

namespace gazekit {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Pinhole camera with square pixels and no skew.
///
/// Axes follow image coordinates: x right, y down, z forward. Pixel
/// coordinates are the integer column/row indices themselves, so pixel
/// (W/2, H/2) lies on the optical axis for a centred principal point.
struct CameraIntrinsics {
  double focal_px = 0.0;
  int width = 0;
  int height = 0;
  double principal_x = 0.0;
  double principal_y = 0.0;

  /// Principal point at (W/2, H/2).
  static CameraIntrinsics centered(double focal_px, int width, int height);

  /// Throws InvalidInput if focal <= 0 or dimensions < 1.
  void validate() const;
};

/// Per-pixel metric depth (camera Z, metres). A pixel is valid iff its
/// value is finite and strictly positive.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  double at(int x, int y) const { return values_[index(x, y)]; }
  bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }
  bool valid_index(std::size_t i) const { return valid_[i] != 0; }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t valid_count() const noexcept;

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

enum class Frame { kCamera, kEye };

/// One 3D point per valid depth pixel, in row-major pixel order.
struct PointCloud {
  int width = 0;
  int height = 0;
  Frame frame = Frame::kCamera;
  std::vector<Vec3> points;
  /// Linear pixel index of each point.
  std::vector<std::int64_t> point_pixel;
  /// Point index for each pixel, -1 where the pixel was invalid.
  std::vector<std::int64_t> pixel_point;

  std::optional<Vec3> at_pixel(int x, int y) const;
};

/// Orthonormal right-handed frame anchored at the eye; ez points from the
/// camera centre through the eye.
struct EyeFrame {
  Vec3 origin;
  Vec3 ex;
  Vec3 ey;
  Vec3 ez;

  Vec3 to_local(const Vec3& p) const;
  Vec3 to_camera(const Vec3& q) const;
};

struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned pixel rectangle [x0, x0+width) x [y0, y0+height).
struct CropRect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool contains(int x, int y) const noexcept {
    return x >= x0 && y >= y0 && x < x0 + width && y < y0 + height;
  }
  bool operator==(const CropRect&) const = default;
};

enum class CropMode {
  /// Focal unchanged, principal point shifted by the crop origin. Geometry
  /// of shared pixels is identical before and after cropping.
  kConsistent,
  /// Principal point reset to the crop centre, as if the crop were a fresh
  /// image with unknown intrinsics.
  kRecentered,
};

/// Back-projects every valid pixel. Throws on dimension mismatch or a
/// non-positive focal length.
PointCloud unproject(const DepthMap& depth, const CameraIntrinsics& k);

/// Back-projects a single (possibly sub-pixel) coordinate at depth z.
Vec3 unproject_pixel(double x, double y, double z, const CameraIntrinsics& k);

/// Forward pinhole projection. Throws InvalidInput for points with Z <= 0.
PixelCoord project(const Vec3& point, const CameraIntrinsics& k);

/// Throws InvalidInput for a zero-norm eye position.
EyeFrame build_eye_frame(const Vec3& eye);

PointCloud to_eye_frame(const PointCloud& cloud, const EyeFrame& frame);
PointCloud to_camera_frame(const PointCloud& cloud, const EyeFrame& frame);

/// `focal_override` is only consulted in recentred mode, where the focal
/// length comes from whatever estimated it for the crop.
CameraIntrinsics crop_intrinsics(const CameraIntrinsics& k, const CropRect& crop, CropMode mode,
                                 std::optional<double> focal_override = std::nullopt);

/// 3D eye position for an image anchor: depth is the median of the valid
/// values in the 3x3 neighbourhood around the rounded anchor pixel.
/// Throws InvalidInput when the neighbourhood holds no valid depth.
Vec3 locate_eye(const DepthMap& depth, const CameraIntrinsics& k, double eye_x, double eye_y);

/// Median depth of the valid pixels in the 3x3 window centred on (x, y).
std::optional<double> median_depth_3x3(const DepthMap& depth, int x, int y);

}  // namespace gazekit
