#pragma once

#include <vector>

#include "gazekit/geometry.hpp"
#include "gazekit/grid.hpp"

namespace gazekit {

/// Unit gaze direction expressed in the eye frame.
class GazeVector {
 public:
  /// Throws InvalidInput unless |direction| is 1 within `tolerance`.
  explicit GazeVector(const Vec3& direction, double tolerance = 1e-9);

  /// Normalises `v`; throws InvalidInput for a zero or non-finite vector.
  static GazeVector normalized(const Vec3& v);

  const Vec3& direction() const noexcept { return direction_; }

 private:
  Vec3 direction_;
};

/// Per-pixel field with a validity mask. Invalid pixels hold 0.
struct MaskedField {
  Grid values;
  std::vector<std::uint8_t> mask;

  bool valid(int x, int y) const { return mask[values.index(x, y)] != 0; }
};

/// 3DFoV heatmap: values in [0,1].
using FovField = MaskedField;

inline constexpr double kFovCosineThreshold = 0.9;
inline constexpr double kFovDecayRate = 5.0;

/// Cosine between the gaze and the eye-to-point direction for every point.
/// Points within 1e-9 of the eye are marked invalid.
MaskedField cosine_field(const PointCloud& eye_cloud, const GazeVector& gaze);

/// c itself above the 0.9 threshold, 0.9 * exp(5 c) / exp(4.5) at or below.
double fov_value(double cosine);

/// d fov_value / d c, using the lower branch at the threshold itself.
double fov_slope(double cosine);

FovField fov_heatmap(const MaskedField& cosines);

/// Convenience: cosine_field followed by fov_heatmap.
FovField fov_heatmap(const PointCloud& eye_cloud, const GazeVector& gaze);

/// Gradient of each pixel's field value with respect to the three gaze
/// components, with the gaze treated as an unconstrained vector.
struct FovJacobian {
  int width = 0;
  int height = 0;
  std::vector<Vec3> gradients;
  std::vector<std::uint8_t> mask;
};

FovJacobian fov_jacobian(const PointCloud& eye_cloud, const Vec3& gaze);

/// Planar cone baseline: max(0, cos angle(p - head, gaze2d)) per pixel, zero
/// at the head pixel itself. No decay is applied.
FovField cone2d_heatmap(const Vec2& head_px, const Vec2& gaze2d, int width, int height);

}  // namespace gazekit
