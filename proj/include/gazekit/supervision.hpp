#pragma once

#include <optional>

#include "gazekit/fov.hpp"
#include "gazekit/geometry.hpp"
#include "gazekit/grid.hpp"

namespace gazekit {

struct LossWeights {
  double heatmap = 100.0;
  double direction = 0.1;
  double inout = 1.0;
};

struct LossParts {
  double heatmap = 0.0;
  double direction = 0.0;
  double inout = 0.0;
};

/// Isotropic Gaussian target heatmap.
struct GtHeatmap {
  Grid values;
  Vec2 peak;  // grid coordinates
  double sigma = 3.0;
};

inline constexpr double kDefaultGtSigma = 3.0;
inline constexpr int kDefaultHeatmapSize = 64;
inline constexpr int kGazeFallbackRadius = 5;

/// Unit vector from the eye towards the cloud point at `gaze_px`.
/// Throws InvalidInput when that pixel has no valid point or coincides with
/// the eye.
GazeVector pseudo_gaze_gt(const PointCloud& eye_cloud, int gaze_x, int gaze_y);

/// As pseudo_gaze_gt, but an invalid gaze pixel falls back to the nearest
/// valid pixel within `radius` (Euclidean, ties in row-major order). Returns
/// nullopt when nothing usable is found: the instance has no direction label.
std::optional<GazeVector> pseudo_gaze_gt_with_fallback(const PointCloud& eye_cloud, int gaze_x,
                                                       int gaze_y,
                                                       int radius = kGazeFallbackRadius);

/// Maps a normalised image point onto grid coordinates using pixel centres:
/// x_grid = x * W - 0.5, clamped to [0, W-1].
Vec2 normalized_to_grid(const Vec2& point, int width, int height);

/// value(p) = exp(-|p - peak|^2 / (2 sigma^2)) over the whole grid.
GtHeatmap render_gt_heatmap(const Vec2& peak, int width, int height,
                            double sigma = kDefaultGtSigma);

/// Mean over pixels of the squared difference.
double loss_heatmap(const Grid& predicted, const Grid& target);

/// 1 - <g_p, g_gt>. Both inputs must be unit within 1e-6.
double loss_direction(const Vec3& predicted, const Vec3& target);

/// Gradient of loss_direction with respect to the prediction: -g_gt.
Vec3 loss_direction_gradient(const Vec3& predicted, const Vec3& target);

/// Binary cross-entropy with the prediction clamped to [1e-7, 1 - 1e-7].
double loss_inout(double predicted, double target);

double loss_total(const LossParts& parts, const LossWeights& weights = {});

}  // namespace gazekit
