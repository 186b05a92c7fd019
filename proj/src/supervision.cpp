#include "gazekit/supervision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gazekit {
namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr double kProbEpsilon = 1e-7;

void require_unit(const Vec3& v, const char* name) {
  if (!(std::abs(v.norm() - 1.0) <= kUnitTolerance)) {
    throw InvalidInput(std::string(name) + " must be unit norm");
  }
}

}  // namespace

GazeVector pseudo_gaze_gt(const PointCloud& eye_cloud, int gaze_x, int gaze_y) {
  if (eye_cloud.frame != Frame::kEye) throw InvalidInput("point cloud must be in the eye frame");
  const auto p = eye_cloud.at_pixel(gaze_x, gaze_y);
  if (!p) throw InvalidInput("gaze pixel has no valid depth");
  if (p->norm() < 1e-9) throw InvalidInput("gaze point coincides with the eye");
  return GazeVector::normalized(*p);
}

std::optional<GazeVector> pseudo_gaze_gt_with_fallback(const PointCloud& eye_cloud, int gaze_x,
                                                       int gaze_y, int radius) {
  if (eye_cloud.frame != Frame::kEye) throw InvalidInput("point cloud must be in the eye frame");
  std::optional<Vec3> best;
  int best_d2 = std::numeric_limits<int>::max();
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (d2 > radius * radius || d2 >= best_d2) continue;
      const auto p = eye_cloud.at_pixel(gaze_x + dx, gaze_y + dy);
      if (!p || p->norm() < 1e-9) continue;
      best = p;
      best_d2 = d2;
    }
  }
  if (!best) return std::nullopt;
  return GazeVector::normalized(*best);
}

Vec2 normalized_to_grid(const Vec2& point, int width, int height) {
  return {std::clamp(point.x() * width - 0.5, 0.0, width - 1.0),
          std::clamp(point.y() * height - 0.5, 0.0, height - 1.0)};
}

GtHeatmap render_gt_heatmap(const Vec2& peak, int width, int height, double sigma) {
  if (width < 1 || height < 1) throw InvalidInput("heatmap dimensions must be at least 1x1");
  if (!(sigma > 0.0)) throw InvalidInput("gaussian sigma must be positive");
  if (!(peak.x() >= 0.0 && peak.y() >= 0.0 && peak.x() <= width - 1.0 && peak.y() <= height - 1.0)) {
    throw InvalidInput("heatmap peak lies outside the grid");
  }
  GtHeatmap hm{Grid(width, height), peak, sigma};
  const double denom = 2.0 * sigma * sigma;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - peak.x();
      const double dy = y - peak.y();
      hm.values.at(x, y) = std::exp(-(dx * dx + dy * dy) / denom);
    }
  }
  return hm;
}

double loss_heatmap(const Grid& predicted, const Grid& target) {
  if (!predicted.same_shape(target)) throw InvalidInput("heatmap shapes differ");
  if (predicted.size() == 0) throw InvalidInput("heatmaps are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted.values[i] - target.values[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predicted.size());
}

double loss_direction(const Vec3& predicted, const Vec3& target) {
  require_unit(predicted, "predicted gaze");
  require_unit(target, "target gaze");
  return 1.0 - predicted.dot(target);
}

Vec3 loss_direction_gradient(const Vec3& predicted, const Vec3& target) {
  require_unit(predicted, "predicted gaze");
  require_unit(target, "target gaze");
  return -target;
}

double loss_inout(double predicted, double target) {
  if (!(target >= 0.0 && target <= 1.0)) throw InvalidInput("in/out target must lie in [0,1]");
  if (std::isnan(predicted)) throw InvalidInput("in/out prediction is NaN");
  const double p = std::clamp(predicted, kProbEpsilon, 1.0 - kProbEpsilon);
  return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

double loss_total(const LossParts& parts, const LossWeights& weights) {
  return weights.heatmap * parts.heatmap + weights.direction * parts.direction +
         weights.inout * parts.inout;
}

}  // namespace gazekit
