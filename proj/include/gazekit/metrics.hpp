#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazekit/geometry.hpp"
#include "gazekit/grid.hpp"

namespace gazekit {

/// Normalised axis-aligned box; membership uses closed intervals.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(const Vec2& p) const noexcept {
    return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
  }
  bool valid() const noexcept { return x0 < x1 && y0 < y1; }
  double area() const noexcept { return (x1 - x0) * (y1 - y0); }
  Vec2 center() const noexcept { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool operator==(const Box&) const = default;
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  std::size_t positives() const noexcept;
};

/// Pixels whose centre lies within `radius_px` of any GT point (mapped to
/// grid coordinates with pixel centres) are positive.
BinaryMask binarize_gt(std::span<const Vec2> gt_points, int width, int height, double radius_px);

/// ROC AUC of the heatmap against the binary GT over all pixels. Ties count
/// one half, which equals the Mann-Whitney statistic with averaged ranks.
/// Throws InvalidInput when the GT is all-positive or all-negative.
double auc(const Grid& predicted, const BinaryMask& gt);

/// Row-major index of the first maximum.
std::size_t argmax_index(const Grid& heatmap);

/// Normalised location of the argmax pixel's centre.
Vec2 argmax_point(const Grid& heatmap);

struct Distances {
  double min = 0.0;
  double avg = 0.0;
};

/// Euclidean distances on the unit square from the prediction to each GT point.
Distances distances(const Vec2& predicted, std::span<const Vec2> gt_points);

/// Recall-increment AP: sum over ranks of (R_k - R_{k-1}) * P_k, ranks by
/// descending score with ties broken by input order.
double average_precision(std::span<const double> scores, std::span<const int> labels);

enum class HeadRule {
  kSingle,  // any GT point inside any box
  kMulti,   // at least two GT points inside the same box
};

bool phead_gt(std::span<const Vec2> gt_points, std::span<const Box> head_boxes, HeadRule rule);

bool inside_any(const Vec2& point, std::span<const Box> boxes);

struct PHeadInstance {
  Vec2 predicted;
  std::vector<Box> head_boxes;
  bool gt_is_head = false;
};

/// TP / (TP + FP) where a prediction is positive iff it falls inside any head
/// box. Throws InvalidInput when nothing is predicted positive.
double phead_precision(std::span<const PHeadInstance> instances);

/// One aligned prediction/GT pair for dataset-level evaluation.
struct EvalInstance {
  std::string id;
  bool is_child = false;
  Vec2 predicted_point;
  std::optional<Grid> predicted_heatmap;
  std::optional<double> inout_score;
  /// True iff the GT label is inside-frame; only those instances feed AUC,
  /// distance and P.Head.
  bool inside_frame = false;
  std::vector<Vec2> gt_points;
  /// 1 inside-frame, 0 outside-frame, empty when excluded from AP.
  std::optional<int> inout_label;
  /// Empty when no head detections exist for the frame's source.
  std::optional<std::vector<Box>> head_boxes;
};

struct EvalParams {
  double gt_sigma = 3.0;
  /// AUC positives lie within this many sigmas of a GT point.
  double auc_radius_sigmas = 3.0;
  HeadRule head_rule = HeadRule::kSingle;
  int threads = 1;
};

struct EvalCell {
  std::size_t n_instances = 0;
  std::size_t n_inside = 0;
  std::size_t n_auc = 0;
  std::size_t n_inout = 0;
  std::size_t n_phead = 0;
  std::size_t n_phead_positive = 0;
  std::optional<double> auc;
  std::optional<double> dist_min;
  std::optional<double> dist_avg;
  std::optional<double> ap;
  std::optional<double> p_head;

  bool present() const noexcept { return n_instances > 0; }
};

struct EvalReport {
  EvalCell all;
  EvalCell child;
  EvalCell adult;
  std::vector<std::string> notes;
};

/// Per-group (child, adult) and overall metrics. Throws InvalidInput when
/// `instances` is empty.
EvalReport evaluate(std::span<const EvalInstance> instances, const EvalParams& params = {});

std::string head_rule_name(HeadRule rule);
HeadRule parse_head_rule(const std::string& name);

}  // namespace gazekit
