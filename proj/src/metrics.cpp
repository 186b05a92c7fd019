#include "gazekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazekit/parallel.hpp"
#include "gazekit/supervision.hpp"

namespace gazekit {

std::size_t BinaryMask::positives() const noexcept {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

BinaryMask binarize_gt(std::span<const Vec2> gt_points, int width, int height, double radius_px) {
  if (width < 1 || height < 1) throw InvalidInput("grid dimensions must be at least 1x1");
  if (!(radius_px >= 0.0)) throw InvalidInput("binarisation radius must be non-negative");
  BinaryMask mask{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
  const double r2 = radius_px * radius_px;
  for (const auto& pt : gt_points) {
    const Vec2 c = normalized_to_grid(pt, width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = x - c.x();
        const double dy = y - c.y();
        if (dx * dx + dy * dy <= r2) mask.values[static_cast<std::size_t>(y) * width + x] = 1;
      }
    }
  }
  return mask;
}

double auc(const Grid& predicted, const BinaryMask& gt) {
  if (predicted.width != gt.width || predicted.height != gt.height) {
    throw InvalidInput("heatmap and GT mask shapes differ");
  }
  const std::size_t n = predicted.size();
  const std::size_t pos = gt.positives();
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw InvalidInput("degenerate GT: AUC needs at least one positive and one negative pixel");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predicted.values[a] < predicted.values[b];
  });
  // Walk tie groups in ascending score; each positive beats every negative
  // below its group and half-beats negatives inside it.
  double wins = 0.0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::size_t p = 0;
    std::size_t q = 0;
    while (j < n && predicted.values[order[j]] == predicted.values[order[i]]) {
      (gt.values[order[j]] ? p : q) += 1;
      ++j;
    }
    wins += static_cast<double>(p) * static_cast<double>(neg_below) +
            0.5 * static_cast<double>(p) * static_cast<double>(q);
    neg_below += q;
    i = j;
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::size_t argmax_index(const Grid& heatmap) {
  if (heatmap.size() == 0) throw InvalidInput("heatmap is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < heatmap.size(); ++i) {
    if (heatmap.values[i] > heatmap.values[best]) best = i;
  }
  return best;
}

Vec2 argmax_point(const Grid& heatmap) {
  const std::size_t i = argmax_index(heatmap);
  const auto x = static_cast<double>(i % static_cast<std::size_t>(heatmap.width));
  const auto y = static_cast<double>(i / static_cast<std::size_t>(heatmap.width));
  return {(x + 0.5) / heatmap.width, (y + 0.5) / heatmap.height};
}

Distances distances(const Vec2& predicted, std::span<const Vec2> gt_points) {
  if (gt_points.empty()) throw InvalidInput("distance needs at least one GT point");
  Distances d{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& g : gt_points) {
    const double e = (predicted - g).norm();
    d.min = std::min(d.min, e);
    d.avg += e;
  }
  d.avg /= static_cast<double>(gt_points.size());
  return d;
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) throw InvalidInput("average precision needs at least one positive label");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] != 1) continue;
    ++tp;
    ap += static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  return ap / static_cast<double>(positives);
}

bool inside_any(const Vec2& point, std::span<const Box> boxes) {
  return std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return b.contains(point); });
}

bool phead_gt(std::span<const Vec2> gt_points, std::span<const Box> head_boxes, HeadRule rule) {
  if (rule == HeadRule::kSingle) {
    return std::any_of(gt_points.begin(), gt_points.end(),
                       [&](const Vec2& p) { return inside_any(p, head_boxes); });
  }
  for (const auto& box : head_boxes) {
    const auto hits = std::count_if(gt_points.begin(), gt_points.end(),
                                    [&](const Vec2& p) { return box.contains(p); });
    if (hits >= 2) return true;
  }
  return false;
}

double phead_precision(std::span<const PHeadInstance> instances) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const auto& inst : instances) {
    if (!inside_any(inst.predicted, inst.head_boxes)) continue;
    (inst.gt_is_head ? tp : fp) += 1;
  }
  if (tp + fp == 0) throw InvalidInput("P.Head undefined: no prediction falls inside a head box");
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::string head_rule_name(HeadRule rule) { return rule == HeadRule::kSingle ? "single" : "multi"; }

HeadRule parse_head_rule(const std::string& name) {
  if (name == "single") return HeadRule::kSingle;
  if (name == "multi") return HeadRule::kMulti;
  throw InvalidInput("unknown head rule '" + name + "' (expected single or multi)");
}

namespace {

struct InstanceScores {
  std::optional<Distances> dist;
  std::optional<double> auc;
  bool auc_degenerate = false;
  std::optional<PHeadInstance> phead;
};

InstanceScores score_instance(const EvalInstance& inst, const EvalParams& params) {
  InstanceScores s;
  if (!inst.inside_frame) return s;
  s.dist = distances(inst.predicted_point, inst.gt_points);
  if (inst.predicted_heatmap) {
    const Grid& hm = *inst.predicted_heatmap;
    const BinaryMask gt = binarize_gt(inst.gt_points, hm.width, hm.height,
                                      params.auc_radius_sigmas * params.gt_sigma);
    if (gt.positives() == 0 || gt.positives() == gt.values.size()) {
      s.auc_degenerate = true;
    } else {
      s.auc = auc(hm, gt);
    }
  }
  if (inst.head_boxes) {
    s.phead = PHeadInstance{inst.predicted_point, *inst.head_boxes,
                            phead_gt(inst.gt_points, *inst.head_boxes, params.head_rule)};
  }
  return s;
}

EvalCell aggregate(std::span<const EvalInstance> instances, std::span<const InstanceScores> scores,
                   const std::vector<std::size_t>& members) {
  EvalCell cell;
  cell.n_instances = members.size();
  double auc_sum = 0.0;
  double min_sum = 0.0;
  double avg_sum = 0.0;
  std::vector<double> ap_scores;
  std::vector<int> ap_labels;
  std::vector<PHeadInstance> phead;
  for (std::size_t i : members) {
    const auto& inst = instances[i];
    const auto& s = scores[i];
    if (s.dist) {
      ++cell.n_inside;
      min_sum += s.dist->min;
      avg_sum += s.dist->avg;
    }
    if (s.auc) {
      ++cell.n_auc;
      auc_sum += *s.auc;
    }
    if (inst.inout_label && inst.inout_score) {
      ap_scores.push_back(*inst.inout_score);
      ap_labels.push_back(*inst.inout_label);
    }
    if (s.phead) phead.push_back(*s.phead);
  }
  if (cell.n_inside > 0) {
    cell.dist_min = min_sum / static_cast<double>(cell.n_inside);
    cell.dist_avg = avg_sum / static_cast<double>(cell.n_inside);
  }
  if (cell.n_auc > 0) cell.auc = auc_sum / static_cast<double>(cell.n_auc);
  cell.n_inout = ap_scores.size();
  if (std::count(ap_labels.begin(), ap_labels.end(), 1) > 0) {
    cell.ap = average_precision(ap_scores, ap_labels);
  }
  cell.n_phead = phead.size();
  cell.n_phead_positive = static_cast<std::size_t>(std::count_if(
      phead.begin(), phead.end(), [](const PHeadInstance& p) { return inside_any(p.predicted, p.head_boxes); }));
  if (cell.n_phead_positive > 0) cell.p_head = phead_precision(phead);
  return cell;
}

}  // namespace

EvalReport evaluate(std::span<const EvalInstance> instances, const EvalParams& params) {
  if (instances.empty()) throw InvalidInput("no instances to evaluate");
  std::vector<InstanceScores> scores(instances.size());
  parallel_for(instances.size(), params.threads,
               [&](std::size_t i) { scores[i] = score_instance(instances[i], params); });

  std::vector<std::size_t> all(instances.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> child;
  std::vector<std::size_t> adult;
  for (std::size_t i = 0; i < instances.size(); ++i) (instances[i].is_child ? child : adult).push_back(i);

  EvalReport report;
  report.all = aggregate(instances, scores, all);
  report.child = aggregate(instances, scores, child);
  report.adult = aggregate(instances, scores, adult);

  const auto degenerate = std::count_if(scores.begin(), scores.end(),
                                        [](const InstanceScores& s) { return s.auc_degenerate; });
  if (degenerate > 0) {
    report.notes.push_back(std::to_string(degenerate) +
                           " instance(s) skipped for AUC: binarised GT covers none or all pixels");
  }
  const bool any_boxes = std::any_of(instances.begin(), instances.end(),
                                     [](const EvalInstance& e) { return e.head_boxes.has_value(); });
  if (!any_boxes) report.notes.push_back("P.Head omitted: no head detections provided");
  const bool any_heatmap = std::any_of(instances.begin(), instances.end(),
                                       [](const EvalInstance& e) { return e.predicted_heatmap.has_value(); });
  if (!any_heatmap) report.notes.push_back("AUC omitted: no predicted heatmaps provided");
  if (report.all.n_inout == 0) report.notes.push_back("AP omitted: no in/out scores with in/out labels");
  return report;
}

}  // namespace gazekit
