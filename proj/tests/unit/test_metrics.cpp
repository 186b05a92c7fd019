#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gazekit/metrics.hpp"
#include "gazekit/supervision.hpp"
#include "support/oracles.hpp"

namespace gazekit {
namespace {

BinaryMask mask_of(int w, int h, std::vector<std::uint8_t> v) { return {w, h, std::move(v)}; }

TEST(Auc, Examples) {
  const Grid pred(2, 2, std::vector<double>{0.2, 0.8, 0.4, 0.1});
  EXPECT_NEAR(auc(pred, mask_of(2, 2, {0, 0, 1, 0})), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(auc(Grid(2, 2, std::vector<double>{0, 1, 0, 0}), mask_of(2, 2, {0, 1, 0, 0})), 1.0);
  EXPECT_EQ(auc(Grid(3, 3, 0.7), mask_of(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 0})), 0.5);
}

TEST(Auc, DegenerateGtThrows) {
  EXPECT_THROW(auc(Grid(2, 1, 0.0), mask_of(2, 1, {1, 1})), InvalidInput);
  EXPECT_THROW(auc(Grid(2, 1, 0.0), mask_of(2, 1, {0, 0})), InvalidInput);
  EXPECT_THROW(auc(Grid(2, 1, 0.0), mask_of(1, 2, {0, 1})), InvalidInput);
}

TEST(Auc, MonotoneTransformInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    Grid g(8, 8);
    BinaryMask m{8, 8, std::vector<std::uint8_t>(64, 0)};
    for (auto& v : g.values) v = std::round(u(rng) * 10) / 10;  // force ties
    for (auto& v : m.values) v = u(rng) < 0.3;
    if (m.positives() == 0 || m.positives() == 64) continue;
    Grid h = g;
    for (auto& v : h.values) v = std::exp(3 * v) - 7;
    EXPECT_EQ(auc(g, m), auc(h, m));
  }
}

TEST(Binarize, RadiusAroundGridPoint) {
  const Vec2 p(0.5 / 8, 0.5 / 8);  // centre of pixel (0, 0)
  const auto m = binarize_gt(std::span<const Vec2>(&p, 1), 8, 8, 1.0);
  EXPECT_EQ(m.positives(), 3u);
  EXPECT_EQ(m.values[0], 1);
  EXPECT_EQ(m.values[1], 1);
  EXPECT_EQ(m.values[8], 1);
}

TEST(Argmax, FirstRowMajorMaximum) {
  const Grid g(3, 2, std::vector<double>{0, 5, 1, 5, 2, 0});
  EXPECT_EQ(argmax_index(g), 1u);
  const Vec2 p = argmax_point(g);
  EXPECT_EQ(p, Vec2(1.5 / 3, 0.5 / 2));
}

TEST(Distances, Examples) {
  const Vec2 a(0.3, 0.6);
  auto d = distances(a, std::vector<Vec2>{a});
  EXPECT_EQ(d.min, 0.0);
  EXPECT_EQ(d.avg, 0.0);
  d = distances(Vec2(0, 0), std::vector<Vec2>{Vec2(1, 1)});
  EXPECT_EQ(d.min, std::sqrt(2.0));
  EXPECT_EQ(d.avg, std::sqrt(2.0));
  d = distances(Vec2(0, 0), std::vector<Vec2>{Vec2(0, 0), Vec2(0.3, 0.4)});
  EXPECT_EQ(d.min, 0.0);
  EXPECT_NEAR(d.avg, 0.25, 1e-16);
  EXPECT_THROW(distances(a, {}), InvalidInput);
}

TEST(Distances, MinAtMostAvgAndPermutationInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<Vec2> gt;
    for (int i = 0; i < 1 + t % 9; ++i) gt.emplace_back(u(rng), u(rng));
    const Vec2 p(u(rng), u(rng));
    const auto d = distances(p, gt);
    EXPECT_LE(d.min, d.avg + 1e-15);
    std::reverse(gt.begin(), gt.end());
    const auto e = distances(p, gt);
    EXPECT_EQ(d.min, e.min);
    EXPECT_NEAR(d.avg, e.avg, 1e-15);
  }
}

TEST(AveragePrecision, Examples) {
  const std::vector<double> s1{0.9, 0.8, 0.1};
  const std::vector<int> l1{1, 1, 0};
  EXPECT_EQ(average_precision(s1, l1), 1.0);
  const std::vector<double> s2{0.9, 0.8, 0.7};
  const std::vector<int> l2{0, 1, 1};
  EXPECT_NEAR(average_precision(s2, l2), 0.5833333333333333, 1e-15);
  const std::vector<double> s3{0.99, 0.5, 0.4, 0.3};
  const std::vector<int> l3{1, 0, 0, 0};
  EXPECT_EQ(average_precision(s3, l3), 1.0);
  const std::vector<int> none{0, 0, 0};
  EXPECT_THROW(average_precision(s1, none), InvalidInput);
}

TEST(AveragePrecision, PerfectIffPositivesOutrankNegatives) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 500; ++t) {
    const int n = 2 + t % 10;
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (int i = 0; i < n; ++i) {
      s[i] = u(rng);
      l[i] = u(rng) < 0.5;
    }
    if (std::count(l.begin(), l.end(), 1) == 0) l[0] = 1;
    double min_pos = 2, max_neg = -1;
    for (int i = 0; i < n; ++i) (l[i] ? min_pos = std::min(min_pos, s[i]) : max_neg = std::max(max_neg, s[i]));
    EXPECT_EQ(average_precision(s, l) == 1.0, min_pos > max_neg);
  }
}

TEST(PHead, GtRules) {
  const std::vector<Box> box{{0.1, 0.1, 0.3, 0.3}};
  const std::vector<Vec2> one{{0.2, 0.2}};
  EXPECT_TRUE(phead_gt(one, box, HeadRule::kSingle));
  const std::vector<Vec2> three{{0.2, 0.2}, {0.25, 0.22}, {0.9, 0.9}};
  EXPECT_TRUE(phead_gt(three, box, HeadRule::kMulti));
  const std::vector<Vec2> two{{0.2, 0.2}, {0.9, 0.9}};
  EXPECT_FALSE(phead_gt(two, box, HeadRule::kMulti));
  const std::vector<Vec2> edge{{0.3, 0.1}};
  EXPECT_TRUE(phead_gt(edge, box, HeadRule::kSingle));
  // Two points in two different boxes do not satisfy the multi rule.
  const std::vector<Box> two_boxes{{0, 0, 0.1, 0.1}, {0.5, 0.5, 0.6, 0.6}};
  const std::vector<Vec2> split{{0.05, 0.05}, {0.55, 0.55}};
  EXPECT_FALSE(phead_gt(split, two_boxes, HeadRule::kMulti));
}

TEST(PHead, MultiImpliesSingle) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 2000; ++t) {
    std::vector<Vec2> pts;
    std::vector<Box> boxes;
    for (int i = 0; i < 1 + t % 6; ++i) pts.emplace_back(u(rng), u(rng));
    for (int i = 0; i < t % 4; ++i) {
      const double x = u(rng) * 0.7, y = u(rng) * 0.7;
      boxes.push_back({x, y, x + 0.3 * u(rng) + 1e-3, y + 0.3 * u(rng) + 1e-3});
    }
    if (phead_gt(pts, boxes, HeadRule::kMulti)) EXPECT_TRUE(phead_gt(pts, boxes, HeadRule::kSingle));
  }
}

TEST(PHead, Precision) {
  const Box b{0, 0, 0.5, 0.5};
  std::vector<PHeadInstance> all{{Vec2(0.1, 0.1), {b}, true}, {Vec2(0.2, 0.2), {b}, true}};
  EXPECT_EQ(phead_precision(all), 1.0);
  std::vector<PHeadInstance> half{{Vec2(0.1, 0.1), {b}, true}, {Vec2(0.2, 0.2), {b}, false}, {Vec2(0.9, 0.9), {b}, true}};
  EXPECT_EQ(phead_precision(half), 0.5);
  std::vector<PHeadInstance> none{{Vec2(0.9, 0.9), {b}, true}};
  EXPECT_THROW(phead_precision(none), InvalidInput);
}

TEST(MetricOracles, RandomSmallInstances) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    const int w = 2 + t % 7, h = 1 + (t / 7) % 8;
    Grid g(w, h);
    BinaryMask m{w, h, std::vector<std::uint8_t>(g.size(), 0)};
    std::vector<double> sc;
    std::vector<int> pos;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.values[i] = std::floor(u(rng) * 6);
      m.values[i] = u(rng) < 0.4;
      sc.push_back(g.values[i]);
      pos.push_back(m.values[i]);
    }
    if (m.positives() > 0 && m.positives() < g.size()) {
      EXPECT_NEAR(auc(g, m), oracle::auc_pairs(sc, pos), 1e-12);
    }
    if (std::count(pos.begin(), pos.end(), 1) > 0) {
      EXPECT_NEAR(average_precision(sc, pos), oracle::ap_walk(sc, pos), 1e-12);
    }
  }
}

TEST(Evaluate, PerfectInstanceIsOptimal) {
  EvalInstance e;
  e.id = "a";
  e.is_child = true;
  e.inside_frame = true;
  e.gt_points = {Vec2(0.5 / 16 + 8.0 / 16, 0.5 / 16 + 4.0 / 16)};
  e.predicted_point = e.gt_points[0];
  e.predicted_heatmap = render_gt_heatmap(normalized_to_grid(e.gt_points[0], 16, 16), 16, 16, 1.0).values;
  e.inout_score = 0.9;
  e.inout_label = 1;
  e.head_boxes = std::vector<Box>{};
  const auto r = evaluate(std::vector<EvalInstance>{e}, {1.0, 3.0});
  EXPECT_EQ(*r.child.auc, 1.0);
  EXPECT_EQ(*r.child.dist_min, 0.0);
  EXPECT_EQ(*r.child.dist_avg, 0.0);
  EXPECT_EQ(*r.child.ap, 1.0);
  EXPECT_FALSE(r.child.p_head);
  EXPECT_FALSE(r.adult.present());
  EXPECT_EQ(r.adult.n_instances, 0u);
  EXPECT_FALSE(r.adult.auc);
}

std::vector<EvalInstance> random_instances(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<EvalInstance> out;
  for (int i = 0; i < n; ++i) {
    EvalInstance e;
    e.id = std::to_string(i);
    e.is_child = u(rng) < 0.5;
    e.inside_frame = u(rng) < 0.8;
    if (e.inside_frame) {
      for (int k = 0; k < 1 + i % 3; ++k) e.gt_points.emplace_back(u(rng), u(rng));
      e.inout_label = 1;
    } else if (u(rng) < 0.7) {
      e.inout_label = 0;
    }
    e.predicted_point = Vec2(u(rng), u(rng));
    Grid hm(8, 8);
    for (auto& v : hm.values) v = u(rng);
    e.predicted_heatmap = hm;
    e.inout_score = u(rng);
    std::vector<Box> boxes;
    for (int k = 0; k < 3; ++k) {
      const double x = u(rng) * 0.6, y = u(rng) * 0.6;
      boxes.push_back({x, y, x + 0.4, y + 0.4});
    }
    e.head_boxes = boxes;
    out.push_back(std::move(e));
  }
  return out;
}

TEST(Evaluate, GroupsMatchSingleMetricOps) {
  std::mt19937_64 rng(77);
  const auto inst = random_instances(rng, 60);
  const EvalParams params{0.5, 3.0, HeadRule::kSingle, 3};
  const auto r = evaluate(inst, params);
  for (bool child : {true, false}) {
    double dsum = 0, msum = 0, asum = 0;
    std::size_t n = 0, na = 0;
    std::vector<double> s;
    std::vector<int> l;
    std::vector<std::pair<double, double>> preds;
    std::vector<std::vector<oracle::BoxLite>> boxes;
    std::vector<int> heads;
    for (const auto& e : inst) {
      if (e.is_child != child) continue;
      if (e.inout_label) {
        s.push_back(*e.inout_score);
        l.push_back(*e.inout_label);
      }
      if (!e.inside_frame) continue;
      std::vector<std::pair<double, double>> gt;
      for (const auto& p : e.gt_points) gt.emplace_back(p.x(), p.y());
      const auto d = oracle::distance_loop(e.predicted_point.x(), e.predicted_point.y(), gt);
      dsum += d.avg;
      msum += d.min;
      ++n;
      const auto m = binarize_gt(e.gt_points, 8, 8, 1.5);
      if (m.positives() > 0 && m.positives() < 64) {
        std::vector<int> pos(m.values.begin(), m.values.end());
        asum += oracle::auc_pairs(e.predicted_heatmap->values, pos);
        ++na;
      }
      preds.emplace_back(e.predicted_point.x(), e.predicted_point.y());
      std::vector<oracle::BoxLite> bl;
      int gt_head = 0;
      for (const auto& b : *e.head_boxes) {
        bl.push_back({b.x0, b.y0, b.x1, b.y1});
        for (const auto& p : e.gt_points) gt_head |= oracle::in_box(p.x(), p.y(), bl.back());
      }
      boxes.push_back(bl);
      heads.push_back(gt_head);
    }
    const EvalCell& c = child ? r.child : r.adult;
    EXPECT_EQ(c.n_inside, n);
    EXPECT_NEAR(*c.dist_avg, dsum / n, 1e-12);
    EXPECT_NEAR(*c.dist_min, msum / n, 1e-12);
    EXPECT_NEAR(*c.auc, asum / na, 1e-12);
    EXPECT_NEAR(*c.ap, oracle::ap_walk(s, l), 1e-12);
    EXPECT_NEAR(*c.p_head, oracle::phead_count(preds, boxes, heads), 1e-12);
  }
}

TEST(Evaluate, UnionAdditivity) {
  std::mt19937_64 rng(78);
  const auto inst = random_instances(rng, 40);
  const auto r = evaluate(inst);
  EXPECT_EQ(r.all.n_instances, r.child.n_instances + r.adult.n_instances);
  EXPECT_EQ(r.all.n_inside, r.child.n_inside + r.adult.n_inside);
  EXPECT_EQ(r.all.n_inout, r.child.n_inout + r.adult.n_inout);
  const double weighted = (*r.child.dist_avg * r.child.n_inside + *r.adult.dist_avg * r.adult.n_inside) /
                          static_cast<double>(r.all.n_inside);
  EXPECT_NEAR(*r.all.dist_avg, weighted, 1e-12);
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
  std::mt19937_64 rng(79);
  const auto inst = random_instances(rng, 50);
  EvalParams one;
  EvalParams four;
  four.threads = 4;
  const auto a = evaluate(inst, one);
  const auto b = evaluate(inst, four);
  EXPECT_EQ(*a.all.auc, *b.all.auc);
  EXPECT_EQ(*a.all.dist_avg, *b.all.dist_avg);
  EXPECT_EQ(*a.all.p_head, *b.all.p_head);
}

TEST(Evaluate, NotesForMissingInputs) {
  EvalInstance e;
  e.inside_frame = true;
  e.gt_points = {Vec2(0.5, 0.5)};
  e.predicted_point = Vec2(0.5, 0.5);
  const auto r = evaluate(std::vector<EvalInstance>{e});
  EXPECT_FALSE(r.all.p_head);
  EXPECT_FALSE(r.all.auc);
  EXPECT_FALSE(r.all.ap);
  EXPECT_EQ(r.notes.size(), 3u);
  EXPECT_THROW(evaluate(std::vector<EvalInstance>{}), InvalidInput);
}

}  // namespace
}  // namespace gazekit
