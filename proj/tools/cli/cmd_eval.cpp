#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "common.hpp"
#include "gazekit/dataset.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/raster_io.hpp"

namespace gazekit::cli {
namespace {

struct EvalOptions {
  std::string annotations;
  std::string predictions;
  std::string head_detections;
  std::string out;
  std::string text;
  bool only_children = false;
  bool only_adults = false;
  bool double_coded = false;
  double gt_sigma = 3.0;
  double auc_radius = 3.0;
  int grid = 64;
  std::string head_rule = "single";
};

struct Prediction {
  Vec2 point;
  std::optional<Grid> heatmap;
  std::optional<double> inout_score;
};

using Loc = ParseError::Location;

std::map<std::string, Prediction> read_predictions(const std::filesystem::path& path) {
  std::map<std::string, Prediction> out;
  const auto base = path.parent_path();
  for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    const auto fail = [&](const std::string& what) { throw ParseError(path.string(), Loc::kLine, line, what); };
    if (!j.contains("instance_id") || !j["instance_id"].is_string()) fail("field 'instance_id' must be a string");
    const std::string id = j["instance_id"].get<std::string>();
    if (out.contains(id)) fail("duplicate instance_id '" + id + "'");
    Prediction p;
    std::optional<Vec2> point;
    if (j.contains("point")) {
      const auto& v = j["point"];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) fail("field 'point' must be [x, y]");
      point = Vec2(v[0].get<double>(), v[1].get<double>());
      if (!(point->x() >= 0 && point->x() <= 1 && point->y() >= 0 && point->y() <= 1)) {
        fail("field 'point' must be normalised to [0,1]");
      }
    }
    if (j.contains("heatmap_path") && !j["heatmap_path"].is_null()) {
      if (!j["heatmap_path"].is_string()) fail("field 'heatmap_path' must be a string");
      std::filesystem::path hp = j["heatmap_path"].get<std::string>();
      if (hp.is_relative()) hp = base / hp;
      const auto raster = io::read_gpdm(hp);
      std::vector<double> v(raster.values.begin(), raster.values.end());
      for (auto& x : v) {
        if (std::isnan(x)) x = 0.0;
      }
      p.heatmap = Grid(raster.width, raster.height, std::move(v));
      const Vec2 am = argmax_point(*p.heatmap);
      if (point && (am - *point).norm() > 1e-6) fail("field 'point' disagrees with the heatmap argmax");
      point = am;
    }
    if (!point) fail("one of 'point' or 'heatmap_path' is required");
    p.point = *point;
    if (j.contains("inout_score") && !j["inout_score"].is_null()) {
      if (!j["inout_score"].is_number()) fail("field 'inout_score' must be a number");
      const double s = j["inout_score"].get<double>();
      if (!(s >= 0.0 && s <= 1.0)) fail("field 'inout_score' must lie in [0,1]");
      p.inout_score = s;
    }
    out.emplace(id, std::move(p));
  });
  return out;
}

std::vector<EvalInstance> build_instances(const std::vector<AnnotationInstance>& annotations,
                                          const std::map<std::string, Prediction>& predictions,
                                          const std::optional<HeadDetections>& detections) {
  std::map<std::string, std::vector<const AnnotationInstance*>> groups;
  for (const auto& a : annotations) groups[instance_key(a)].push_back(&a);
  for (const auto& [id, pred] : predictions) {
    if (!groups.contains(id)) throw InvalidInput("prediction '" + id + "' has no matching annotation");
  }
  std::vector<EvalInstance> out;
  for (const auto& [key, members] : groups) {
    const auto it = predictions.find(key);
    if (it == predictions.end()) throw InvalidInput("annotation '" + key + "' has no prediction");
    EvalInstance e;
    e.id = key;
    e.is_child = members.front()->is_child;
    e.predicted_point = it->second.point;
    e.predicted_heatmap = it->second.heatmap;
    e.inout_score = it->second.inout_score;
    bool any_outside = false;
    for (const auto* a : members) {
      if (a->gaze_point) e.gt_points.push_back(*a->gaze_point);
      any_outside |= a->gaze_label == GazeLabel::kOutsideFrame;
    }
    e.inside_frame = !e.gt_points.empty();
    if (e.inside_frame) {
      e.inout_label = 1;
    } else if (any_outside) {
      e.inout_label = 0;
    }
    if (detections) {
      const auto d = detections->find({members.front()->video_id, members.front()->frame});
      e.head_boxes = d == detections->end() ? std::vector<Box>{} : d->second;
    }
    out.push_back(std::move(e));
  }
  return out;
}

OrderedJson cell_json(const EvalCell& c) {
  OrderedJson j;
  j["present"] = c.present();
  j["n_instances"] = c.n_instances;
  j["n_inside"] = c.n_inside;
  j["n_auc"] = c.n_auc;
  j["n_inout"] = c.n_inout;
  j["n_phead"] = c.n_phead;
  j["n_phead_positive"] = c.n_phead_positive;
  j["auc"] = optional_number(c.auc);
  j["dist_avg"] = optional_number(c.dist_avg);
  j["dist_min"] = optional_number(c.dist_min);
  j["ap"] = optional_number(c.ap);
  j["p_head"] = optional_number(c.p_head);
  return j;
}

std::string cell_text(const char* name, const EvalCell& c) {
  const auto f = [](const std::optional<double>& v) {
    char buf[32];
    if (!v) return std::string("      -");
    std::snprintf(buf, sizeof buf, "%7.3f", *v);
    return std::string(buf);
  };
  char head[48];
  std::snprintf(head, sizeof head, "%-6s %6zu", name, c.n_instances);
  return std::string(head) + " " + f(c.auc) + " " + f(c.dist_avg) + " " + f(c.dist_min) + " " + f(c.ap) +
         " " + f(c.p_head) + "\n";
}

int run_eval(const EvalOptions& o, int threads) {
  if (o.only_children && o.only_adults) throw ConfigError("--only-children and --only-adults are exclusive");
  EvalParams params;
  params.gt_sigma = o.gt_sigma;
  params.auc_radius_sigmas = o.auc_radius;
  params.head_rule = parse_head_rule(o.head_rule);
  params.threads = threads;

  auto annotations = parse_annotations(std::filesystem::path(o.annotations));
  std::set<std::string> known_keys;
  for (const auto& a : annotations) known_keys.insert(instance_key(a));
  std::erase_if(annotations, [&](const AnnotationInstance& a) {
    return (o.only_children && !a.is_child) || (o.only_adults && a.is_child);
  });
  if (annotations.empty()) throw InvalidInput("no annotations left after filtering");

  EvalReport report;
  std::vector<std::string> unmatched;
  if (o.double_coded) {
    const auto paired = pair_double_coded(annotations);
    unmatched = paired.unmatched;
    AgreementParams ap{params, o.grid};
    report = agreement_eval(paired.pairs, ap);
  } else {
    if (o.predictions.empty()) throw ConfigError("--predictions is required unless --double-coded is set");
    std::optional<HeadDetections> detections;
    if (!o.head_detections.empty()) detections = parse_head_detections(std::filesystem::path(o.head_detections));
    const auto predictions = read_predictions(o.predictions);
    std::set<std::string> kept_keys;
    for (const auto& a : annotations) kept_keys.insert(instance_key(a));
    std::map<std::string, Prediction> kept;
    for (const auto& [id, pred] : predictions) {
      if (!known_keys.contains(id)) throw InvalidInput("prediction '" + id + "' has no matching annotation");
      if (kept_keys.contains(id)) kept.emplace(id, pred);
    }
    report = evaluate(build_instances(annotations, kept, detections), params);
  }

  OrderedJson j;
  j["report"] = o.double_coded ? "agreement" : "evaluation";
  OrderedJson p;
  p["gt_sigma"] = params.gt_sigma;
  p["auc_radius_sigmas"] = params.auc_radius_sigmas;
  p["head_rule"] = head_rule_name(params.head_rule);
  p["filter"] = o.only_children ? "children" : o.only_adults ? "adults" : "none";
  j["params"] = p;
  OrderedJson cells;
  cells["all"] = cell_json(report.all);
  cells["child"] = cell_json(report.child);
  cells["adult"] = cell_json(report.adult);
  j["cells"] = cells;
  j["notes"] = report.notes;
  if (o.double_coded) j["unmatched"] = unmatched;
  write_output(o.out, render_json(j));

  if (!o.text.empty()) {
    std::string t = "group  count     AUC  D(avg)  D(min)      AP  P.Head\n";
    t += cell_text("all", report.all);
    t += cell_text("child", report.child);
    t += cell_text("adult", report.adult);
    for (const auto& n : report.notes) t += "note: " + n + "\n";
    write_output(o.text, t);
  }
  return kSuccess;
}

}  // namespace

void add_eval(CLI::App& app, const CommonOptions& common, int& exit_code) {
  auto o = std::make_shared<EvalOptions>();
  auto* sub = app.add_subcommand("eval", "Compute AUC, distance, AP and P.Head per child/adult group");
  sub->add_option("--annotations", o->annotations, "Annotation JSON Lines")->required()->check(CLI::ExistingFile);
  sub->add_option("--predictions", o->predictions, "Prediction JSON Lines")->check(CLI::ExistingFile);
  sub->add_option("--head-detections", o->head_detections, "Head detection JSON Lines")->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "JSON report (stdout if omitted)");
  sub->add_option("--text", o->text, "Plain-text table output");
  sub->add_flag("--only-children", o->only_children, "Restrict to child instances");
  sub->add_flag("--only-adults", o->only_adults, "Restrict to adult instances");
  sub->add_flag("--double-coded", o->double_coded, "Score one annotator against another");
  sub->add_option("--gt-sigma", o->gt_sigma, "GT Gaussian sigma in heatmap pixels")->check(CLI::PositiveNumber);
  sub->add_option("--auc-radius", o->auc_radius, "AUC positive radius in sigmas")->check(CLI::NonNegativeNumber);
  sub->add_option("--hm-size", o->grid, "Heatmap grid for rendered annotator heatmaps")->check(CLI::Range(2, 4096));
  sub->add_option("--phead-rule", o->head_rule, "single | multi")->check(CLI::IsMember({"single", "multi"}));
  sub->callback([o, &common, &exit_code] {
    exit_code = run_eval(*o, common.threads);
  });
}

}  // namespace gazekit::cli
