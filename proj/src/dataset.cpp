#include "gazekit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <set>
#include <tuple>

#include "gazekit/json_writer.hpp"
#include "gazekit/supervision.hpp"

namespace gazekit {
namespace {

using nlohmann::json;
using Loc = ParseError::Location;

class LineReader {
 public:
  LineReader(const std::string& source, std::size_t line) : source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, Loc::kLine, line_, what);
  }

  const json& field(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(std::string("missing field '") + key + "'");
    return *it;
  }

  std::string string_field(const json& obj, const char* key) const {
    const auto& v = field(obj, key);
    if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }

  double unit_number(const json& v, const char* key) const {
    if (!v.is_number()) fail(std::string("field '") + key + "' must contain numbers");
    const double d = v.get<double>();
    if (!(d >= 0.0 && d <= 1.0)) {
      fail(std::string("field '") + key + "' must contain normalised coordinates in [0,1]");
    }
    return d;
  }

  Box box(const json& v, const char* key) const {
    if (!v.is_array() || v.size() != 4) fail(std::string("field '") + key + "' must be [x0, y0, x1, y1]");
    Box b{unit_number(v[0], key), unit_number(v[1], key), unit_number(v[2], key),
          unit_number(v[3], key)};
    if (!b.valid()) fail(std::string("field '") + key + "' needs x0 < x1 and y0 < y1");
    return b;
  }

  Vec2 point(const json& v, const char* key) const {
    if (!v.is_array() || v.size() != 2) fail(std::string("field '") + key + "' must be [x, y]");
    return {unit_number(v[0], key), unit_number(v[1], key)};
  }

  std::int64_t frame(const json& obj) const {
    const auto& v = field(obj, "frame");
    if (!v.is_number_integer()) fail("field 'frame' must be an integer");
    const auto f = v.get<std::int64_t>();
    if (f < 0) fail("field 'frame' must be non-negative");
    return f;
  }

 private:
  const std::string& source_;
  std::size_t line_;
};

json parse_line(const std::string& text, const std::string& source, std::size_t line) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ParseError(source, Loc::kLine, line, "expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(source, Loc::kLine, line,
                     "malformed JSON at column " + std::to_string(e.byte));
  }
}

std::string legal_labels() {
  std::string s;
  for (auto name : kGazeLabelNames) {
    if (!s.empty()) s += ", ";
    s += name;
  }
  return s;
}

const std::set<std::string>& annotation_keys() {
  static const std::set<std::string> keys = {"video_id", "clip_id",    "frame",      "person_id",
                                             "is_child", "head_bbox",  "gaze_label", "gaze_point",
                                             "annotator_id"};
  return keys;
}

AnnotationInstance parse_annotation(const json& j, const LineReader& r) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!annotation_keys().contains(it.key())) r.fail("unknown field '" + it.key() + "'");
  }
  AnnotationInstance a;
  a.video_id = r.string_field(j, "video_id");
  a.clip_id = r.string_field(j, "clip_id");
  a.frame = r.frame(j);
  a.person_id = r.string_field(j, "person_id");
  const auto& child = r.field(j, "is_child");
  if (!child.is_boolean()) r.fail("field 'is_child' must be a boolean");
  a.is_child = child.get<bool>();
  a.head_bbox = r.box(r.field(j, "head_bbox"), "head_bbox");
  const std::string label = r.string_field(j, "gaze_label");
  const auto parsed = parse_gaze_label(label);
  if (!parsed) {
    r.fail("field 'gaze_label': unknown value '" + label + "' (expected one of " + legal_labels() + ")");
  }
  a.gaze_label = *parsed;
  const auto gp = j.find("gaze_point");
  const bool has_point = gp != j.end() && !gp->is_null();
  if (a.gaze_label == GazeLabel::kInsideFrame) {
    if (!has_point) r.fail("field 'gaze_point' is required when gaze_label is inside-frame");
    a.gaze_point = r.point(*gp, "gaze_point");
  } else if (has_point) {
    r.fail("field 'gaze_point' is only allowed when gaze_label is inside-frame (got " + label + ")");
  }
  const auto ann = j.find("annotator_id");
  if (ann != j.end() && !ann->is_null()) {
    if (!ann->is_string()) r.fail("field 'annotator_id' must be a string");
    a.annotator_id = ann->get<std::string>();
  }
  return a;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

LookingAtHeadCell finish(LookingAtHeadCell c) {
  if (c.population > 0) c.percent = 100.0 * static_cast<double>(c.looking) / static_cast<double>(c.population);
  return c;
}

}  // namespace

std::string_view to_string(GazeLabel label) { return kGazeLabelNames[static_cast<std::size_t>(label)]; }

std::optional<GazeLabel> parse_gaze_label(std::string_view name) {
  for (std::size_t i = 0; i < kGazeLabelCount; ++i) {
    if (kGazeLabelNames[i] == name) return static_cast<GazeLabel>(i);
  }
  return std::nullopt;
}

std::vector<AnnotationInstance> parse_annotations(std::istream& in, const std::string& source) {
  std::vector<AnnotationInstance> out;
  const auto lines = read_lines(in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const LineReader reader(source, i + 1);
    out.push_back(parse_annotation(parse_line(lines[i], source, i + 1), reader));
  }
  return out;
}

std::vector<AnnotationInstance> parse_annotations(const std::filesystem::path& path) {
  auto in = open_text(path);
  return parse_annotations(in, path.string());
}

std::string serialize_annotation(const AnnotationInstance& a) {
  OrderedJson j;
  j["video_id"] = a.video_id;
  j["clip_id"] = a.clip_id;
  j["frame"] = a.frame;
  j["person_id"] = a.person_id;
  j["is_child"] = a.is_child;
  j["head_bbox"] = {a.head_bbox.x0, a.head_bbox.y0, a.head_bbox.x1, a.head_bbox.y1};
  j["gaze_label"] = std::string(to_string(a.gaze_label));
  if (a.gaze_point) j["gaze_point"] = {a.gaze_point->x(), a.gaze_point->y()};
  if (a.annotator_id) j["annotator_id"] = *a.annotator_id;
  return dump_json(j);
}

HeadDetections parse_head_detections(std::istream& in, const std::string& source) {
  HeadDetections out;
  const auto lines = read_lines(in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const json j = parse_line(lines[i], source, i + 1);
    const LineReader r(source, i + 1);
    FrameKey key{r.string_field(j, "video_id"), r.frame(j)};
    const auto& boxes = r.field(j, "boxes");
    if (!boxes.is_array()) r.fail("field 'boxes' must be an array");
    auto& dst = out[key];
    for (const auto& b : boxes) dst.push_back(r.box(b, "boxes"));
  }
  return out;
}

HeadDetections parse_head_detections(const std::filesystem::path& path) {
  auto in = open_text(path);
  return parse_head_detections(in, path.string());
}

Histogram::Histogram(double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw InvalidInput("histogram needs bins >= 1 and hi > lo");
  edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * i / bins;
  counts.assign(static_cast<std::size_t>(bins), 0);
}

void Histogram::add(double v) {
  const double lo = edges.front();
  const double hi = edges.back();
  const auto n = static_cast<long>(counts.size());
  long bin = static_cast<long>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n)));
  bin = std::clamp(bin, 0L, n - 1);
  ++counts[static_cast<std::size_t>(bin)];
}

std::size_t Histogram::total() const noexcept {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

Histogram2D::Histogram2D(int bx, int by) : bins_x(bx), bins_y(by) {
  if (bx < 1 || by < 1) throw InvalidInput("2D histogram needs at least one bin per axis");
  counts.assign(static_cast<std::size_t>(bx) * static_cast<std::size_t>(by), 0);
}

void Histogram2D::add(const Vec2& p) {
  const int x = std::clamp(static_cast<int>(std::floor(p.x() * bins_x)), 0, bins_x - 1);
  const int y = std::clamp(static_cast<int>(std::floor(p.y() * bins_y)), 0, bins_y - 1);
  ++counts[static_cast<std::size_t>(y) * static_cast<std::size_t>(bins_x) + static_cast<std::size_t>(x)];
}

std::size_t Histogram2D::total() const noexcept {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double gaze_angle_deg(const Vec2& head_center, const Vec2& gaze_point) {
  const double dx = gaze_point.x() - head_center.x();
  const double dy = gaze_point.y() - head_center.y();
  const double deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
  return deg <= -180.0 ? 180.0 : deg;
}

double head_gaze_distance(const Vec2& head_center, const Vec2& gaze_point) {
  const double dx = gaze_point.x() - head_center.x();
  const double dy = gaze_point.y() - head_center.y();
  return std::sqrt(dx * dx + dy * dy);
}

std::string instance_key(const AnnotationInstance& a) {
  return a.video_id + ":" + a.clip_id + ":" + std::to_string(a.frame) + ":" + a.person_id;
}

std::array<double, kGazeLabelCount> label_distribution(std::span<const AnnotationInstance> instances) {
  if (instances.empty()) throw InvalidInput("label distribution needs at least one instance");
  std::array<std::size_t, kGazeLabelCount> counts{};
  for (const auto& a : instances) ++counts[static_cast<std::size_t>(a.gaze_label)];
  std::array<double, kGazeLabelCount> out{};
  for (std::size_t i = 0; i < kGazeLabelCount; ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(instances.size());
  }
  return out;
}

DatasetStats compute_stats(std::span<const AnnotationInstance> instances,
                           const std::optional<HeadDetections>& detections, const StatsConfig& config) {
  if (instances.empty()) throw InvalidInput("statistics need at least one instance");
  DatasetStats s;
  s.n_instances = instances.size();
  s.head_area = Histogram(0.0, 1.0, config.area_bins);
  s.gaze_angle = Histogram(-180.0, 180.0, config.angle_bins);
  s.head_gaze_distance = Histogram(0.0, std::numbers::sqrt2, config.distance_bins);
  s.gaze_points = Histogram2D(config.gaze_grid, config.gaze_grid);
  s.head_box_source = detections ? "detections" : "annotations";

  // Distinct people and annotated head boxes per frame.
  std::map<FrameKey, std::set<std::string>> people;
  std::map<FrameKey, std::vector<Box>> annotated_boxes;
  for (const auto& a : instances) {
    const FrameKey fk{a.video_id, a.frame};
    if (people[fk].insert(a.person_id).second) annotated_boxes[fk].push_back(a.head_bbox);
  }

  std::size_t children = 0;
  for (const auto& a : instances) {
    ++s.label_counts[static_cast<std::size_t>(a.gaze_label)];
    if (a.is_child) ++children;
    s.head_area.add(a.head_bbox.area());
    InstanceGeometry g{instance_key(a) + (a.annotator_id ? ":" + *a.annotator_id : std::string()),
                       a.head_bbox.area(), std::nullopt, std::nullopt};
    if (!a.gaze_point) {
      ++s.n_without_gaze;
      s.per_instance.push_back(std::move(g));
      continue;
    }
    ++s.n_with_gaze;
    const Vec2 c = a.head_bbox.center();
    g.gaze_angle_deg = gaze_angle_deg(c, *a.gaze_point);
    g.head_gaze_distance = head_gaze_distance(c, *a.gaze_point);
    s.gaze_angle.add(*g.gaze_angle_deg);
    s.head_gaze_distance.add(*g.head_gaze_distance);
    s.gaze_points.add(*a.gaze_point);
    s.per_instance.push_back(std::move(g));

    const FrameKey fk{a.video_id, a.frame};
    std::span<const Box> boxes;
    if (detections) {
      const auto it = detections->find(fk);
      if (it != detections->end()) boxes = it->second;
    } else {
      boxes = annotated_boxes[fk];
    }
    const Vec2 pts[1] = {*a.gaze_point};
    const bool looking = phead_gt(pts, boxes, HeadRule::kSingle);
    const bool multi = people[fk].size() >= 2;
    auto& all = a.is_child ? s.looking_at_head.all_child : s.looking_at_head.all_adult;
    ++all.population;
    all.looking += looking ? 1 : 0;
    if (multi) {
      auto& m = a.is_child ? s.looking_at_head.multi_child : s.looking_at_head.multi_adult;
      ++m.population;
      m.looking += looking ? 1 : 0;
    }
  }
  std::sort(s.per_instance.begin(), s.per_instance.end(),
            [](const InstanceGeometry& a, const InstanceGeometry& b) {
              return std::tie(a.key, a.head_area) < std::tie(b.key, b.head_area);
            });
  for (std::size_t i = 0; i < kGazeLabelCount; ++i) {
    s.label_fractions[i] = static_cast<double>(s.label_counts[i]) / static_cast<double>(s.n_instances);
  }
  s.child_fraction = static_cast<double>(children) / static_cast<double>(s.n_instances);
  auto& l = s.looking_at_head;
  l.all_child = finish(l.all_child);
  l.all_adult = finish(l.all_adult);
  l.multi_child = finish(l.multi_child);
  l.multi_adult = finish(l.multi_adult);
  return s;
}

BinaryMask render_head_mask(const Box& box, int width, int height) {
  if (width < 1 || height < 1) throw InvalidInput("mask dimensions must be at least 1x1");
  BinaryMask m{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
  bool any = false;
  for (int y = 0; y < height; ++y) {
    const double cy = (y + 0.5) / height;
    if (cy < box.y0 || cy > box.y1) continue;
    for (int x = 0; x < width; ++x) {
      const double cx = (x + 0.5) / width;
      if (cx < box.x0 || cx > box.x1) continue;
      m.values[static_cast<std::size_t>(y) * width + x] = 1;
      any = true;
    }
  }
  if (!any) {
    const Vec2 c = box.center();
    const int x = std::clamp(static_cast<int>(std::floor(c.x() * width)), 0, width - 1);
    const int y = std::clamp(static_cast<int>(std::floor(c.y() * height)), 0, height - 1);
    m.values[static_cast<std::size_t>(y) * width + x] = 1;
  }
  return m;
}

PairingResult pair_double_coded(std::span<const AnnotationInstance> instances) {
  std::map<std::string, std::vector<const AnnotationInstance*>> groups;
  for (const auto& a : instances) groups[instance_key(a)].push_back(&a);
  PairingResult out;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [](const auto* a, const auto* b) {
      return a->annotator_id.value_or("") < b->annotator_id.value_or("");
    });
    const bool distinct = members.size() == 2 && members[0]->annotator_id && members[1]->annotator_id &&
                          *members[0]->annotator_id != *members[1]->annotator_id;
    if (!distinct) {
      out.unmatched.push_back(key + " (" + std::to_string(members.size()) + " annotation(s))");
      continue;
    }
    out.pairs.push_back({*members[0], *members[1]});
  }
  return out;
}

EvalReport agreement_eval(std::span<const DoubleCodedPair> pairs, const AgreementParams& params) {
  if (pairs.empty()) throw InvalidInput("agreement evaluation needs at least one pair");
  const auto inout = [](GazeLabel l) -> std::optional<int> {
    if (l == GazeLabel::kInsideFrame) return 1;
    if (l == GazeLabel::kOutsideFrame) return 0;
    return std::nullopt;
  };
  std::vector<EvalInstance> instances;
  instances.reserve(pairs.size());
  for (const auto& [pred, ref] : pairs) {
    EvalInstance e;
    e.id = instance_key(ref);
    e.is_child = ref.is_child;
    e.inside_frame = pred.gaze_point.has_value() && ref.gaze_point.has_value();
    if (e.inside_frame) {
      e.predicted_point = *pred.gaze_point;
      e.gt_points = {*ref.gaze_point};
      const Vec2 peak = normalized_to_grid(*pred.gaze_point, params.grid, params.grid);
      e.predicted_heatmap = render_gt_heatmap(peak, params.grid, params.grid, params.eval.gt_sigma).values;
    }
    const auto score = inout(pred.gaze_label);
    const auto label = inout(ref.gaze_label);
    if (score && label) {
      e.inout_score = static_cast<double>(*score);
      e.inout_label = label;
    }
    instances.push_back(std::move(e));
  }
  return evaluate(instances, params.eval);
}

}  // namespace gazekit
