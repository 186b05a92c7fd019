#include <filesystem>
#include <sstream>

#include "common.hpp"
#include "gazekit/dataset.hpp"

namespace gazekit::cli {
namespace {

struct StatsOptions {
  std::string annotations;
  std::string head_detections;
  std::string out;
  std::string csv_dir;
  StatsConfig config;
};

OrderedJson histogram_json(const Histogram& h) {
  OrderedJson j;
  j["edges"] = h.edges;
  j["counts"] = h.counts;
  return j;
}

OrderedJson looking_json(const LookingAtHeadCell& c) {
  OrderedJson j;
  j["population"] = c.population;
  j["looking"] = c.looking;
  j["percent"] = optional_number(c.percent);
  return j;
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream s;
  s << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    s << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
  }
  return s.str();
}

int run_stats(const StatsOptions& o) {
  const auto annotations = parse_annotations(std::filesystem::path(o.annotations));
  std::optional<HeadDetections> detections;
  if (!o.head_detections.empty()) detections = parse_head_detections(std::filesystem::path(o.head_detections));
  const DatasetStats s = compute_stats(annotations, detections, o.config);

  OrderedJson j;
  j["n_instances"] = s.n_instances;
  j["n_with_gaze"] = s.n_with_gaze;
  j["n_without_gaze"] = s.n_without_gaze;
  j["child_fraction"] = s.child_fraction;
  j["head_box_source"] = s.head_box_source;
  OrderedJson labels;
  for (std::size_t i = 0; i < kGazeLabelCount; ++i) {
    OrderedJson l;
    l["count"] = s.label_counts[i];
    l["fraction"] = s.label_fractions[i];
    labels[std::string(kGazeLabelNames[i])] = l;
  }
  j["label_distribution"] = labels;
  OrderedJson lah;
  lah["all"]["child"] = looking_json(s.looking_at_head.all_child);
  lah["all"]["adult"] = looking_json(s.looking_at_head.all_adult);
  lah["multi"]["child"] = looking_json(s.looking_at_head.multi_child);
  lah["multi"]["adult"] = looking_json(s.looking_at_head.multi_adult);
  j["looking_at_head"] = lah;
  OrderedJson hist;
  hist["head_area"] = histogram_json(s.head_area);
  hist["gaze_angle_deg"] = histogram_json(s.gaze_angle);
  hist["head_gaze_distance"] = histogram_json(s.head_gaze_distance);
  hist["gaze_points"]["bins_x"] = s.gaze_points.bins_x;
  hist["gaze_points"]["bins_y"] = s.gaze_points.bins_y;
  hist["gaze_points"]["counts"] = s.gaze_points.counts;
  j["histograms"] = hist;
  OrderedJson per = OrderedJson::array();
  for (const auto& g : s.per_instance) {
    OrderedJson r;
    r["key"] = g.key;
    r["head_area"] = g.head_area;
    r["gaze_angle_deg"] = optional_number(g.gaze_angle_deg);
    r["head_gaze_distance"] = optional_number(g.head_gaze_distance);
    per.push_back(r);
  }
  j["per_instance"] = per;
  write_output(o.out, render_json(j));

  if (!o.csv_dir.empty()) {
    const std::filesystem::path dir(o.csv_dir);
    std::filesystem::create_directories(dir);
    write_output((dir / "head_area.csv").string(), histogram_csv(s.head_area));
    write_output((dir / "gaze_angle_deg.csv").string(), histogram_csv(s.gaze_angle));
    write_output((dir / "head_gaze_distance.csv").string(), histogram_csv(s.head_gaze_distance));
    std::ostringstream grid;
    grid << "bin_x,bin_y,x_lo,x_hi,y_lo,y_hi,count\n";
    for (int y = 0; y < s.gaze_points.bins_y; ++y) {
      for (int x = 0; x < s.gaze_points.bins_x; ++x) {
        grid << x << ',' << y << ',' << format_double(double(x) / s.gaze_points.bins_x) << ','
             << format_double(double(x + 1) / s.gaze_points.bins_x) << ','
             << format_double(double(y) / s.gaze_points.bins_y) << ','
             << format_double(double(y + 1) / s.gaze_points.bins_y) << ','
             << s.gaze_points.counts[static_cast<std::size_t>(y) * s.gaze_points.bins_x + x] << '\n';
      }
    }
    write_output((dir / "gaze_points.csv").string(), grid.str());
  }
  return kSuccess;
}

}  // namespace

void add_stats(CLI::App& app, int& exit_code) {
  auto o = std::make_shared<StatsOptions>();
  auto* sub = app.add_subcommand("stats", "Dataset statistics: geometry histograms, labels, looking-at-head rates");
  sub->add_option("--annotations", o->annotations, "Annotation JSON Lines")->required()->check(CLI::ExistingFile);
  sub->add_option("--head-detections", o->head_detections, "Head detection JSON Lines")->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "JSON output (stdout if omitted)");
  sub->add_option("--csv-dir", o->csv_dir, "Directory for CSV histograms");
  sub->add_option("--area-bins", o->config.area_bins)->check(CLI::Range(1, 10000));
  sub->add_option("--angle-bins", o->config.angle_bins)->check(CLI::Range(1, 3600));
  sub->add_option("--distance-bins", o->config.distance_bins)->check(CLI::Range(1, 10000));
  sub->add_option("--gaze-grid", o->config.gaze_grid)->check(CLI::Range(1, 1000));
  sub->callback([o, &exit_code] { exit_code = run_stats(*o); });
}

}  // namespace gazekit::cli
