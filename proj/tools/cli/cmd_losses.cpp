#include "common.hpp"
#include "gazekit/supervision.hpp"

namespace gazekit::cli {
namespace {

struct LossOptions {
  std::string input;
  std::string out;
  LossWeights weights;
  double gt_sigma = kDefaultGtSigma;
  int hm_size = kDefaultHeatmapSize;
};

using Loc = ParseError::Location;

int run_losses(const LossOptions& o) {
  OrderedJson rows = OrderedJson::array();
  double sum = 0.0;
  std::size_t n = 0;
  for_each_json_line(o.input, [&](const nlohmann::json& j, std::size_t line) {
    const auto fail = [&](const std::string& what) { throw ParseError(o.input, Loc::kLine, line, what); };
    const auto vec3 = [&](const char* key) -> std::optional<Vec3> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      const auto& v = j[key];
      if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
        fail(std::string("field '") + key + "' must be [x, y, z]");
      }
      return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    };
    const auto number = [&](const char* key) {
      if (!j.contains(key) || !j[key].is_number()) fail(std::string("field '") + key + "' must be a number");
      return j[key].get<double>();
    };

    const auto g_p = vec3("g_p");
    if (!g_p) fail("field 'g_p' is required");
    const auto g_gt = vec3("g_gt");

    if (!j.contains("pred_heatmap") || !j["pred_heatmap"].is_object()) fail("field 'pred_heatmap' must be an object");
    const auto& ph = j["pred_heatmap"];
    if (!ph.contains("width") || !ph.contains("height") || !ph.contains("values") || !ph["values"].is_array()) {
      fail("field 'pred_heatmap' needs width, height and values");
    }
    const int w = ph["width"].get<int>();
    const int h = ph["height"].get<int>();
    if (w != o.hm_size || h != o.hm_size) {
      fail("pred_heatmap is " + std::to_string(w) + "x" + std::to_string(h) + " but --hm-size is " +
           std::to_string(o.hm_size));
    }
    const Grid pred(w, h, ph["values"].get<std::vector<double>>());

    OrderedJson r;
    r["id"] = j.contains("id") ? OrderedJson::parse(j["id"].dump()) : OrderedJson(n);
    LossParts parts;
    const bool hm_supervised = j.contains("gt_point") && !j["gt_point"].is_null();
    if (hm_supervised) {
      const auto& gp = j["gt_point"];
      if (!gp.is_array() || gp.size() != 2) fail("field 'gt_point' must be [x, y]");
      const Vec2 peak = normalized_to_grid({gp[0].get<double>(), gp[1].get<double>()}, w, h);
      parts.heatmap = loss_heatmap(pred, render_gt_heatmap(peak, w, h, o.gt_sigma).values);
    }
    if (g_gt) parts.direction = loss_direction(*g_p, *g_gt);
    parts.inout = loss_inout(number("o_p"), number("o_gt"));
    const double total = loss_total(parts, o.weights);
    r["l_hm"] = parts.heatmap;
    r["l_dir"] = parts.direction;
    r["l_io"] = parts.inout;
    r["hm_supervised"] = hm_supervised;
    r["dir_supervised"] = g_gt.has_value();
    r["total"] = total;
    rows.push_back(r);
    sum += total;
    ++n;
  });
  if (n == 0) throw InvalidInput("loss input has no rows");

  OrderedJson j;
  j["weights"]["lambda_hm"] = o.weights.heatmap;
  j["weights"]["lambda_dir"] = o.weights.direction;
  j["weights"]["lambda_io"] = o.weights.inout;
  j["gt_sigma"] = o.gt_sigma;
  j["hm_size"] = o.hm_size;
  j["rows"] = rows;
  j["sum_total"] = sum;
  j["mean_total"] = sum / static_cast<double>(n);
  write_output(o.out, render_json(j));
  return kSuccess;
}

}  // namespace

void add_losses(CLI::App& app, int& exit_code) {
  auto o = std::make_shared<LossOptions>();
  auto* sub = app.add_subcommand("losses", "Evaluate the heatmap, direction and in/out losses per row");
  sub->add_option("--input", o->input, "Loss rows as JSON Lines")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "JSON output (stdout if omitted)");
  sub->add_option("--lambda-hm", o->weights.heatmap)->check(CLI::NonNegativeNumber);
  sub->add_option("--lambda-dir", o->weights.direction)->check(CLI::NonNegativeNumber);
  sub->add_option("--lambda-io", o->weights.inout)->check(CLI::NonNegativeNumber);
  sub->add_option("--gt-sigma", o->gt_sigma)->check(CLI::PositiveNumber);
  sub->add_option("--hm-size", o->hm_size)->check(CLI::Range(1, 4096));
  sub->callback([o, &exit_code] { exit_code = run_losses(*o); });
}

}  // namespace gazekit::cli
