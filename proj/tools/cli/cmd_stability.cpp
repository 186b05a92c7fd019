#include <map>
#include <sstream>

#include "common.hpp"
#include "gazekit/rng.hpp"
#include "gazekit/stability.hpp"

namespace gazekit::cli {
namespace {

struct StabilityOptions {
  std::string manifest;
  std::string mode = "consistent";
  int crops = 5;
  double min_fraction = 0.25;
  std::string out;
};

using Loc = ParseError::Location;

std::vector<StabilityImage> read_manifest(const std::filesystem::path& path, std::uint64_t seed) {
  std::vector<StabilityImage> images;
  const auto base = path.parent_path();
  for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    const auto fail = [&](const std::string& what) { throw ParseError(path.string(), Loc::kLine, line, what); };
    const auto pixel = [&](const char* key) {
      if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2 || !j[key][0].is_number_integer() ||
          !j[key][1].is_number_integer()) {
        fail(std::string("field '") + key + "' must be an integer pixel [x, y]");
      }
      return PixelIndex{j[key][0].get<int>(), j[key][1].get<int>()};
    };
    StabilityImage img;
    if (!j.contains("image_id") || !j["image_id"].is_string()) fail("field 'image_id' must be a string");
    img.id = j["image_id"].get<std::string>();
    if (!j.contains("width") || !j["width"].is_number_integer() || !j.contains("height") ||
        !j["height"].is_number_integer()) {
      fail("fields 'width' and 'height' must be integers");
    }
    const int w = j["width"].get<int>();
    const int h = j["height"].get<int>();
    img.eye = pixel("eye_px");
    img.gaze = pixel("gaze_px");
    const bool synthetic = j.contains("synthetic");
    if (synthetic == j.contains("depth_paths")) fail("exactly one of 'synthetic' or 'depth_paths' is required");
    const nlohmann::json& src = synthetic ? j["synthetic"] : j;
    if (!src.contains("focal_px") || !src["focal_px"].is_number()) fail("field 'focal_px' must be a number");
    try {
      img.intrinsics = CameraIntrinsics::centered(src["focal_px"].get<double>(), w, h);
    } catch (const InvalidInput& e) {
      fail(e.what());
    }
    if (j.contains("principal")) {
      const auto& p = j["principal"];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) fail("field 'principal' must be [x, y]");
      img.intrinsics.principal_x = p[0].get<double>();
      img.intrinsics.principal_y = p[1].get<double>();
    }
    if (synthetic) {
      const auto& s = j["synthetic"];
      if (!s.contains("planes") || !s["planes"].is_array() || s["planes"].empty()) {
        fail("field 'synthetic.planes' must be a non-empty array of [nx, ny, nz, offset]");
      }
      std::vector<Plane> planes;
      for (const auto& p : s["planes"]) {
        if (!p.is_array() || p.size() != 4) fail("each plane must be [nx, ny, nz, offset]");
        planes.push_back({Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>()), p[3].get<double>()});
      }
      const double noise = s.value("shift_noise", 0.0);
      const std::uint64_t noise_seed = s.contains("noise_seed") ? s["noise_seed"].get<std::uint64_t>()
                                                                : Rng::derive(seed ^ 0x5eedULL, images.size());
      try {
        img.provider = std::make_shared<SyntheticSceneProvider>(img.intrinsics, std::move(planes), noise, noise_seed);
      } catch (const InvalidInput& e) {
        fail(e.what());
      }
    } else {
      const auto& paths = j["depth_paths"];
      if (!paths.is_object() || paths.empty()) fail("field 'depth_paths' must be a non-empty object");
      std::map<std::tuple<int, int, int, int>, FileDepthProvider::Entry> entries;
      for (auto it = paths.begin(); it != paths.end(); ++it) {
        int x0, y0, cw, ch;
        char tail;
        if (std::sscanf(it.key().c_str(), "%d,%d,%d,%d%c", &x0, &y0, &cw, &ch, &tail) != 4) {
          fail("crop key '" + it.key() + "' must be \"x0,y0,width,height\"");
        }
        FileDepthProvider::Entry e;
        if (it.value().is_string()) {
          e.path = it.value().get<std::string>();
        } else if (it.value().is_object() && it.value().contains("path")) {
          e.path = it.value()["path"].get<std::string>();
          if (it.value().contains("focal_px")) e.focal_px = it.value()["focal_px"].get<double>();
        } else {
          fail("depth path entries must be a path or {\"path\", \"focal_px\"}");
        }
        if (e.path.is_relative()) e.path = base / e.path;
        entries.emplace(std::make_tuple(x0, y0, cw, ch), e);
      }
      auto provider = std::make_shared<FileDepthProvider>(std::move(entries), img.intrinsics.focal_px);
      img.crops = provider->crops();
      img.provider = provider;
    }
    images.push_back(std::move(img));
  });
  return images;
}

OrderedJson vec_json(const Vec3& v) { return OrderedJson::array({v.x(), v.y(), v.z()}); }

int run_stability(const StabilityOptions& o, const CommonOptions& common) {
  const auto images = read_manifest(o.manifest, common.seed);
  StabilityParams params;
  params.mode = o.mode == "recentered" ? CropMode::kRecentered : CropMode::kConsistent;
  params.crops = o.crops;
  params.min_fraction = o.min_fraction;
  params.seed = common.seed;
  params.threads = common.threads;
  const StabilityResult r = stability(images, params);

  OrderedJson j;
  j["mode"] = o.mode;
  j["seed"] = common.seed;
  j["crops_per_image"] = o.crops;
  j["min_fraction"] = o.min_fraction;
  j["n_images"] = r.images.size();
  j["median_std"] = vec_json(r.median_std);
  OrderedJson per = OrderedJson::array();
  for (const auto& img : r.images) {
    OrderedJson e;
    e["image_id"] = img.id;
    e["crop_count"] = img.crop_count;
    e["failed_crops"] = img.failed_crops;
    e["std"] = vec_json(img.std);
    OrderedJson crops = OrderedJson::array();
    for (const auto& c : img.crops) crops.push_back({c.x0, c.y0, c.width, c.height});
    e["crops"] = crops;
    OrderedJson vectors = OrderedJson::array();
    for (const auto& v : img.vectors) vectors.push_back(vec_json(v));
    e["vectors"] = vectors;
    per.push_back(e);
  }
  j["images"] = per;
  OrderedJson excluded = OrderedJson::array();
  for (const auto& [id, reason] : r.excluded) {
    OrderedJson e;
    e["image_id"] = id;
    e["reason"] = reason;
    excluded.push_back(e);
  }
  j["excluded"] = excluded;
  write_output(o.out, render_json(j));
  return kSuccess;
}

}  // namespace

void add_stability(CLI::App& app, const CommonOptions& common, int& exit_code) {
  auto o = std::make_shared<StabilityOptions>();
  auto* sub = app.add_subcommand("stability", "Crop-ensemble stability of depth-derived gaze vectors");
  sub->add_option("--manifest", o->manifest, "Manifest JSON Lines")->required()->check(CLI::ExistingFile);
  sub->add_option("--mode", o->mode, "consistent | recentered")->check(CLI::IsMember({"consistent", "recentered"}));
  sub->add_option("--crops", o->crops, "Random crops per image")->check(CLI::Range(1, 1000));
  sub->add_option("--min-fraction", o->min_fraction, "Minimum crop area fraction")->check(CLI::Range(0.01, 1.0));
  sub->add_option("--out", o->out, "JSON output (stdout if omitted)");
  sub->callback([o, &common, &exit_code] { exit_code = run_stability(*o, common); });
}

}  // namespace gazekit::cli
