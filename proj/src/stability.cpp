#include "gazekit/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gazekit/parallel.hpp"
#include "gazekit/raster_io.hpp"
#include "gazekit/rng.hpp"

namespace gazekit {

SyntheticSceneProvider::SyntheticSceneProvider(CameraIntrinsics full, std::vector<Plane> planes,
                                               double shift_noise, std::uint64_t noise_seed)
    : full_(full), planes_(std::move(planes)), shift_noise_(shift_noise), noise_seed_(noise_seed) {
  full_.validate();
  if (planes_.empty()) throw InvalidInput("synthetic scene needs at least one plane");
  if (!(shift_noise_ >= 0.0)) throw InvalidInput("shift noise must be non-negative");
}

double SyntheticSceneProvider::true_depth(double x, double y) const {
  const Vec3 ray((x - full_.principal_x) / full_.focal_px, (y - full_.principal_y) / full_.focal_px, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& plane : planes_) {
    const double denom = plane.normal.dot(ray);
    if (denom == 0.0) continue;
    const double t = plane.offset / denom;
    if (t > 0.0 && t < best) best = t;
  }
  return std::isfinite(best) ? best : std::numeric_limits<double>::quiet_NaN();
}

double SyntheticSceneProvider::shift_for_crop(std::size_t crop_index) const {
  if (shift_noise_ == 0.0) return 0.0;
  Rng rng(Rng::derive(noise_seed_, crop_index));
  return shift_noise_ * rng.uniform(-1.0, 1.0);
}

DepthSample SyntheticSceneProvider::depth_for_crop(const CropRect& crop, std::size_t crop_index) const {
  const double shift = shift_for_crop(crop_index);
  std::vector<double> values(static_cast<std::size_t>(crop.width) * static_cast<std::size_t>(crop.height));
  for (int v = 0; v < crop.height; ++v) {
    for (int u = 0; u < crop.width; ++u) {
      const double z = true_depth(u + crop.x0, v + crop.y0);
      const double inv = 1.0 / z + shift;
      values[static_cast<std::size_t>(v) * crop.width + u] =
          (std::isfinite(z) && inv > 0.0) ? 1.0 / inv : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return {DepthMap(crop.width, crop.height, std::move(values)), full_.focal_px};
}

FileDepthProvider::FileDepthProvider(std::map<std::tuple<int, int, int, int>, Entry> entries,
                                     double default_focal)
    : entries_(std::move(entries)), default_focal_(default_focal) {}

DepthSample FileDepthProvider::depth_for_crop(const CropRect& crop, std::size_t) const {
  const auto it = entries_.find({crop.x0, crop.y0, crop.width, crop.height});
  if (it == entries_.end()) throw InvalidInput("no depth raster registered for the requested crop");
  DepthMap depth = io::load_depth(it->second.path, std::nullopt);
  if (depth.width() != crop.width || depth.height() != crop.height) {
    throw InvalidInput(it->second.path.string() + ": raster size does not match its crop");
  }
  return {std::move(depth), it->second.focal_px.value_or(default_focal_)};
}

std::vector<CropRect> FileDepthProvider::crops() const {
  std::vector<CropRect> out;
  for (const auto& [key, entry] : entries_) {
    const auto [x0, y0, w, h] = key;
    out.push_back({x0, y0, w, h});
  }
  return out;
}

std::vector<CropRect> sample_crops(int width, int height, int n, const CropConstraints& c,
                                   std::uint64_t seed) {
  if (width < 1 || height < 1 || n < 1) throw InvalidInput("crop sampling needs a non-empty image and n >= 1");
  if (!(c.min_fraction > 0.0 && c.min_fraction <= 1.0)) {
    throw InvalidInput("minimum crop fraction must lie in (0, 1]");
  }
  int ax_min = width - 1, ax_max = 0, ay_min = height - 1, ay_max = 0;
  for (const auto& a : c.anchors) {
    if (a.x < 0 || a.y < 0 || a.x >= width || a.y >= height) {
      throw InvalidInput("crop anchor lies outside the image");
    }
    ax_min = std::min(ax_min, a.x);
    ax_max = std::max(ax_max, a.x);
    ay_min = std::min(ay_min, a.y);
    ay_max = std::max(ay_max, a.y);
  }
  const double min_area = c.min_fraction * static_cast<double>(width) * static_cast<double>(height);
  const int w_min = std::max(1, static_cast<int>(std::ceil(c.min_fraction * width)));
  Rng rng(seed);
  std::vector<CropRect> crops;
  for (int k = 0; k < n; ++k) {
    bool found = false;
    for (int attempt = 0; attempt < c.max_tries && !found; ++attempt) {
      const int w = rng.uniform_int(w_min, width);
      const int h_min = std::max(1, static_cast<int>(std::ceil(min_area / w)));
      if (h_min > height) continue;
      const int h = rng.uniform_int(h_min, height);
      const int x_lo = std::max(0, ax_max - w + 1);
      const int x_hi = std::min(width - w, ax_min);
      const int y_lo = std::max(0, ay_max - h + 1);
      const int y_hi = std::min(height - h, ay_min);
      if (x_lo > x_hi || y_lo > y_hi) continue;
      crops.push_back({rng.uniform_int(x_lo, x_hi), rng.uniform_int(y_lo, y_hi), w, h});
      found = true;
    }
    if (!found) throw InvalidInput("crop constraints unsatisfiable after " + std::to_string(c.max_tries) + " draws");
  }
  return crops;
}

Vec3 gaze_vector_for_crop(const CropRect& crop, const DepthProvider& provider, std::size_t crop_index,
                          const CameraIntrinsics& full, PixelIndex eye, PixelIndex gaze, CropMode mode) {
  if (!crop.contains(eye.x, eye.y) || !crop.contains(gaze.x, gaze.y)) {
    throw InvalidInput("eye and gaze pixels must lie inside the crop");
  }
  const DepthSample sample = provider.depth_for_crop(crop, crop_index);
  if (sample.depth.width() != crop.width || sample.depth.height() != crop.height) {
    throw InvalidInput("depth provider returned a raster that does not match the crop");
  }
  const CameraIntrinsics k = crop_intrinsics(full, crop, mode, sample.focal_px);
  const auto point = [&](PixelIndex p, const char* what) {
    const int u = p.x - crop.x0;
    const int v = p.y - crop.y0;
    if (!sample.depth.valid(u, v)) throw InvalidInput(std::string("invalid depth at the ") + what + " pixel");
    return unproject_pixel(u, v, sample.depth.at(u, v), k);
  };
  const Vec3 d = point(gaze, "gaze") - point(eye, "eye");
  const double n = d.norm();
  if (!(n > 1e-12)) throw InvalidInput("eye and gaze map to the same 3D point");
  return d / n;
}

Vec3 population_std(std::span<const Vec3> vectors) {
  if (vectors.empty()) throw InvalidInput("standard deviation of an empty set");
  Vec3 mean = Vec3::Zero();
  for (const auto& v : vectors) mean += v;
  mean /= static_cast<double>(vectors.size());
  Vec3 var = Vec3::Zero();
  for (const auto& v : vectors) var += (v - mean).cwiseAbs2();
  var /= static_cast<double>(vectors.size());
  return var.cwiseSqrt();
}

Vec3 componentwise_median(std::span<const Vec3> vectors) {
  if (vectors.empty()) throw InvalidInput("median of an empty set");
  Vec3 out;
  std::vector<double> col(vectors.size());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < vectors.size(); ++i) col[i] = vectors[i][c];
    std::sort(col.begin(), col.end());
    const std::size_t m = col.size() / 2;
    out[c] = col.size() % 2 == 1 ? col[m] : 0.5 * (col[m - 1] + col[m]);
  }
  return out;
}

StabilityResult stability(std::span<const StabilityImage> images, const StabilityParams& params) {
  if (images.empty()) throw InvalidInput("stability audit needs at least one image");
  struct Outcome {
    std::optional<ImageStability> ok;
    std::string error;
  };
  std::vector<Outcome> outcomes(images.size());
  parallel_for(images.size(), params.threads, [&](std::size_t i) {
    const auto& img = images[i];
    ImageStability r;
    r.id = img.id;
    try {
      if (!img.provider) throw InvalidInput("image has no depth provider");
      r.crops = img.crops;
      if (r.crops.empty()) {
        CropConstraints c;
        c.min_fraction = params.min_fraction;
        c.anchors = {img.eye, img.gaze};
        r.crops = sample_crops(img.intrinsics.width, img.intrinsics.height, params.crops, c,
                               Rng::derive(params.seed, i));
      }
      std::string last_error;
      for (std::size_t k = 0; k < r.crops.size(); ++k) {
        try {
          r.vectors.push_back(gaze_vector_for_crop(r.crops[k], *img.provider, k, img.intrinsics, img.eye,
                                                   img.gaze, params.mode));
        } catch (const InvalidInput& e) {
          ++r.failed_crops;
          last_error = e.what();
        }
      }
      if (r.vectors.empty()) throw InvalidInput("all crops failed: " + last_error);
      r.crop_count = r.vectors.size();
      r.std = population_std(r.vectors);
      outcomes[i].ok = std::move(r);
    } catch (const Error& e) {
      outcomes[i].error = e.what();
    }
  });

  StabilityResult result;
  std::vector<Vec3> stds;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (outcomes[i].ok) {
      stds.push_back(outcomes[i].ok->std);
      result.images.push_back(std::move(*outcomes[i].ok));
    } else {
      result.excluded.emplace_back(images[i].id, outcomes[i].error);
    }
  }
  if (stds.empty()) throw InvalidInput("every image was excluded from the stability audit");
  result.median_std = componentwise_median(stds);
  return result;
}

}  // namespace gazekit
