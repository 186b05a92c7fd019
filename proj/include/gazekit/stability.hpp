#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <tuple>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gazekit/geometry.hpp"

namespace gazekit {

struct DepthSample {
  DepthMap depth;
  double focal_px = 0.0;
};

/// Source of per-crop depth and focal length, standing in for a monocular
/// depth + focal estimator run on each crop.
class DepthProvider {
 public:
  virtual ~DepthProvider() = default;
  /// The returned map must be crop.width x crop.height.
  virtual DepthSample depth_for_crop(const CropRect& crop, std::size_t crop_index) const = 0;
};

/// Plane n . P = offset in camera coordinates.
struct Plane {
  Vec3 normal;
  double offset = 0.0;
};

/// Analytic scene made of planes, rendered through the true full-image
/// intrinsics. Optional up-to-shift-and-scale error: each crop's inverse
/// depth is offset by shift_noise * u_k with u_k uniform in [-1, 1], drawn
/// from a stream seeded by (noise_seed, crop index).
class SyntheticSceneProvider : public DepthProvider {
 public:
  SyntheticSceneProvider(CameraIntrinsics full, std::vector<Plane> planes, double shift_noise = 0.0,
                         std::uint64_t noise_seed = 0);

  DepthSample depth_for_crop(const CropRect& crop, std::size_t crop_index) const override;

  /// Noise-free depth at a full-image pixel, NaN when no plane is hit.
  double true_depth(double x, double y) const;
  double shift_for_crop(std::size_t crop_index) const;

 private:
  CameraIntrinsics full_;
  std::vector<Plane> planes_;
  double shift_noise_;
  std::uint64_t noise_seed_;
};

/// Precomputed rasters, one per crop rectangle.
class FileDepthProvider : public DepthProvider {
 public:
  struct Entry {
    std::filesystem::path path;
    std::optional<double> focal_px;
  };

  FileDepthProvider(std::map<std::tuple<int, int, int, int>, Entry> entries, double default_focal);

  DepthSample depth_for_crop(const CropRect& crop, std::size_t crop_index) const override;
  std::vector<CropRect> crops() const;

 private:
  std::map<std::tuple<int, int, int, int>, Entry> entries_;
  double default_focal_;
};

struct PixelIndex {
  int x = 0;
  int y = 0;
};

struct CropConstraints {
  /// Minimum crop area as a fraction of the image area.
  double min_fraction = 0.25;
  /// Pixels every crop must contain.
  std::vector<PixelIndex> anchors;
  int max_tries = 1000;
};

/// `n` axis-aligned crops, deterministic in `seed`. Throws InvalidInput if a
/// crop satisfying the constraints is not found within max_tries draws.
std::vector<CropRect> sample_crops(int width, int height, int n, const CropConstraints& constraints,
                                   std::uint64_t seed);

/// Unit camera-frame vector from the eye point to the gaze point as seen
/// through one crop.
Vec3 gaze_vector_for_crop(const CropRect& crop, const DepthProvider& provider, std::size_t crop_index,
                          const CameraIntrinsics& full, PixelIndex eye, PixelIndex gaze, CropMode mode);

/// Component-wise population standard deviation.
Vec3 population_std(std::span<const Vec3> vectors);

/// Component-wise median (mean of the middle pair for even counts).
Vec3 componentwise_median(std::span<const Vec3> vectors);

struct StabilityImage {
  std::string id;
  CameraIntrinsics intrinsics;
  PixelIndex eye;
  PixelIndex gaze;
  std::shared_ptr<const DepthProvider> provider;
  /// Fixed crops (file-backed inputs); sampled when empty.
  std::vector<CropRect> crops;
};

struct StabilityParams {
  CropMode mode = CropMode::kConsistent;
  int crops = 5;
  double min_fraction = 0.25;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ImageStability {
  std::string id;
  Vec3 std = Vec3::Zero();
  std::size_t crop_count = 0;
  std::size_t failed_crops = 0;
  std::vector<CropRect> crops;
  std::vector<Vec3> vectors;
};

struct StabilityResult {
  std::vector<ImageStability> images;
  Vec3 median_std = Vec3::Zero();
  /// (image id, reason) for images where no crop produced a vector.
  std::vector<std::pair<std::string, std::string>> excluded;
};

/// Throws InvalidInput if `images` is empty or every image is excluded.
StabilityResult stability(std::span<const StabilityImage> images, const StabilityParams& params);

}  // namespace gazekit
