#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazekit/geometry.hpp"

namespace gazekit::io {

/// Single-channel float raster as stored on disk.
///
/// GPDM layout: magic "GPDM", width (u32 LE), height (u32 LE), then
/// width*height float32 LE, row-major. NaN marks an invalid pixel.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<float> values;
};

Raster read_gpdm(std::istream& in, const std::string& source = "<stream>");
Raster read_gpdm(const std::filesystem::path& path);

void write_gpdm(std::ostream& out, int width, int height, std::span<const double> values);
void write_gpdm(const std::filesystem::path& path, int width, int height,
                std::span<const double> values);

/// Binary 16-bit PGM (P5, maxval > 255, big-endian samples). Zero samples are
/// invalid; other samples are multiplied by `scale_m_per_unit`.
Raster read_pgm16(std::istream& in, double scale_m_per_unit, const std::string& source = "<stream>");

/// 8-bit preview; values are clamped to [0,1] and NaN maps to 0.
void write_pgm8(const std::filesystem::path& path, int width, int height,
                std::span<const double> values);

/// JSON sidecar: {"focal_px", "width", "height", "principal": [x, y]?,
/// "scale_m_per_unit"?}.
struct IntrinsicsSidecar {
  CameraIntrinsics intrinsics;
  std::optional<double> scale_m_per_unit;
};

IntrinsicsSidecar parse_intrinsics_sidecar(const std::string& json_text,
                                           const std::string& source = "<sidecar>");
IntrinsicsSidecar read_intrinsics_sidecar(const std::filesystem::path& path);

DepthMap to_depth_map(const Raster& raster);

/// Loads a GPDM or 16-bit PGM depth file, chosen by magic bytes. PGM input
/// needs `scale_m_per_unit` from the sidecar.
DepthMap load_depth(const std::filesystem::path& path, std::optional<double> scale_m_per_unit);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace gazekit::io
