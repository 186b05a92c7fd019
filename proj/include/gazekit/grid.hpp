#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gazekit/error.hpp"

namespace gazekit {

/// Row-major 2D grid of doubles. Used for heatmaps, cosine fields and masks.
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w < 0 || h < 0) throw InvalidInput("grid dimensions must be non-negative");
  }
  Grid(int w, int h, std::vector<double> v) : width(w), height(h), values(std::move(v)) {
    if (w < 0 || h < 0 || values.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
      throw InvalidInput("grid value count does not match width x height");
    }
  }

  std::size_t size() const noexcept { return values.size(); }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  double& at(int x, int y) { return values[index(x, y)]; }
  double at(int x, int y) const { return values[index(x, y)]; }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }
  std::span<const double> span() const noexcept { return values; }

  bool same_shape(const Grid& other) const noexcept {
    return width == other.width && height == other.height;
  }
};

}  // namespace gazekit
