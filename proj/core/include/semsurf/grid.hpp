// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "semsurf/vec.hpp"

namespace semsurf {

/// Axis-aligned lattice of sample vertices. Vertices span the bounds inclusively
/// with uniform spacing; linear vertex indices are row-major with x fastest:
/// index = i + nx * (j + ny * k).
struct GridSpec {
  std::array<std::size_t, 3> resolution{2, 2, 2};
  Vec3 min{-1.0, -1.0, -1.0};
  Vec3 max{1.0, 1.0, 1.0};

  /// Throws InvalidInput unless every resolution >= 2 and min < max per axis.
  void validate() const;

  std::size_t vertex_count() const { return resolution[0] * resolution[1] * resolution[2]; }
  std::size_t cell_count() const {
    return (resolution[0] - 1) * (resolution[1] - 1) * (resolution[2] - 1);
  }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + resolution[0] * (j + resolution[1] * k);
  }
  std::array<std::size_t, 3> coords(std::size_t index) const {
    const std::size_t i = index % resolution[0];
    const std::size_t rest = index / resolution[0];
    return {i, rest % resolution[1], rest / resolution[1]};
  }

  Vec3 spacing() const;
  double cell_diagonal() const { return length(spacing()); }
  Vec3 vertex_position(std::size_t i, std::size_t j, std::size_t k) const;
  Vec3 vertex_position(std::size_t index) const {
    const auto c = coords(index);
    return vertex_position(c[0], c[1], c[2]);
  }
  bool contains(const Vec3& p) const;
  bool same_bounds(const GridSpec& other) const { return min == other.min && max == other.max; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Dense scalar samples over a GridSpec, stored in vertex index order.
struct ScalarGrid {
  GridSpec spec;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[spec.index(i, j, k)]; }
};

}  // namespace semsurf
