// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "semsurf/vec.hpp"

namespace semsurf {

/// Exact nearest-neighbor queries over a fixed point set (k-d tree with
/// median splits and per-node bounds). Ties resolve to the lowest point index, so results are
/// deterministic. Queries are const and thread-safe.
class PointIndex {
 public:
  explicit PointIndex(std::span<const Vec3> points);

  struct Hit {
    std::uint32_t index = 0;
    double distance_squared = 0.0;
  };

  /// Requires a non-empty point set.
  Hit nearest(const Vec3& query) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range in order_ for leaves
    std::uint32_t left = 0, right = 0;
    bool leaf = true;
    Vec3 lo, hi;                       // bounds of the node's points
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Vec3& q, Hit& best) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace semsurf
