// SPDX-License-Identifier: Apache-2.0
#include "semsurf/point_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "semsurf/error.hpp"

namespace semsurf {

namespace {

constexpr std::uint32_t kLeafSize = 8;

double coord(const Vec3& p, int axis) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; }

}  // namespace

PointIndex::PointIndex(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max())
    throw InvalidInput("point index: too many points");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::uint32_t PointIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = min(lo, points_[order_[i]]);
    hi = max(hi, points_[order_[i]]);
  }
  nodes_.push_back({begin, end, 0, 0, true, lo, hi});
  const Vec3 extent = hi - lo;
  const int axis = extent.x >= extent.y && extent.x >= extent.z ? 0 : extent.y >= extent.z ? 1 : 2;
  if (end - begin <= kLeafSize || coord(extent, axis) == 0.0) return id;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = coord(points_[a], axis), cb = coord(points_[b], axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id].leaf = false;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

namespace {

double box_distance_squared(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  const Vec3 d = max(max(lo - q, q - hi), Vec3{});
  return length_squared(d);
}

}  // namespace

void PointIndex::search(std::uint32_t id, const Vec3& q, Hit& best) const {
  const Node& node = nodes_[id];
  if (node.leaf) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t p = order_[i];
      const double d = length_squared(points_[p] - q);
      if (d < best.distance_squared || (d == best.distance_squared && p < best.index)) best = {p, d};
    }
    return;
  }
  // Equal distances must still be visited so ties resolve to the lowest index.
  const Node& l = nodes_[node.left];
  const Node& r = nodes_[node.right];
  const double dl = box_distance_squared(q, l.lo, l.hi), dr = box_distance_squared(q, r.lo, r.hi);
  const bool left_first = dl <= dr;
  const std::uint32_t first = left_first ? node.left : node.right, second = left_first ? node.right : node.left;
  if ((left_first ? dl : dr) <= best.distance_squared) search(first, q, best);
  if ((left_first ? dr : dl) <= best.distance_squared) search(second, q, best);
}

PointIndex::Hit PointIndex::nearest(const Vec3& query) const {
  if (points_.empty()) throw InvalidInput("point index: nearest() on an empty point set");
  Hit best{std::numeric_limits<std::uint32_t>::max(), std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

}  // namespace semsurf
