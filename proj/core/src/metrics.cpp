// SPDX-License-Identifier: Apache-2.0
#include "semsurf/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "semsurf/error.hpp"
#include "semsurf/extract.hpp"
#include "semsurf/parallel.hpp"
#include "semsurf/point_index.hpp"

namespace semsurf {
namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) that depends only on (seed, counter).
double uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) + counter * 0x9e3779b97f4a7c15ULL);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<double> nearest_distances_squared(std::span<const Vec3> from, std::span<const Vec3> to) {
  const PointIndex index(to);
  std::vector<double> d2(from.size());
  parallel_for(from.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) d2[i] = index.nearest(from[i]).distance_squared;
  }, 512);
  return d2;
}

Aabb union_box(const Mesh& a, const Mesh& b) { return merge(bounding_box(a), bounding_box(b)); }

void require_closed(const Mesh& mesh, const char* which) {
  std::size_t count = 0;
  const auto comps = triangle_components(mesh, &count);
  for (std::uint32_t c = 0; c < count; ++c) {
    if (!is_closed(extract_component(mesh, comps, c)))
      throw InvalidInput(std::string("voxel IoU: mesh ") + which + " component " + std::to_string(c) +
                         " is not closed");
  }
}

// Occupancy bits for voxel centers; one parity ray per (y, z) row.
std::vector<bool> voxelize(const Mesh& mesh, const Vec3& origin, double cell, const std::array<std::size_t, 3>& n) {
  std::vector<bool> occ(n[0] * n[1] * n[2], false);
  std::vector<std::vector<bool>> rows(n[1] * n[2]);
  parallel_for(rows.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const std::size_t j = r % n[1], k = r / n[1];
      const double y = origin.y + (static_cast<double>(j) + 0.5) * cell;
      const double z = origin.z + (static_cast<double>(k) + 0.5) * cell;
      const auto xs = ray_crossings_x(mesh, y, z);
      auto& row = rows[r];
      row.assign(n[0], false);
      for (std::size_t i = 0; i < n[0]; ++i) {
        const double x = origin.x + (static_cast<double>(i) + 0.5) * cell;
        const auto above = xs.end() - std::upper_bound(xs.begin(), xs.end(), x);
        row[i] = above % 2 == 1;
      }
    }
  }, 1);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t i = 0; i < n[0]; ++i) occ[r * n[0] + i] = rows[r][i];
  return occ;
}

}  // namespace

std::vector<Vec3> sample_surface(const Mesh& mesh, std::size_t count, std::uint64_t seed) {
  mesh.validate();
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    total += triangle_area(mesh, mesh.triangles[t]);
    cumulative[t] = total;
  }
  if (!(total > 0.0)) throw UndefinedMetric("cannot sample a mesh without surface area");
  std::vector<Vec3> out(count);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint64_t c = 3 * static_cast<std::uint64_t>(i);
      const double pick = uniform(seed, c) * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
      if (it == cumulative.end()) --it;
      const Triangle& t = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
      const double r1 = std::sqrt(uniform(seed, c + 1)), r2 = uniform(seed, c + 2);
      const Vec3& a = mesh.positions[t[0]];
      const Vec3& b = mesh.positions[t[1]];
      const Vec3& d = mesh.positions[t[2]];
      out[i] = a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + d * (r1 * r2);
    }
  }, 1024);
  return out;
}

double chamfer_points(std::span<const Vec3> a, std::span<const Vec3> b, ChamferConvention convention) {
  if (a.empty() || b.empty()) throw UndefinedMetric("chamfer distance of an empty point set");
  auto directed = [&](std::span<const Vec3> from, std::span<const Vec3> to) {
    auto d = nearest_distances_squared(from, to);
    if (convention == ChamferConvention::kUnsquared)
      for (double& v : d) v = std::sqrt(v);
    return pairwise_sum(d) / static_cast<double>(d.size());
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

double chamfer(const Mesh& a, const Mesh& b, std::size_t samples, std::uint64_t seed, ChamferConvention convention) {
  if (a.empty() || b.empty()) throw UndefinedMetric("chamfer distance of an empty mesh");
  if (samples == 0) throw InvalidInput("chamfer: sample count must be positive");
  const auto pa = sample_surface(a, samples, seed);
  const auto pb = sample_surface(b, samples, seed);
  return chamfer_points(pa, pb, convention);
}

double voxel_iou(const Mesh& a, const Mesh& b, double granularity) {
  if (!(granularity > 0.0 && granularity <= 1.0)) throw InvalidInput("voxel IoU: granularity must be in (0, 1]");
  if (a.empty() || b.empty()) throw UndefinedMetric("voxel IoU of an empty mesh");
  require_closed(a, "a");
  require_closed(b, "b");
  const Aabb box = union_box(a, b);
  const double cell = granularity * box.max_extent();
  std::array<std::size_t, 3> n{};
  for (int ax = 0; ax < 3; ++ax)
    n[ax] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(box.extent()[ax] / cell)));
  const auto oa = voxelize(a, box.min, cell, n);
  const auto ob = voxelize(b, box.min, cell, n);
  std::size_t inter = 0, uni = 0;
  for (std::size_t v = 0; v < oa.size(); ++v) {
    inter += oa[v] && ob[v];
    uni += oa[v] || ob[v];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double fscore_points(std::span<const Vec3> a, std::span<const Vec3> b, double tau) {
  if (a.empty() || b.empty()) throw UndefinedMetric("F-score of an empty point set");
  if (!(tau >= 0.0)) throw InvalidInput("F-score: tau must be non-negative");
  const double t2 = tau * tau;
  auto fraction = [&](std::span<const Vec3> from, std::span<const Vec3> to) {
    const auto d = nearest_distances_squared(from, to);
    const auto hits = std::count_if(d.begin(), d.end(), [&](double v) { return v <= t2; });
    return static_cast<double>(hits) / static_cast<double>(d.size());
  };
  const double precision = fraction(a, b), recall = fraction(b, a);
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

double fscore(const Mesh& a, const Mesh& b, std::size_t samples, std::uint64_t seed, double tau_fraction) {
  if (a.empty() || b.empty()) throw UndefinedMetric("F-score of an empty mesh");
  if (samples == 0) throw InvalidInput("F-score: sample count must be positive");
  const double tau = tau_fraction * union_box(a, b).diagonal();
  return fscore_points(sample_surface(a, samples, seed), sample_surface(b, samples, seed), tau);
}

HollowReport hollow_check(const Mesh& mesh) {
  HollowReport report;
  const auto comps = triangle_components(mesh, &report.components);
  std::vector<Mesh> parts;
  std::vector<bool> closed;
  for (std::uint32_t c = 0; c < report.components; ++c) {
    parts.push_back(extract_component(mesh, comps, c));
    closed.push_back(is_closed(parts.back()));
    report.closed_components += closed.back();
  }
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = 0; j < parts.size(); ++j)
      if (i != j && closed[j] && contains_point(parts[j], parts[i].positions.front())) ++report.nested_pairs;
  return report;
}

nlohmann::json LayerReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"layer", r.layer},
                         {"chamfer", r.chamfer},
                         {"voxel_iou", r.voxel_iou},
                         {"fscore", r.fscore},
                         {"empty", r.empty}});
  }
  return {{"rows", rows_json},
          {"samples", config.samples},
          {"seed", config.seed},
          {"iou_granularity", config.iou_granularity},
          {"tau_fraction", config.tau_fraction},
          {"chamfer_convention", config.convention == ChamferConvention::kSquared ? "squared" : "unsquared"}};
}

LayerReport evaluate_layers(const LayeredCharacter& pred, const LayeredCharacter& ref, const MetricsConfig& config) {
  std::vector<std::string> names = ref.order;
  if (names.empty())
    for (const auto& [name, mesh] : ref.layers) names.push_back(name);
  // Holistic last, reported as "whole".
  std::stable_partition(names.begin(), names.end(), [](const std::string& n) { return n != kHolisticLayer; });

  LayerReport report;
  report.config = config;
  for (const auto& name : names) {
    const auto r = ref.layers.find(name);
    if (r == ref.layers.end()) throw InvalidInput("reference is missing layer '" + name + "'");
    const auto p = pred.layers.find(name);
    if (p == pred.layers.end()) throw InvalidInput("prediction is missing layer '" + name + "'");
    LayerMetrics row;
    row.layer = name == kHolisticLayer ? "whole" : name;
    const bool pe = p->second.empty(), re = r->second.empty();
    if (pe && re) {
      row.empty = true;
      row.voxel_iou = 1.0;
      row.fscore = 1.0;
    } else if (pe || re) {
      throw UndefinedMetric("layer '" + name + "' is empty in the " + (pe ? "prediction" : "reference") + " only");
    } else {
      row.chamfer = chamfer(p->second, r->second, config.samples, config.seed, config.convention);
      row.voxel_iou = voxel_iou(p->second, r->second, config.iou_granularity);
      row.fscore = fscore(p->second, r->second, config.samples, config.seed, config.tau_fraction);
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace semsurf
