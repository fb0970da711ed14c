// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semsurf/mesh.hpp"

namespace semsurf {

/// Area-weighted surface samples drawn from a counter-based stream: sample i
/// depends only on (seed, i). Throws UndefinedMetric for meshes without area.
std::vector<Vec3> sample_surface(const Mesh& mesh, std::size_t count, std::uint64_t seed);

enum class ChamferConvention { kSquared, kUnsquared };

/// Average of the two directed mean nearest-neighbor distances (squared by
/// default). Throws UndefinedMetric for an empty cloud.
double chamfer_points(std::span<const Vec3> a, std::span<const Vec3> b,
                      ChamferConvention convention = ChamferConvention::kSquared);

double chamfer(const Mesh& a, const Mesh& b, std::size_t samples, std::uint64_t seed,
               ChamferConvention convention = ChamferConvention::kSquared);

inline constexpr double kDefaultIouGranularity = 1.0 / 32.0;

/// Volumetric IoU of voxelized occupancies. Voxel size is granularity times the
/// largest extent of the union bounding box; a voxel is occupied when its
/// center is inside by parity ray casting. Throws InvalidInput naming the first
/// component that is not closed.
double voxel_iou(const Mesh& a, const Mesh& b, double granularity = kDefaultIouGranularity);

inline constexpr double kDefaultFscoreTau = 0.005;

/// F1 of precision/recall at tau = tau_fraction * union-bbox diagonal.
double fscore_points(std::span<const Vec3> a, std::span<const Vec3> b, double tau);
double fscore(const Mesh& a, const Mesh& b, std::size_t samples, std::uint64_t seed,
              double tau_fraction = kDefaultFscoreTau);

struct HollowReport {
  std::size_t components = 0;
  std::size_t closed_components = 0;
  /// Ordered pairs (i, j) where component i lies inside closed component j.
  std::size_t nested_pairs = 0;
};

/// Components by shared vertices; closedness by edge manifoldness; nesting by a
/// parity test of one vertex of each component against every other closed one.
HollowReport hollow_check(const Mesh& mesh);

struct MetricsConfig {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  double iou_granularity = kDefaultIouGranularity;
  double tau_fraction = kDefaultFscoreTau;
  ChamferConvention convention = ChamferConvention::kSquared;
};

struct LayerMetrics {
  std::string layer;  // "whole" for the holistic layer
  double chamfer = 0.0;
  double voxel_iou = 0.0;
  double fscore = 0.0;
  bool empty = false;  // both meshes empty: agreement by convention
};

struct LayerReport {
  std::vector<LayerMetrics> rows;
  MetricsConfig config;

  nlohmann::json to_json() const;
};

/// Metrics for every reference layer; the holistic layer is reported as
/// "whole" and listed last. Throws InvalidInput naming a missing layer, and
/// UndefinedMetric when exactly one side of a layer is empty.
LayerReport evaluate_layers(const LayeredCharacter& pred, const LayeredCharacter& ref,
                            const MetricsConfig& config = {});

}  // namespace semsurf
