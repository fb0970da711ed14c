// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "semsurf/field.hpp"
#include "semsurf/grid.hpp"

namespace semsurf {

/// Simplex tolerance for probability inputs; inputs within it are renormalized.
inline constexpr double kSimplexTolerance = 1e-6;

/// Non-empty, duplicate-free set of label ids, kept sorted.
class SemanticSet {
 public:
  /// Throws InvalidInput when members is empty or has duplicates.
  SemanticSet(std::string name, std::vector<std::uint32_t> members);
  /// Additionally checks every member against the registry.
  SemanticSet(std::string name, std::vector<std::uint32_t> members, const LabelRegistry& registry);

  static SemanticSet single(std::uint32_t label, const LabelRegistry& registry);
  static SemanticSet full(const LabelRegistry& registry, std::string name = "holistic");
  /// Resolves label names; throws InvalidInput for unknown names.
  static SemanticSet from_names(std::string name, const std::vector<std::string>& labels,
                                const LabelRegistry& registry);

  const std::string& name() const { return name_; }
  const std::vector<std::uint32_t>& members() const { return members_; }
  bool contains(std::uint32_t label) const;

 private:
  std::string name_;
  std::vector<std::uint32_t> members_;
};

/// Either a single label or a label set.
using Selector = std::variant<std::uint32_t, SemanticSet>;

/// max(f, max_{r != s} p_r - p_s). Throws InvalidInput when p is off the simplex
/// by more than kSimplexTolerance or s is out of range.
double equivalent_sdf(double f, std::span<const double> p, std::uint32_t s);

/// max(f, max_{s not in P} p_s - max_{s in P} p_s), with the maximum over an
/// empty excluded set taken as 0.
double equivalent_sdf_set(double f, std::span<const double> p, const SemanticSet& set);

double equivalent_sdf(double f, std::span<const double> p, const Selector& selector);
double equivalent_sdf(const FieldSample& sample, const Selector& selector);

/// Element-wise transform of a sample grid; same lattice and ordering.
ScalarGrid equivalent_sdf_grid(const SampleGrid& samples, const Selector& selector);

/// Samples the field on the grid and applies the selector transform without
/// materializing the full samples. Identical values to the two-step path.
ScalarGrid equivalent_sdf_grid(const Field& field, const GridSpec& grid, const Selector& selector);

/// Human-readable selector description ("label:body" or "set:cloth{1}").
std::string describe(const Selector& selector, const LabelRegistry& registry);

}  // namespace semsurf
