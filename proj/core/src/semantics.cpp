// SPDX-License-Identifier: Apache-2.0
#include "semsurf/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semsurf/error.hpp"
#include "semsurf/parallel.hpp"

namespace semsurf {

SemanticSet::SemanticSet(std::string name, std::vector<std::uint32_t> members)
    : name_(std::move(name)), members_(std::move(members)) {
  if (members_.empty()) throw InvalidInput("semantic set '" + name_ + "' must not be empty");
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
    throw InvalidInput("semantic set '" + name_ + "' has duplicate members");
}

SemanticSet::SemanticSet(std::string name, std::vector<std::uint32_t> members, const LabelRegistry& registry)
    : SemanticSet(std::move(name), std::move(members)) {
  if (members_.back() >= registry.size())
    throw InvalidInput("semantic set '" + name_ + "' references a label outside the registry");
}

SemanticSet SemanticSet::single(std::uint32_t label, const LabelRegistry& registry) {
  if (label >= registry.size()) throw InvalidInput("label id out of range");
  return SemanticSet(registry.name(label), {label}, registry);
}

SemanticSet SemanticSet::full(const LabelRegistry& registry, std::string name) {
  std::vector<std::uint32_t> all(registry.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  return SemanticSet(std::move(name), std::move(all), registry);
}

SemanticSet SemanticSet::from_names(std::string name, const std::vector<std::string>& labels,
                                    const LabelRegistry& registry) {
  std::vector<std::uint32_t> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) ids.push_back(registry.id(l));
  return SemanticSet(std::move(name), std::move(ids), registry);
}

bool SemanticSet::contains(std::uint32_t label) const {
  return std::binary_search(members_.begin(), members_.end(), label);
}

namespace {

// Checks p against the simplex and returns the renormalized copy.
ProbVector checked_simplex(std::span<const double> p) {
  if (p.empty() || p.size() > kMaxLabels) throw InvalidInput("probability vector has an invalid length");
  ProbVector q;
  q.count = static_cast<std::uint32_t>(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < -kSimplexTolerance)
      throw InvalidInput("probability vector has a negative or non-finite entry");
    q[i] = std::max(p[i], 0.0);
    total += q[i];
  }
  if (!(std::abs(total - 1.0) <= kSimplexTolerance))
    throw InvalidInput("probability vector does not sum to 1 within tolerance");
  if (total != 1.0) {
    for (std::size_t i = 0; i < p.size(); ++i) q[i] /= total;
  }
  return q;
}

void check_finite(double f) {
  if (std::isnan(f)) throw InvalidInput("sdf value is NaN");
}

}  // namespace

double equivalent_sdf(double f, std::span<const double> p, std::uint32_t s) {
  check_finite(f);
  const ProbVector q = checked_simplex(p);
  if (s >= q.count) throw InvalidInput("semantic label out of range");
  double others = 0.0;  // max over r != s; probabilities are >= 0
  for (std::uint32_t r = 0; r < q.count; ++r) {
    if (r != s) others = std::max(others, q[r]);
  }
  return std::max(f, others - q[s]);
}

double equivalent_sdf_set(double f, std::span<const double> p, const SemanticSet& set) {
  check_finite(f);
  const ProbVector q = checked_simplex(p);
  if (set.members().back() >= q.count) throw InvalidInput("semantic set references a label out of range");
  double inside = 0.0;
  double outside = 0.0;  // empty excluded set contributes 0
  for (std::uint32_t r = 0; r < q.count; ++r) {
    if (set.contains(r)) {
      inside = std::max(inside, q[r]);
    } else {
      outside = std::max(outside, q[r]);
    }
  }
  return std::max(f, outside - inside);
}

double equivalent_sdf(double f, std::span<const double> p, const Selector& selector) {
  if (const auto* label = std::get_if<std::uint32_t>(&selector)) return equivalent_sdf(f, p, *label);
  return equivalent_sdf_set(f, p, std::get<SemanticSet>(selector));
}

double equivalent_sdf(const FieldSample& sample, const Selector& selector) {
  return equivalent_sdf(sample.sdf, sample.sem_probs.span(), selector);
}

ScalarGrid equivalent_sdf_grid(const SampleGrid& samples, const Selector& selector) {
  ScalarGrid out{samples.spec, std::vector<double>(samples.samples.size())};
  parallel_for(samples.samples.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) out.values[v] = equivalent_sdf(samples.samples[v], selector);
  });
  return out;
}

ScalarGrid equivalent_sdf_grid(const Field& field, const GridSpec& grid, const Selector& selector) {
  grid.validate();
  ScalarGrid out{grid, std::vector<double>(grid.vertex_count())};
  parallel_for(out.values.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v)
      out.values[v] = equivalent_sdf(field.sample(grid.vertex_position(v)), selector);
  });
  return out;
}

std::string describe(const Selector& selector, const LabelRegistry& registry) {
  if (const auto* label = std::get_if<std::uint32_t>(&selector)) return "label:" + registry.name(*label);
  const auto& set = std::get<SemanticSet>(selector);
  std::string out = "set:" + set.name() + "{";
  for (std::size_t i = 0; i < set.members().size(); ++i) {
    if (i) out += ",";
    out += registry.name(set.members()[i]);
  }
  return out + "}";
}

}  // namespace semsurf
