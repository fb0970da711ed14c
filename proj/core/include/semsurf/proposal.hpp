// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "semsurf/field.hpp"
#include "semsurf/grid.hpp"
#include "semsurf/semantics.hpp"

namespace semsurf {

/// Bit per grid vertex, in vertex index order.
class ActiveMask {
 public:
  ActiveMask() = default;
  explicit ActiveMask(std::array<std::size_t, 3> resolution);

  const std::array<std::size_t, 3>& resolution() const { return resolution_; }
  std::size_t size() const { return size_; }
  std::size_t count() const { return count_; }

  bool test(std::size_t index) const { return (words_[index >> 6] >> (index & 63)) & 1u; }
  void set(std::size_t index);
  /// Number of set bits strictly before index.
  std::size_t rank(std::size_t index) const;

  const std::vector<std::uint64_t>& words() const { return words_; }
  /// Rebuilds count and rank tables after bulk edits through assign_words().
  void assign_words(std::vector<std::uint64_t> words);

  friend bool operator==(const ActiveMask& a, const ActiveMask& b) {
    return a.resolution_ == b.resolution_ && a.words_ == b.words_;
  }

 private:
  void rebuild();

  std::array<std::size_t, 3> resolution_{0, 0, 0};
  std::size_t size_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint32_t> word_rank_;
};

inline constexpr int kDefaultKernel = 3;
inline constexpr double kDefaultSentinel = 1.0;

/// Dilated negative-occupancy mask: bit v is set iff some vertex in the clamped
/// k x k x k neighborhood of v has a negative value. Throws InvalidInput unless
/// k is odd and positive.
ActiveMask occupancy_mask(const ScalarGrid& coarse_sdf, int kernel = kDefaultKernel);

/// Nearest-neighbor upsampling: a fine vertex copies the bit of the nearest
/// coarse vertex in normalized lattice coordinates, ties toward the lower index.
/// Throws InvalidInput if the bounds differ or the mask does not match coarse.
ActiveMask upsample_mask(const ActiveMask& mask, const GridSpec& coarse, const GridSpec& fine);

/// Scalar grid holding values only at active vertices; every other vertex reads
/// as the sentinel.
struct SparseScalarGrid {
  GridSpec spec;
  ActiveMask active;
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> values;          // parallel to indices
  double sentinel = kDefaultSentinel;

  double value(std::size_t index) const {
    return active.test(index) ? values[active.rank(index)] : sentinel;
  }
  /// Materializes the sentinel-filled dense grid.
  ScalarGrid to_dense() const;
};

/// Evaluates the equivalent SDF only at active vertices. Throws InvalidInput
/// for a non-positive sentinel or a mask that does not match the grid.
SparseScalarGrid sparse_evaluate(const Field& field, const Selector& selector, const GridSpec& fine,
                                 const ActiveMask& active, double sentinel = kDefaultSentinel);

/// Coarse resolution used when none is given: fine / 4 per axis, at least 2.
GridSpec default_coarse_grid(const GridSpec& fine);

struct ProposalStats {
  std::size_t coarse_evaluations = 0;
  std::size_t fine_evaluations = 0;
  std::size_t dense_evaluations = 0;  // what a dense pass would cost
  std::size_t active_vertices = 0;

  std::size_t total_evaluations() const { return coarse_evaluations + fine_evaluations; }
  double reduction_ratio() const;
};

struct ProposalResult {
  SparseScalarGrid grid;
  ProposalStats stats;
};

/// Full coarse-to-fine pass: coarse equivalent SDF, dilated mask, upsampled
/// active domain, sparse fine evaluation.
ProposalResult propose_and_evaluate(const Field& field, const Selector& selector, const GridSpec& coarse,
                                    const GridSpec& fine, int kernel = kDefaultKernel,
                                    double sentinel = kDefaultSentinel);

}  // namespace semsurf
