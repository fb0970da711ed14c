// SPDX-License-Identifier: Apache-2.0
#include "semsurf/proposal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "semsurf/error.hpp"
#include "semsurf/parallel.hpp"

namespace semsurf {

ActiveMask::ActiveMask(std::array<std::size_t, 3> resolution)
    : resolution_(resolution), size_(resolution[0] * resolution[1] * resolution[2]) {
  words_.assign((size_ + 63) / 64, 0);
  rebuild();
}

void ActiveMask::set(std::size_t index) {
  const std::uint64_t bit = std::uint64_t{1} << (index & 63);
  if (!(words_[index >> 6] & bit)) {
    words_[index >> 6] |= bit;
    rebuild();
  }
}

std::size_t ActiveMask::rank(std::size_t index) const {
  const std::size_t w = index >> 6;
  const std::uint64_t below = (std::uint64_t{1} << (index & 63)) - 1;
  return word_rank_[w] + static_cast<std::size_t>(std::popcount(words_[w] & below));
}

void ActiveMask::assign_words(std::vector<std::uint64_t> words) {
  if (words.size() != (size_ + 63) / 64) throw InvalidInput("mask word count does not match its resolution");
  words_ = std::move(words);
  if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  rebuild();
}

void ActiveMask::rebuild() {
  word_rank_.resize(words_.size());
  std::size_t running = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    word_rank_[w] = static_cast<std::uint32_t>(running);
    running += static_cast<std::size_t>(std::popcount(words_[w]));
  }
  count_ = running;
}

namespace {

std::vector<std::uint64_t> pack_bits(const std::vector<std::uint8_t>& flags) {
  std::vector<std::uint64_t> words((flags.size() + 63) / 64, 0);
  parallel_for(words.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t w = begin; w < end; ++w) {
      std::uint64_t word = 0;
      const std::size_t base = w * 64;
      const std::size_t stop = std::min<std::size_t>(64, flags.size() - base);
      for (std::size_t b = 0; b < stop; ++b) word |= std::uint64_t{flags[base + b] != 0} << b;
      words[w] = word;
    }
  });
  return words;
}

// Max filter of the given radius along one axis, clamped at the boundary.
std::vector<std::uint8_t> dilate_axis(const std::vector<std::uint8_t>& in, const std::array<std::size_t, 3>& res,
                                      int axis, std::size_t radius) {
  std::vector<std::uint8_t> out(in.size(), 0);
  const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? res[0] : res[0] * res[1]);
  const std::size_t n = res[axis];
  const std::size_t lines = in.size() / n;
  parallel_for(lines, [&](std::size_t begin, std::size_t end) {
    for (std::size_t line = begin; line < end; ++line) {
      // base index of the line: decompose line id over the two other axes
      std::size_t base = 0;
      if (axis == 0) {
        base = line * res[0];
      } else if (axis == 1) {
        base = (line % res[0]) + (line / res[0]) * res[0] * res[1];
      } else {
        base = line;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= radius ? i - radius : 0;
        const std::size_t hi = std::min(n - 1, i + radius);
        std::uint8_t v = 0;
        for (std::size_t t = lo; t <= hi && !v; ++t) v = in[base + t * stride];
        out[base + i * stride] = v;
      }
    }
  });
  return out;
}

// Nearest coarse index for every fine index along one axis; exact ties go to
// the lower index.
std::vector<std::size_t> nearest_coarse(std::size_t coarse_n, std::size_t fine_n) {
  std::vector<std::size_t> map(fine_n);
  const std::size_t den = fine_n - 1;
  for (std::size_t i = 0; i < fine_n; ++i) {
    const std::size_t num = i * (coarse_n - 1);
    const std::size_t lo = num / den;
    const std::size_t rem = num % den;
    map[i] = 2 * rem > den ? lo + 1 : lo;
  }
  return map;
}

}  // namespace

ActiveMask occupancy_mask(const ScalarGrid& coarse_sdf, int kernel) {
  if (kernel < 1 || kernel % 2 == 0)
    throw InvalidInput("dilation kernel must be odd and positive, got " + std::to_string(kernel));
  coarse_sdf.spec.validate();
  if (coarse_sdf.values.size() != coarse_sdf.spec.vertex_count())
    throw InvalidInput("scalar grid value count does not match its spec");

  std::vector<std::uint8_t> flags(coarse_sdf.values.size());
  for (std::size_t v = 0; v < flags.size(); ++v) flags[v] = coarse_sdf.values[v] < 0.0;
  const auto radius = static_cast<std::size_t>(kernel / 2);
  if (radius > 0) {
    for (int axis = 0; axis < 3; ++axis) flags = dilate_axis(flags, coarse_sdf.spec.resolution, axis, radius);
  }
  ActiveMask mask(coarse_sdf.spec.resolution);
  mask.assign_words(pack_bits(flags));
  return mask;
}

ActiveMask upsample_mask(const ActiveMask& mask, const GridSpec& coarse, const GridSpec& fine) {
  coarse.validate();
  fine.validate();
  if (!coarse.same_bounds(fine)) throw InvalidInput("coarse and fine grids must share identical bounds");
  if (mask.resolution() != coarse.resolution) throw InvalidInput("mask resolution does not match the coarse grid");

  const auto mi = nearest_coarse(coarse.resolution[0], fine.resolution[0]);
  const auto mj = nearest_coarse(coarse.resolution[1], fine.resolution[1]);
  const auto mk = nearest_coarse(coarse.resolution[2], fine.resolution[2]);

  const std::size_t n = fine.vertex_count();
  std::vector<std::uint64_t> words((n + 63) / 64, 0);
  parallel_for(words.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t w = begin; w < end; ++w) {
      std::uint64_t word = 0;
      const std::size_t base = w * 64;
      const std::size_t stop = std::min<std::size_t>(64, n - base);
      for (std::size_t b = 0; b < stop; ++b) {
        const auto c = fine.coords(base + b);
        if (mask.test(coarse.index(mi[c[0]], mj[c[1]], mk[c[2]]))) word |= std::uint64_t{1} << b;
      }
      words[w] = word;
    }
  });
  ActiveMask out(fine.resolution);
  out.assign_words(std::move(words));
  return out;
}

ScalarGrid SparseScalarGrid::to_dense() const {
  ScalarGrid out{spec, std::vector<double>(spec.vertex_count(), sentinel)};
  for (std::size_t i = 0; i < indices.size(); ++i) out.values[indices[i]] = values[i];
  return out;
}

SparseScalarGrid sparse_evaluate(const Field& field, const Selector& selector, const GridSpec& fine,
                                 const ActiveMask& active, double sentinel) {
  fine.validate();
  if (!(sentinel > 0.0) || !std::isfinite(sentinel)) throw InvalidInput("sentinel must be positive and finite");
  if (active.resolution() != fine.resolution) throw InvalidInput("active mask does not match the fine grid");
  if (fine.vertex_count() > std::numeric_limits<std::uint32_t>::max())
    throw ResourceError("fine grid exceeds 2^32 vertices");

  SparseScalarGrid out;
  out.spec = fine;
  out.active = active;
  out.sentinel = sentinel;
  out.indices.reserve(active.count());
  const auto& words = active.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t word = words[w];
    while (word) {
      const int b = std::countr_zero(word);
      out.indices.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(b)));
      word &= word - 1;
    }
  }
  out.values.resize(out.indices.size());
  parallel_for(out.indices.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out.values[i] = equivalent_sdf(field.sample(fine.vertex_position(out.indices[i])), selector);
  });
  return out;
}

GridSpec default_coarse_grid(const GridSpec& fine) {
  GridSpec coarse = fine;
  for (int a = 0; a < 3; ++a) coarse.resolution[a] = std::max<std::size_t>(2, fine.resolution[a] / 4);
  return coarse;
}

double ProposalStats::reduction_ratio() const {
  const std::size_t total = total_evaluations();
  return total == 0 ? std::numeric_limits<double>::infinity()
                    : static_cast<double>(dense_evaluations) / static_cast<double>(total);
}

ProposalResult propose_and_evaluate(const Field& field, const Selector& selector, const GridSpec& coarse,
                                    const GridSpec& fine, int kernel, double sentinel) {
  if (kernel < 1 || kernel % 2 == 0)
    throw InvalidInput("dilation kernel must be odd and positive, got " + std::to_string(kernel));
  const ScalarGrid coarse_sdf = equivalent_sdf_grid(field, coarse, selector);
  const ActiveMask fine_mask = upsample_mask(occupancy_mask(coarse_sdf, kernel), coarse, fine);
  ProposalResult result{sparse_evaluate(field, selector, fine, fine_mask, sentinel), {}};
  result.stats.coarse_evaluations = coarse.vertex_count();
  result.stats.fine_evaluations = result.grid.indices.size();
  result.stats.dense_evaluations = fine.vertex_count();
  result.stats.active_vertices = result.grid.indices.size();
  return result;
}

}  // namespace semsurf
