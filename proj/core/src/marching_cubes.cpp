// SPDX-License-Identifier: Apache-2.0
#include "semsurf/marching_cubes.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "semsurf/error.hpp"
#include "semsurf/parallel.hpp"

namespace semsurf {
namespace {

#include "mc_tables.inc"

struct EdgeInfo {
  int corner0;  // lower-index endpoint
  int corner1;
  int axis;
};

// Corner offsets (i, j, k) in the classic layout.
constexpr std::array<std::array<int, 3>, 8> kCornerOffset = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

constexpr std::array<EdgeInfo, 12> kEdges = {{
    {0, 1, 0}, {1, 2, 1}, {3, 2, 0}, {0, 3, 1}, {4, 5, 0}, {5, 6, 1},
    {7, 6, 0}, {4, 7, 1}, {0, 4, 2}, {1, 5, 2}, {2, 6, 2}, {3, 7, 2},
}};

struct Slab {
  std::vector<std::uint64_t> keys;  // local vertex -> global key
  std::vector<Vec3> positions;      // local vertex -> position
  std::vector<Triangle> triangles;  // local indices
};

template <class ValueAt, class CellActive>
Mesh extract(const GridSpec& spec, const ValueAt& value_at, const CellActive& cell_may_cross,
             const McOptions& options) {
  spec.validate();
  const auto& res = spec.resolution;
  const std::size_t n = spec.vertex_count();
  if (!options.deformation.empty()) {
    if (options.deformation.size() != n) throw InvalidInput("deformation needs one displacement per grid vertex");
    const Vec3 h = spec.spacing();
    const double limit = 0.5 * std::min(h.x, std::min(h.y, h.z));
    for (const auto& d : options.deformation) {
      if (!is_finite(d) || length(d) > limit * (1.0 + 1e-12))
        throw InvalidInput("vertex deformation exceeds half a grid cell");
    }
  }

  auto position = [&](std::size_t v) {
    Vec3 p = spec.vertex_position(v);
    if (!options.deformation.empty()) p += options.deformation[v];
    return p;
  };
  const std::size_t vertex_key_base = 3 * n;
  const std::size_t stride[3] = {1, res[0], res[0] * res[1]};

  const std::size_t layers = res[2] - 1;
  const std::size_t slabs = std::min<std::size_t>(layers, static_cast<std::size_t>(thread_count()) * 4);
  std::vector<Slab> out(slabs);

  parallel_for(
      slabs,
      [&](std::size_t slab_begin, std::size_t slab_end) {
        for (std::size_t s = slab_begin; s < slab_end; ++s) {
          Slab& slab = out[s];
          std::unordered_map<std::uint64_t, std::uint32_t> local;
          const std::size_t k_begin = layers * s / slabs;
          const std::size_t k_end = layers * (s + 1) / slabs;
          for (std::size_t k = k_begin; k < k_end; ++k) {
            for (std::size_t j = 0; j + 1 < res[1]; ++j) {
              for (std::size_t i = 0; i + 1 < res[0]; ++i) {
                const std::size_t base = spec.index(i, j, k);
                if (!cell_may_cross(base)) continue;
                std::array<std::size_t, 8> corner;
                std::array<double, 8> value;
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                  const auto& o = kCornerOffset[c];
                  corner[c] = base + o[0] * stride[0] + o[1] * stride[1] + o[2] * stride[2];
                  value[c] = value_at(corner[c]);
                  if (value[c] < options.iso) cube |= 1 << c;
                }
                if (cube == 0 || cube == 255) continue;

                std::array<std::uint32_t, 12> edge_vertex;
                std::uint32_t seen = 0;
                auto vertex_on = [&](int e) {
                  if (seen & (1u << e)) return edge_vertex[e];
                  const EdgeInfo& info = kEdges[e];
                  const std::size_t v0 = corner[info.corner0];
                  const std::size_t v1 = corner[info.corner1];
                  const double f0 = value[info.corner0];
                  const double f1 = value[info.corner1];
                  const double t = (options.iso - f0) / (f1 - f0);
                  std::uint64_t key;
                  Vec3 p;
                  if (t <= 0.0) {
                    key = vertex_key_base + v0;
                    p = position(v0);
                  } else if (t >= 1.0) {
                    key = vertex_key_base + v1;
                    p = position(v1);
                  } else {
                    key = 3 * v0 + static_cast<std::uint64_t>(info.axis);
                    const Vec3 p0 = position(v0);
                    p = p0 + (position(v1) - p0) * t;
                  }
                  auto [it, inserted] = local.try_emplace(key, static_cast<std::uint32_t>(slab.keys.size()));
                  if (inserted) {
                    slab.keys.push_back(key);
                    slab.positions.push_back(p);
                  }
                  edge_vertex[e] = it->second;
                  seen |= 1u << e;
                  return it->second;
                };
                for (int t = 0; kTriTable[cube][t] != -1; t += 3) {
                  // the classic table winds clockwise seen from outside; reverse it
                  const auto a = vertex_on(kTriTable[cube][t]);
                  const auto b = vertex_on(kTriTable[cube][t + 2]);
                  const auto c = vertex_on(kTriTable[cube][t + 1]);
                  slab.triangles.push_back({a, b, c});
                }
              }
            }
          }
        }
      },
      1);

  // Deterministic stitch: number vertices by first use in slab order.
  Mesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> global;
  for (const Slab& slab : out) {
    std::vector<std::uint32_t> remap(slab.keys.size(), UINT32_MAX);
    for (const Triangle& t : slab.triangles) {
      Triangle g;
      for (int c = 0; c < 3; ++c) {
        std::uint32_t& r = remap[t[c]];
        if (r == UINT32_MAX) {
          auto [it, inserted] = global.try_emplace(slab.keys[t[c]], static_cast<std::uint32_t>(mesh.positions.size()));
          if (inserted) mesh.positions.push_back(slab.positions[t[c]]);
          r = it->second;
        }
        g[c] = r;
      }
      if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) continue;
      const Vec3 area = face_area_vector(mesh, g);
      if (area.x == 0.0 && area.y == 0.0 && area.z == 0.0) continue;
      mesh.triangles.push_back(g);
    }
  }
  return mesh;
}

}  // namespace

Mesh marching_cubes(const ScalarGrid& grid, const McOptions& options) {
  if (grid.values.size() != grid.spec.vertex_count())
    throw InvalidInput("scalar grid value count does not match its spec");
  return extract(
      grid.spec, [&](std::size_t v) { return grid.values[v]; }, [](std::size_t) { return true; }, options);
}

Mesh marching_cubes(const SparseScalarGrid& grid, const McOptions& options) {
  if (!(options.iso < grid.sentinel)) throw InvalidInput("iso level must lie below the sparse grid sentinel");
  if (grid.active.resolution() != grid.spec.resolution)
    throw InvalidInput("sparse grid mask does not match its spec");
  const auto& res = grid.spec.resolution;
  const std::size_t sy = res[0], sz = res[0] * res[1];
  // A cell whose corners are all inactive reads the sentinel everywhere and cannot cross.
  auto cell_may_cross = [&](std::size_t base) {
    const auto& m = grid.active;
    return m.test(base) || m.test(base + 1) || m.test(base + sy) || m.test(base + sy + 1) || m.test(base + sz) ||
           m.test(base + sz + 1) || m.test(base + sz + sy) || m.test(base + sz + sy + 1);
  };
  return extract(
      grid.spec, [&](std::size_t v) { return grid.value(v); }, cell_may_cross, options);
}

}  // namespace semsurf
