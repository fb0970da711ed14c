// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "semsurf/error.hpp"
#include "semsurf/marching_cubes.hpp"
#include "semsurf/parallel.hpp"
#include "semsurf/proposal.hpp"
#include "semsurf/scene_io.hpp"
#include "test_util.hpp"

namespace semsurf {
namespace {

using testing::cube_grid;
using testing::fill_grid;

TEST(ActiveMask, RankAndCount) {
  ActiveMask m({5, 5, 5});
  for (std::size_t v : {0u, 3u, 64u, 65u, 124u}) m.set(v);
  EXPECT_EQ(m.count(), 5u);
  EXPECT_EQ(m.rank(0), 0u);
  EXPECT_EQ(m.rank(4), 2u);
  EXPECT_EQ(m.rank(65), 3u);
  EXPECT_EQ(m.rank(124), 4u);
  EXPECT_TRUE(m.test(64));
  EXPECT_FALSE(m.test(63));
}

TEST(Occupancy, AllPositiveIsEmpty) {
  const auto g = fill_grid(cube_grid(6), [](const Vec3&) { return 0.5; });
  EXPECT_EQ(occupancy_mask(g, 3).count(), 0u);
}

TEST(Occupancy, SingleSeedDilatesToKernel) {
  auto g = fill_grid(cube_grid(5), [](const Vec3&) { return 1.0; });
  g.values[g.spec.index(2, 2, 2)] = -1.0;
  const auto m = occupancy_mask(g, 3);
  EXPECT_EQ(m.count(), 27u);
  for (std::size_t k = 1; k <= 3; ++k)
    for (std::size_t j = 1; j <= 3; ++j)
      for (std::size_t i = 1; i <= 3; ++i) EXPECT_TRUE(m.test(g.spec.index(i, j, k)));
  EXPECT_EQ(occupancy_mask(g, 5).count(), 125u);
}

TEST(Occupancy, ClampedAtBoundary) {
  auto g = fill_grid(cube_grid(5), [](const Vec3&) { return 1.0; });
  g.values[0] = -1.0;
  EXPECT_EQ(occupancy_mask(g, 3).count(), 8u);
}

TEST(Occupancy, UnitKernelIsSignIndicator) {
  const auto g = fill_grid(cube_grid(9), [](const Vec3& p) { return length(p) - 0.6; });
  const auto m = occupancy_mask(g, 1);
  for (std::size_t v = 0; v < g.values.size(); ++v) EXPECT_EQ(m.test(v), g.values[v] < 0.0);
}

TEST(Occupancy, RejectsBadKernels) {
  const auto g = fill_grid(cube_grid(3), [](const Vec3&) { return 1.0; });
  EXPECT_THROW(occupancy_mask(g, 2), InvalidInput);
  EXPECT_THROW(occupancy_mask(g, 0), InvalidInput);
  EXPECT_THROW(occupancy_mask(g, -3), InvalidInput);
}

TEST(Occupancy, MatchesBruteForceDilation) {
  const auto g = fill_grid(GridSpec{{7, 6, 9}, {-1, -1, -1}, {1, 1, 1}},
                           [](const Vec3& p) { return std::sin(5 * p.x) * std::cos(4 * p.y) + p.z * 0.7; });
  for (int k : {1, 3, 5}) {
    const auto m = occupancy_mask(g, k);
    const auto& r = g.spec.resolution;
    const long h = k / 2;
    for (std::size_t v = 0; v < g.values.size(); ++v) {
      const auto c = g.spec.coords(v);
      bool any = false;
      for (long dz = -h; dz <= h; ++dz)
        for (long dy = -h; dy <= h; ++dy)
          for (long dx = -h; dx <= h; ++dx) {
            const long x = long(c[0]) + dx, y = long(c[1]) + dy, z = long(c[2]) + dz;
            if (x < 0 || y < 0 || z < 0 || x >= long(r[0]) || y >= long(r[1]) || z >= long(r[2])) continue;
            any = any || g.at(x, y, z) < 0.0;
          }
      ASSERT_EQ(m.test(v), any) << "vertex " << v << " k " << k;
    }
  }
}

TEST(Upsample, AllActiveStaysAllActive) {
  ActiveMask m({3, 3, 3});
  for (std::size_t v = 0; v < 27; ++v) m.set(v);
  const auto fine = upsample_mask(m, cube_grid(3), cube_grid(9));
  EXPECT_EQ(fine.count(), 729u);
}

TEST(Upsample, SingleCornerMapsToNearestBlock) {
  ActiveMask m({2, 2, 2});
  m.set(0);
  const auto fine = upsample_mask(m, cube_grid(2), cube_grid(4));
  EXPECT_EQ(fine.count(), 8u);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < 2; ++i) EXPECT_TRUE(fine.test(cube_grid(4).index(i, j, k)));
}

TEST(Upsample, TiesGoToLowerIndex) {
  // Fine vertex 1 of 3 sits exactly between coarse vertices 0 and 1.
  ActiveMask low({2, 2, 2}), high({2, 2, 2});
  low.set(0);
  high.set(1);
  const GridSpec fine{{3, 2, 2}, {-1, -1, -1}, {1, 1, 1}};
  EXPECT_TRUE(upsample_mask(low, cube_grid(2), fine).test(1));
  EXPECT_FALSE(upsample_mask(high, cube_grid(2), fine).test(1));
}

TEST(Upsample, IdentityAndBoundsCheck) {
  const auto g = fill_grid(cube_grid(7), [](const Vec3& p) { return length(p) - 0.5; });
  const auto m = occupancy_mask(g, 3);
  EXPECT_EQ(upsample_mask(m, g.spec, g.spec), m);
  EXPECT_THROW(upsample_mask(m, g.spec, cube_grid(13, 2.0)), InvalidInput);
}

TEST(Sparse, EmptyMaskMeansNoWork) {
  const auto scene = testing::sphere_scene(0.3);
  const GridSpec fine = cube_grid(16, 0.5);
  const auto sparse = sparse_evaluate(scene, Selector{0u}, fine, ActiveMask(fine.resolution));
  EXPECT_TRUE(sparse.indices.empty());
  EXPECT_TRUE(marching_cubes(sparse).empty());
  EXPECT_THROW(sparse_evaluate(scene, Selector{0u}, fine, ActiveMask(fine.resolution), 0.0), InvalidInput);
}

TEST(Sparse, ValuesMatchDenseAtActiveVertices) {
  const auto scene = demo_scene("two-spheres");
  const GridSpec fine = cube_grid(33, 0.5);
  const GridSpec coarse = default_coarse_grid(fine);
  const auto result = propose_and_evaluate(scene, Selector{1u}, coarse, fine);
  const auto dense = equivalent_sdf_grid(scene, fine, Selector{1u});
  const auto& sp = result.grid;
  for (std::size_t n = 1; n < sp.indices.size(); ++n) ASSERT_LT(sp.indices[n - 1], sp.indices[n]);
  for (std::size_t v = 0; v < dense.values.size(); ++v) {
    if (sp.active.test(v))
      ASSERT_EQ(sp.value(v), dense.values[v]);
    else
      ASSERT_EQ(sp.value(v), 1.0);
  }
  EXPECT_EQ(result.stats.fine_evaluations, sp.active.count());
  EXPECT_EQ(result.stats.coarse_evaluations, coarse.vertex_count());
  EXPECT_EQ(result.stats.dense_evaluations, fine.vertex_count());
}

// The dilated mask keeps the whole interior active, so the reduction is capped
// by the solid's volume fraction: r = 0.3 fills 11% of [-0.5, 0.5]^3, which
// bounds that layout below 9x. The [-1, 1]^3 cube leaves room for the 10x bound.
TEST(Sparse, SphereReductionAboveTenfold) {
  const auto scene = testing::sphere_scene(0.3);
  const GridSpec fine = cube_grid(128, 1.0), coarse = cube_grid(32, 1.0);
  const auto result = propose_and_evaluate(scene, Selector{0u}, coarse, fine);
  const std::size_t dense = 128 * 128 * 128;
  EXPECT_EQ(result.stats.dense_evaluations, dense);
  EXPECT_GT(static_cast<double>(dense) / static_cast<double>(result.stats.total_evaluations()), 10.0);
  EXPECT_DOUBLE_EQ(result.stats.reduction_ratio(),
                   static_cast<double>(dense) / static_cast<double>(result.stats.total_evaluations()));
}

TEST(Sparse, InteriorBoundsReductionInHalfUnitCube) {
  const auto scene = testing::sphere_scene(0.3);
  const GridSpec fine = cube_grid(128, 0.5), coarse = cube_grid(32, 0.5);
  const auto result = propose_and_evaluate(scene, Selector{0u}, coarse, fine);
  std::size_t interior = 0;
  for (std::size_t v = 0; v < fine.vertex_count(); ++v) interior += length(fine.vertex_position(v)) < 0.3;
  EXPECT_GE(result.stats.fine_evaluations, interior);
  EXPECT_GT(result.stats.reduction_ratio(), 5.0);
}

TEST(Sparse, CoverageOfSignChangeEdges) {
  for (const auto& name : demo_scene_names()) {
    const auto scene = demo_scene(name);
    GridSpec fine = *scene.default_grid();
    fine.resolution = {64, 64, 96};
    for (std::uint32_t label = 0; label < scene.label_count(); ++label) {
      const Selector sel = label;
      const auto dense = equivalent_sdf_grid(scene, fine, sel);
      const auto sparse = propose_and_evaluate(scene, sel, default_coarse_grid(fine), fine).grid;
      const auto& r = fine.resolution;
      for (std::size_t v = 0; v < dense.values.size(); ++v) {
        const auto c = fine.coords(v);
        std::size_t stride = 1;
        for (int a = 0; a < 3; ++a) {
          if (c[a] + 1 < r[a]) {
            const std::size_t u = v + stride;
            if ((dense.values[v] < 0.0) != (dense.values[u] < 0.0)) {
              ASSERT_TRUE(sparse.active.test(v) && sparse.active.test(u)) << name << " label " << label;
            }
          }
          stride *= r[a];
        }
      }
    }
  }
}

TEST(Sparse, DeterministicAcrossThreadCounts) {
  const auto scene = demo_scene("nested-character");
  GridSpec fine = *scene.default_grid();
  fine.resolution = {48, 48, 72};
  const auto coarse = default_coarse_grid(fine);
  SparseScalarGrid one, many;
  {
    ScopedThreadCount t(1);
    one = propose_and_evaluate(scene, Selector{1u}, coarse, fine).grid;
  }
  {
    ScopedThreadCount t(4);
    many = propose_and_evaluate(scene, Selector{1u}, coarse, fine).grid;
  }
  EXPECT_EQ(one.indices, many.indices);
  EXPECT_EQ(one.values, many.values);
}

TEST(Sparse, DefaultCoarseIsQuarter) {
  GridSpec fine{{256, 256, 384}, {-0.5, -0.5, -0.75}, {0.5, 0.5, 0.75}};
  EXPECT_EQ(default_coarse_grid(fine).resolution, (std::array<std::size_t, 3>{64, 64, 96}));
  EXPECT_EQ(default_coarse_grid(cube_grid(5)).resolution, (std::array<std::size_t, 3>{2, 2, 2}));
}

}  // namespace
}  // namespace semsurf
