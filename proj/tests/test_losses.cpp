// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "semsurf/error.hpp"
#include "semsurf/losses.hpp"
#include "test_util.hpp"

namespace semsurf {
namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ScalarGrid line_grid(std::vector<double> values) {
  GridSpec spec;
  spec.resolution = {1, 1, values.size()};
  spec.min = {0, 0, 0};
  spec.max = {0, 0, 1};
  return ScalarGrid{spec, std::move(values)};
}

ScalarGrid random_grid(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  GridSpec spec = testing::cube_grid(n);
  ScalarGrid g{spec, std::vector<double>(spec.vertex_count())};
  for (auto& v : g.values) v = u(rng);
  return g;
}

// Flat inner patch in the z = 0 plane, normals +z.
Mesh flat_patch(int n, double spacing) {
  Mesh m;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      m.positions.push_back({i * spacing, j * spacing, 0.0});
      m.normals.push_back({0, 0, 1});
    }
  const auto id = [&](int i, int j) { return static_cast<std::uint32_t>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

TEST(HoleLoss, SingleEdgeClosedForm) {
  const auto r = hole_loss(line_grid({1.0, -0.5}));
  const double expected = -std::log(1.0 - logistic(1.0));
  EXPECT_NEAR(expected, 1.31326, 1e-5);
  EXPECT_NEAR(r.value, expected, 1e-14);
  EXPECT_NEAR(r.gradient[0], 0.731059, 1e-6);
  EXPECT_NEAR(r.gradient[0], logistic(1.0), 1e-15);
  EXPECT_EQ(r.gradient[1], 0.0);
}

TEST(HoleLoss, EmptyEdgeSets) {
  for (const auto& values : {std::vector<double>{-1, -2, -0.1}, std::vector<double>{1, 2, 0.1}, std::vector<double>{0, 0, 0}}) {
    const auto r = hole_loss(line_grid(values));
    EXPECT_EQ(r.value, 0.0);
    for (double g : r.gradient) EXPECT_EQ(g, 0.0);
  }
}

TEST(HoleLoss, CountsEveryDirectedEdge) {
  // A positive center surrounded by negatives in 3D: six edges out of one vertex.
  GridSpec spec = testing::cube_grid(3);
  ScalarGrid g{spec, std::vector<double>(spec.vertex_count(), -1.0)};
  const std::size_t center = spec.index(1, 1, 1);
  g.values[center] = 0.5;
  const auto r = hole_loss(g);
  EXPECT_NEAR(r.value, 6.0 * std::log1p(std::exp(0.5)), 1e-14);
  EXPECT_NEAR(r.gradient[center], 6.0 * logistic(0.5), 1e-14);
}

TEST(HoleLoss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto check = finite_diff_check_hole(random_grid(4, seed), 1e-5);
    EXPECT_LT(check.max_rel_err, 1e-4);
    EXPECT_GT(check.checked, 0u);
    EXPECT_EQ(check.checked + check.excluded.size(), 64u);
  }
}

TEST(HoleLoss, RejectsNonFinite) {
  EXPECT_THROW(hole_loss(line_grid({1.0, NAN})), InvalidInput);
  EXPECT_THROW(finite_diff_check_hole(line_grid({1.0, -1.0}), 0.0), InvalidInput);
}

TEST(CollisionLoss, SingleVertexBelowPatch) {
  const Mesh inner = flat_patch(1, 1.0);
  Mesh outer;
  outer.positions = {{0.0, 0.0, -0.1}};
  const auto r = collision_loss(outer, inner);
  EXPECT_NEAR(r.value, 0.001, 1e-15);
  EXPECT_NEAR(r.gradient[0].z, -3.0 * 0.01, 1e-15);
  EXPECT_NEAR(r.max_penetration, 0.1, 1e-15);
  EXPECT_NEAR(collision_loss(outer, inner, NearestMode::kSurface).value, 0.001, 1e-15);
}

TEST(CollisionLoss, ZeroWhenOutsideOrCoincident) {
  const Mesh inner = flat_patch(4, 0.25);
  Mesh outer;
  outer.positions = {{0.1, 0.3, 0.2}, {0.5, 0.5, 0.0}, {1.0, 1.0, 1e-3}};
  for (auto mode : {NearestMode::kVertex, NearestMode::kSurface}) {
    const auto r = collision_loss(outer, inner, mode);
    EXPECT_EQ(r.value, 0.0);
    for (const auto& g : r.gradient) EXPECT_EQ(length(g), 0.0);
  }
}

TEST(CollisionLoss, CubicInDepthAndMeanOverVertices) {
  const Mesh inner = flat_patch(2, 0.5);
  Mesh outer;
  outer.positions = {{0.5, 0.5, -0.2}, {0.5, 0.5, 0.3}};
  EXPECT_NEAR(collision_loss(outer, inner).value, 0.008 / 2.0, 1e-15);
  outer.positions[0].z = -0.4;
  EXPECT_NEAR(collision_loss(outer, inner).value, 0.064 / 2.0, 1e-15);
}

TEST(CollisionLoss, NearestVertexUsesItsNormal) {
  Mesh inner;
  inner.positions = {{0, 0, 0}, {1, 0, 0}};
  inner.normals = {{0, 0, 1}, {1, 0, 0}};
  Mesh outer;
  outer.positions = {{0.8, 0, -0.1}};  // nearest is vertex 1; its normal sees 0.2 of penetration
  EXPECT_NEAR(collision_loss(outer, inner).value, 0.008, 1e-15);
}

TEST(CollisionLoss, GradientMatchesFiniteDifferences) {
  const Mesh inner = make_icosphere({0, 0, 0}, 0.3, 2);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> inside(0.22, 0.28), outside(0.34, 0.40);
  Mesh outer;
  for (int i = 0; i < 50; ++i) {
    Vec3 d{g(rng), g(rng), g(rng)};
    outer.positions.push_back(d * ((i % 5 == 4 ? outside(rng) : inside(rng)) / length(d)));
  }
  for (auto mode : {NearestMode::kVertex, NearestMode::kSurface}) {
    const auto check = finite_diff_check_collision(outer, inner, 1e-5, mode);
    EXPECT_LT(check.max_rel_err, 1e-4);
    EXPECT_GT(check.checked, 100u);
  }
}

TEST(CollisionLoss, CentralDifferenceBiasNearTheKink) {
  // For one vertex at depth d, [L(z + e) - L(z - e)] / 2e = -(3 d^2 + e^2): the
  // difference quotient carries an e^2 bias that dominates as d -> 0.
  const Mesh inner = flat_patch(1, 1.0);
  const double e = 1e-5;
  for (double d : {1e-1, 1e-2, 1e-3, 2e-4}) {
    Mesh outer;
    outer.positions = {{0.0, 0.0, -d}};
    const double analytic = collision_loss(outer, inner).gradient[0].z;
    EXPECT_NEAR(analytic, -3.0 * d * d, 1e-18);
    outer.positions[0].z = -d + e;
    const double up = collision_loss(outer, inner).value;
    outer.positions[0].z = -d - e;
    const double down = collision_loss(outer, inner).value;
    EXPECT_NEAR((up - down) / (2 * e), -(3.0 * d * d + e * e), 1e-9);
  }
}

TEST(CollisionLoss, InvalidInputs) {
  Mesh inner = flat_patch(1, 1.0), outer;
  EXPECT_THROW(collision_loss(outer, inner), InvalidInput);
  outer.positions = {{0, 0, 0}};
  inner.normals.clear();
  EXPECT_THROW(collision_loss(outer, inner), InvalidInput);
}

TEST(Resolve, NonPenetratingIsUnchanged) {
  const Mesh inner = make_icosphere({0, 0, 0}, 0.2, 2);
  const Mesh outer = make_icosphere({0, 0, 0}, 0.3, 2);
  const auto r = resolve_collisions(outer, inner);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.mesh, outer);
}

TEST(Resolve, ConcentricSpheres) {
  const Mesh inner = make_icosphere({0, 0, 0}, 0.30, 3);
  const Mesh outer = make_icosphere({0, 0, 0}, 0.28, 3);
  ResolveOptions options;
  options.step = 0.1;
  options.max_iters = 500;
  const auto r = resolve_collisions(outer, inner, options);
  EXPECT_LT(r.max_penetration, 1e-3);
  EXPECT_LE(r.iterations, 500);
  EXPECT_GT(r.iterations, 0);
  EXPECT_EQ(r.iterations, 24);  // regression: recorded with step 0.1, subdivision 3
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
  EXPECT_EQ(r.mesh.triangles, outer.triangles);
  EXPECT_NE(r.mesh.positions, outer.positions);
  // The input is untouched.
  EXPECT_EQ(outer, make_icosphere({0, 0, 0}, 0.28, 3));
}

TEST(Resolve, FlatPatchDescends) {
  const Mesh inner = flat_patch(4, 0.25);
  Mesh outer = flat_patch(4, 0.25);
  for (auto& p : outer.positions) p.z = -0.05 - 0.1 * p.x;
  for (double smooth : {0.0, 1e-3}) {
    ResolveOptions options;
    options.smooth_weight = smooth;
    const auto r = resolve_collisions(outer, inner, options);
    ASSERT_GT(r.trace.size(), 2u);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
    EXPECT_LT(r.trace.back(), r.trace.front());
  }
  ResolveOptions bad;
  bad.step = 0.0;
  EXPECT_THROW(resolve_collisions(outer, inner, bad), InvalidInput);
}

TEST(ImageLosses, Identities) {
  const std::vector<double> mask{1, 0, 1, 1};
  const std::vector<Vec3> n{{0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {0, 0, -1}};
  EXPECT_EQ(mask_loss(mask, mask), 0.0);
  EXPECT_EQ(normal_loss(n, n, mask), 0.0);
  EXPECT_EQ(depth_loss(mask, mask, mask), 0.0);
  EXPECT_EQ(mask_loss(std::vector<double>{1, 1, 0, 0}, std::vector<double>{1, 0, 1, 0}), 0.5);
  const std::vector<Vec3> rotated{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}};
  EXPECT_EQ(normal_loss(rotated, n, mask), 1.0);
  EXPECT_NEAR(depth_loss(std::vector<double>{1, 5, 2, 3}, std::vector<double>{1.5, 0, 2, 2}, mask), 0.5, 1e-15);
  EXPECT_THROW(mask_loss(mask, std::vector<double>{1}), InvalidInput);
  EXPECT_THROW(normal_loss(n, n, std::vector<double>{1}), InvalidInput);
  EXPECT_EQ(depth_loss(mask, mask, std::vector<double>(4, 0.0)), 0.0);
}

TEST(SemanticLoss, OneHotUniformAndMixed) {
  const std::vector<std::uint32_t> ref{0, 2};
  const std::vector<double> mask{1, 1};
  EXPECT_EQ(semantic_ce_loss(std::vector<double>{1, 0, 0, 0, 0, 1}, std::vector<double>{1, 1}, 3, ref, mask), 0.0);
  const double third = 1.0 / 3.0;
  EXPECT_NEAR(semantic_ce_loss(std::vector<double>(6, third), std::vector<double>{1, 1}, 3, ref, mask),
              std::log(3.0), 1e-12);
  // Accumulated vectors are divided by alpha first: (0.3, 0.1, 0.1) / 0.5 -> p0 = 0.6.
  const std::vector<double> mixed{0.3, 0.1, 0.1, 0.2, 0.2, 0.4};
  const double expected = 0.5 * (-std::log(0.6) - std::log(0.5));
  EXPECT_NEAR(semantic_ce_loss(mixed, std::vector<double>{0.5, 0.8}, 3, ref, mask), expected, 1e-12);
  // Masked-out pixels are ignored.
  EXPECT_NEAR(semantic_ce_loss(mixed, std::vector<double>{0.5, 0.8}, 3, ref, std::vector<double>{1, 0}),
              -std::log(0.6), 1e-12);
  EXPECT_THROW(semantic_ce_loss(mixed, std::vector<double>{0.5, 0.8}, 3, std::vector<std::uint32_t>{0, 3}, mask),
               InvalidInput);
}

TEST(LossWeights, DefaultsAndValidation) {
  LossWeights w;
  EXPECT_EQ(w.lpips, 2.0);
  EXPECT_EQ(w.mask, 1.0);
  EXPECT_EQ(w.sem, 1.0);
  EXPECT_EQ(w.depth, 0.5);
  EXPECT_EQ(w.normal, 0.2);
  EXPECT_EQ(w.dev, 0.5);
  EXPECT_EQ(w.hole, 1e-4);
  EXPECT_NO_THROW(w.validate());
  w.collision = -1.0;
  EXPECT_THROW(w.validate(), InvalidInput);
}

}  // namespace
}  // namespace semsurf
