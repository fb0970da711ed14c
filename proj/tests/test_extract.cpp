// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "semsurf/error.hpp"
#include "semsurf/extract.hpp"
#include "semsurf/metrics.hpp"
#include "semsurf/parallel.hpp"
#include "semsurf/scene_io.hpp"

namespace semsurf {
namespace {

GridSpec scene_grid(const ImplicitScene& scene, std::size_t nx, std::size_t nz) {
  GridSpec g = *scene.default_grid();
  g.resolution = {nx, nx, nz};
  return g;
}

TEST(Extract, ClothLayerIsAHollowShell) {
  const auto scene = demo_scene("nested-character");
  const auto fine = scene_grid(scene, 64, 96);
  const auto cloth = extract_layer(scene, SemanticSet::from_names("cloth", {"cloth"}, scene.labels()), fine).mesh;
  const auto report = hollow_check(cloth);
  EXPECT_EQ(report.components, 2u);
  EXPECT_EQ(report.closed_components, 2u);
  EXPECT_GE(report.nested_pairs, 1u);
  const auto body = extract_layer(scene, SemanticSet::from_names("body", {"body"}, scene.labels()), fine).mesh;
  const auto b = hollow_check(body);
  EXPECT_EQ(b.components, 1u);
  EXPECT_EQ(b.closed_components, 1u);
}

TEST(Extract, FullSetEqualsHolisticSdf) {
  const auto scene = demo_scene("nested-character");
  // Dense path: at this resolution the coarse pass cannot resolve the thin cloth
  // shell, so only dense evaluation is comparable.
  const auto fine = scene_grid(scene, 48, 72);
  ExtractOptions dense;
  dense.use_proposal = false;
  const auto full = extract_layer(scene, SemanticSet::full(scene.labels()), fine, dense).mesh;
  ScalarGrid f{fine, std::vector<double>(fine.vertex_count())};
  for (std::size_t v = 0; v < f.values.size(); ++v) f.values[v] = scene.sdf(fine.vertex_position(v));
  const auto plain = marching_cubes(f);
  EXPECT_EQ(full.triangles, plain.triangles);
  EXPECT_EQ(full.positions, plain.positions);
}

TEST(Extract, TwoSpheresBodyIsOneTruncatedComponent) {
  const auto scene = demo_scene("two-spheres");
  const auto fine = scene_grid(scene, 64, 96);
  const auto body = extract_layer(scene, SemanticSet::from_names("body", {"body"}, scene.labels()), fine).mesh;
  const auto r = hollow_check(body);
  EXPECT_EQ(r.components, 1u);
  EXPECT_EQ(r.closed_components, 1u);
  // Truncated at the transit plane x = 0; the far side stays at the sphere.
  const auto box = bounding_box(body);
  EXPECT_LT(box.max.x, fine.spacing().x);
  EXPECT_NEAR(box.min.x, -0.40, fine.cell_diagonal());
}

TEST(Extract, SparseMatchesDenseOnDemoScenes) {
  for (const auto& name : demo_scene_names()) {
    const auto scene = demo_scene(name);
    const auto fine = scene_grid(scene, 64, 96);
    const auto defs = default_layer_definitions(scene.labels());
    ExtractOptions dense;
    dense.use_proposal = false;
    const auto a = extract_character(scene, defs, fine);
    const auto b = extract_character(scene, defs, fine, dense);
    for (const auto& layer : a.character.order) EXPECT_EQ(a.character.layers.at(layer), b.character.layers.at(layer)) << name << "/" << layer;
  }
}

TEST(Extract, LayerVerticesLieOnTheirEquivalentSurface) {
  const auto scene = demo_scene("nested-character");
  const auto fine = scene_grid(scene, 64, 96);
  for (const auto& def : default_layer_definitions(scene.labels())) {
    const auto set = SemanticSet::from_names(def.name, def.labels, scene.labels());
    const auto mesh = extract_layer(scene, set, fine).mesh;
    for (const auto& p : mesh.positions) ASSERT_LT(std::abs(equivalent_sdf(scene.sample(p), set)), fine.cell_diagonal());
  }
}

TEST(Extract, AttributesFromFieldAndOriginalSdf) {
  const auto scene = demo_scene("nested-character");
  const auto fine = scene_grid(scene, 64, 96);
  const auto body = extract_layer(scene, SemanticSet::from_names("body", {"body"}, scene.labels()), fine).mesh;
  ASSERT_TRUE(body.has_normals());
  ASSERT_TRUE(body.has_colors());
  for (std::size_t v = 0; v < body.positions.size(); ++v) {
    ASSERT_NEAR(length(body.normals[v]), 1.0, 1e-9);
    ASSERT_GT(dot(body.normals[v], normalize(body.positions[v])), 0.99);
    ASSERT_EQ(body.colors[v], scene.sample(body.positions[v]).color);
  }
}

TEST(Extract, CharacterHasDefaultLayersAndProvenance) {
  const auto scene = demo_scene("two-spheres");
  const auto fine = scene_grid(scene, 32, 48);
  const auto r = extract_character(scene, default_layer_definitions(scene.labels()), fine);
  EXPECT_EQ(r.character.order, (std::vector<std::string>{"body", "cloth", "hair", "holistic"}));
  EXPECT_TRUE(r.character.layers.at("hair").empty());  // no hair primitive
  EXPECT_EQ(r.character.provenance.size(), 4u);
  EXPECT_EQ(r.character.provenance.at("cloth").fine, fine);
  EXPECT_TRUE(r.character.provenance.at("cloth").proposal);
  EXPECT_EQ(r.character.scene_id, "two-spheres");
  EXPECT_THROW(extract_character(scene, {}, fine), InvalidInput);
  EXPECT_THROW(extract_character(scene, {{"holistic", {"body"}}}, fine), InvalidInput);
  EXPECT_THROW(extract_character(scene, {{"a", {"body"}}, {"a", {"cloth"}}}, fine), InvalidInput);
}

TEST(Extract, RegressionCountsAt128) {
  std::ifstream in(std::string(SEMSURF_FIXTURE_DIR) + "/nested_character_128.json");
  ASSERT_TRUE(in);
  const auto fixture = nlohmann::json::parse(in);
  const auto scene = demo_scene("nested-character");
  const auto r = extract_character(scene, default_layer_definitions(scene.labels()), scene_grid(scene, 128, 192));
  for (const auto& [layer, count] : fixture["vertices"].items()) {
    EXPECT_EQ(r.character.layers.at(layer).positions.size(), count.get<std::size_t>()) << layer;
    EXPECT_EQ(r.character.layers.at(layer).triangles.size(), fixture["triangles"][layer].get<std::size_t>()) << layer;
  }
}

TEST(Extract, DeterministicAcrossThreads) {
  const auto scene = demo_scene("nested-character");
  const auto fine = scene_grid(scene, 48, 72);
  const auto set = SemanticSet::from_names("cloth", {"cloth"}, scene.labels());
  Mesh a, b;
  {
    ScopedThreadCount t(1);
    a = extract_layer(scene, set, fine).mesh;
  }
  {
    ScopedThreadCount t(5);
    b = extract_layer(scene, set, fine).mesh;
  }
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace semsurf
