// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "semsurf/extract.hpp"
#include "semsurf/marching_cubes.hpp"
#include "semsurf/metrics.hpp"
#include "semsurf/point_index.hpp"
#include "semsurf/proposal.hpp"
#include "semsurf/render.hpp"
#include "semsurf/scene_io.hpp"
#include "semsurf/semantics.hpp"

namespace semsurf {
namespace {

GridSpec scene_grid(const ImplicitScene& scene, std::size_t n) {
  GridSpec g = *scene.default_grid();
  g.resolution = {n, n, n * 3 / 2};
  return g;
}

const ImplicitScene& nested() {
  static const ImplicitScene scene = demo_scene("nested-character");
  return scene;
}

SemanticSet cloth() { return SemanticSet::from_names("cloth", {"cloth"}, nested().labels()); }

void BM_DenseEquivalentSdf(benchmark::State& state) {
  const GridSpec fine = scene_grid(nested(), static_cast<std::size_t>(state.range(0)));
  const auto set = cloth();
  for (auto _ : state) benchmark::DoNotOptimize(equivalent_sdf_grid(nested(), fine, set));
  state.counters["evaluations"] = static_cast<double>(fine.vertex_count());
}
BENCHMARK(BM_DenseEquivalentSdf)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SparseEquivalentSdf(benchmark::State& state) {
  const GridSpec fine = scene_grid(nested(), static_cast<std::size_t>(state.range(0)));
  const GridSpec coarse = default_coarse_grid(fine);
  const auto set = cloth();
  ProposalStats stats;
  for (auto _ : state) {
    auto r = propose_and_evaluate(nested(), set, coarse, fine);
    stats = r.stats;
    benchmark::DoNotOptimize(r);
  }
  state.counters["evaluations"] = static_cast<double>(stats.total_evaluations());
  state.counters["reduction"] = stats.reduction_ratio();
}
BENCHMARK(BM_SparseEquivalentSdf)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_MarchingCubes(benchmark::State& state) {
  const GridSpec fine = scene_grid(nested(), static_cast<std::size_t>(state.range(0)));
  const ScalarGrid grid = equivalent_sdf_grid(nested(), fine, SemanticSet::full(nested().labels()));
  std::size_t triangles = 0;
  for (auto _ : state) {
    const Mesh m = marching_cubes(grid);
    triangles = m.triangles.size();
    benchmark::DoNotOptimize(m);
  }
  state.counters["triangles"] = static_cast<double>(triangles);
}
BENCHMARK(BM_MarchingCubes)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_RenderHolistic(benchmark::State& state) {
  Camera camera;
  camera.width = camera.height = static_cast<std::size_t>(state.range(0));
  camera.samples = 256;
  for (auto _ : state) benchmark::DoNotOptimize(render_buffers(camera, nested(), Holistic{}));
  state.counters["pixels"] = static_cast<double>(camera.width * camera.height);
}
BENCHMARK(BM_RenderHolistic)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_NearestNeighbor(benchmark::State& state) {
  const Mesh sphere = make_icosphere({0, 0, 0}, 0.5, 5);
  const auto points = sample_surface(sphere, static_cast<std::size_t>(state.range(0)), 1);
  const auto queries = sample_surface(sphere, 10000, 2);
  const PointIndex index(points);
  for (auto _ : state)
    for (const auto& q : queries) benchmark::DoNotOptimize(index.nearest(q));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * queries.size()));
}
BENCHMARK(BM_NearestNeighbor)->Arg(10000)->Arg(100000);

void BM_Chamfer(benchmark::State& state) {
  const Mesh a = make_icosphere({0, 0, 0}, 0.5, 4), b = make_icosphere({0, 0, 0}, 0.52, 4);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(a, b, static_cast<std::size_t>(state.range(0)), 0));
}
BENCHMARK(BM_Chamfer)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace semsurf

BENCHMARK_MAIN();
