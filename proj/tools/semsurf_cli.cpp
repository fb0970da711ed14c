// SPDX-License-Identifier: Apache-2.0
// semsurf: extract, render and evaluate layered surfaces of implicit scenes.
//
// Exit codes: 0 success, 1 configuration or input error, 2 runtime error.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "job_config.hpp"
#include "semsurf/error.hpp"
#include "semsurf/extract.hpp"
#include "semsurf/image_io.hpp"
#include "semsurf/losses.hpp"
#include "semsurf/mesh_io.hpp"
#include "semsurf/metrics.hpp"
#include "semsurf/parallel.hpp"
#include "semsurf/render.hpp"
#include "semsurf/scene_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace semsurf::cli {
namespace {

// Flags collected by CLI11; empty optionals mean "not given".
struct Flags {
  std::string config;
  std::optional<std::string> scene, out, fine, coarse;
  std::optional<int> kernel;
  bool no_proposal = false;
  std::optional<std::size_t> views, width, height, samples, metric_samples;
  std::optional<double> elevation;
  std::vector<std::string> buffers, layers;
  std::optional<std::uint64_t> seed;
  // metrics
  std::string pred, ref;
  std::optional<std::string> convention;
  // gradcheck
  std::string target = "hole";
  double eps = 1e-5;
  std::string mode = "vertex";
  // resolve
  std::string outer, inner;
  double step = 0.1;
  int max_iters = 500;
  double smooth = 0.0;
  // demo
  bool collision_pair = false;
};

// Runs `f`, turning input-validation failures into ConfigError.
template <class F>
auto loading(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

JobConfig build_config(const Flags& flags) {
  JobConfig c;
  if (!flags.config.empty()) c = load_job_config(flags.config);
  if (flags.scene) c.scene = *flags.scene;
  if (flags.out) c.out = *flags.out;
  if (flags.fine) c.fine = parse_resolution(*flags.fine);
  if (flags.coarse) c.coarse = parse_resolution(*flags.coarse);
  if (flags.kernel) c.kernel = *flags.kernel;
  if (flags.no_proposal) c.proposal = false;
  if (flags.views) c.camera.views = *flags.views;
  if (flags.width) c.camera.width = *flags.width;
  if (flags.height) c.camera.height = *flags.height;
  if (flags.samples) c.camera.samples = *flags.samples;
  if (flags.elevation) c.camera.elevation_deg = *flags.elevation;
  if (!flags.buffers.empty()) c.buffers = flags.buffers;
  if (flags.seed) c.seed = *flags.seed;
  if (flags.metric_samples) c.metrics.samples = *flags.metric_samples;
  if (flags.convention) {
    if (*flags.convention != "squared" && *flags.convention != "unsquared")
      throw ConfigError("--convention must be squared or unsquared");
    c.metrics.convention =
        *flags.convention == "squared" ? ChamferConvention::kSquared : ChamferConvention::kUnsquared;
  }
  c.metrics.seed = c.seed;
  c.validate();
  return c;
}

ImplicitScene resolve_scene(const std::string& scene) {
  if (scene.empty()) throw ConfigError("no scene given (--scene FILE or a demo scene name)");
  if (fs::exists(scene)) return loading([&] { return load_scene(scene); });
  for (const auto& name : demo_scene_names())
    if (name == scene) return demo_scene(name);
  throw ConfigError("cannot open scene file '" + scene + "'");
}

std::string scene_stem(const ImplicitScene& scene, const std::string& arg) {
  return scene.name().empty() ? fs::path(arg).stem().string() : scene.name();
}

GridSpec fine_grid(const ImplicitScene& scene, const JobConfig& c) {
  if (!scene.default_grid()) throw ConfigError("scene has no grid; add one to the scene file");
  GridSpec g = *scene.default_grid();
  if (c.fine) g.resolution = *c.fine;
  loading([&] { g.validate(); });
  return g;
}

std::vector<LayerDefinition> layer_definitions(const ImplicitScene& scene, const JobConfig& c) {
  auto defs = c.layers.empty() ? default_layer_definitions(scene.labels()) : c.layers;
  // Validates label names up front.
  for (const auto& d : defs) loading([&] { return SemanticSet::from_names(d.name, d.labels, scene.labels()); });
  return defs;
}

json grid_json(const GridSpec& g) { return {{"resolution", g.resolution}, {"min", {g.min.x, g.min.y, g.min.z}},
                                            {"max", {g.max.x, g.max.y, g.max.z}}}; }

void write_json(const fs::path& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

int cmd_extract(const Flags& flags) {
  const JobConfig c = build_config(flags);
  const ImplicitScene scene = resolve_scene(c.scene);
  const GridSpec fine = fine_grid(scene, c);
  const auto defs = layer_definitions(scene, c);
  ExtractOptions options;
  options.use_proposal = c.proposal;
  options.kernel = c.kernel;
  if (c.coarse) {
    GridSpec coarse = fine;
    coarse.resolution = *c.coarse;
    options.coarse = coarse;
  }

  const auto start = std::chrono::steady_clock::now();
  const auto result = extract_character(scene, defs, fine, options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string stem = scene_stem(scene, c.scene);
  CharacterResult named = result;
  named.character.scene_id = stem;
  const auto files = export_character(named.character, c.out, stem);

  json layers = json::array();
  std::size_t coarse_total = 0, fine_total = 0, dense_total = 0;
  for (const auto& [name, stats] : result.stats) {
    const Mesh& m = result.character.layers.at(name);
    const auto& prov = result.character.provenance.at(name);
    json l{{"name", name},
           {"selector", prov.selector},
           {"vertices", m.positions.size()},
           {"triangles", m.triangles.size()},
           {"coarse_evaluations", stats.coarse_evaluations},
           {"fine_evaluations", stats.fine_evaluations},
           {"dense_evaluations", stats.dense_evaluations},
           {"active_vertices", stats.active_vertices},
           {"reduction_ratio", stats.reduction_ratio()}};
    if (!m.triangles.empty()) {
      const auto h = hollow_check(m);
      l["components"] = h.components;
      l["closed_components"] = h.closed_components;
      l["nested_pairs"] = h.nested_pairs;
    }
    layers.push_back(std::move(l));
    coarse_total += stats.coarse_evaluations;
    fine_total += stats.fine_evaluations;
    dense_total += stats.dense_evaluations;
  }
  json stats{{"scene", stem},
             {"fine", grid_json(fine)},
             {"proposal", c.proposal},
             {"kernel", c.kernel},
             {"layers", layers},
             {"coarse_evaluations", coarse_total},
             {"fine_evaluations", fine_total},
             {"dense_evaluations", dense_total},
             {"reduction_ratio", static_cast<double>(dense_total) / static_cast<double>(coarse_total + fine_total)}};
  if (c.proposal) stats["coarse"] = grid_json(options.coarse ? *options.coarse : default_coarse_grid(fine));
  json files_json = json::array();
  for (const auto& f : files) files_json.push_back(f.filename().string());
  stats["files"] = files_json;
  write_json(c.out / "stats.json", stats);
  // Timing varies between runs, so it stays out of stats.json.
  write_json(c.out / "timing.json", {{"extract_seconds", seconds}, {"threads", thread_count()}});
  std::printf("extracted %zu layers of %s in %.2f s (reduction %.2fx) -> %s\n", result.stats.size(), stem.c_str(),
              seconds, stats["reduction_ratio"].get<double>(), c.out.string().c_str());
  return 0;
}

int cmd_render(const Flags& flags) {
  JobConfig c = build_config(flags);
  const ImplicitScene scene = resolve_scene(c.scene);
  auto defs = layer_definitions(scene, c);
  std::vector<std::pair<std::string, RenderMode>> modes;
  for (const auto& d : defs) modes.emplace_back(d.name, SemanticSet::from_names(d.name, d.labels, scene.labels()));
  modes.emplace_back(kHolisticLayer, Holistic{});
  if (!flags.layers.empty()) {
    std::vector<std::pair<std::string, RenderMode>> chosen;
    for (const auto& want : flags.layers) {
      auto it = std::find_if(modes.begin(), modes.end(), [&](const auto& m) { return m.first == want; });
      if (it == modes.end()) throw ConfigError("unknown layer '" + want + "'");
      chosen.push_back(*it);
    }
    modes = std::move(chosen);
  }
  const std::vector<std::string> buffers = c.buffers.empty() ? buffer_names() : c.buffers;

  Camera base;
  base.width = c.camera.width;
  base.height = c.camera.height;
  base.samples = c.camera.samples;
  base.elevation_deg = c.camera.elevation_deg;
  base.half_extent = c.camera.half_extent;
  base.near = c.camera.near;
  base.far = c.camera.far;
  if (scene.default_grid()) base.target = (scene.default_grid()->min + scene.default_grid()->max) * 0.5;
  auto cameras = turntable(base, c.camera.views);
  for (auto& cam : cameras) cam.elevation_deg = c.camera.elevation_deg;

  const std::string stem = scene_stem(scene, c.scene);
  std::size_t written = 0;
  for (const auto& [layer, mode] : modes) {
    for (const auto& cam : cameras) {
      const auto b = render_buffers(cam, scene, mode);
      char az[8];
      std::snprintf(az, sizeof az, "%03d", static_cast<int>(std::lround(cam.azimuth_deg)));
      for (const auto& name : buffers) {
        write_png(buffer_image(b, name), c.out / (stem + "_" + layer + "_az" + az + "_" + name + ".png"));
        ++written;
      }
    }
  }
  std::printf("wrote %zu images (%zu layers x %zu views x %zu buffers) -> %s\n", written, modes.size(),
              cameras.size(), buffers.size(), c.out.string().c_str());
  return 0;
}

int cmd_metrics(const Flags& flags) {
  const JobConfig c = build_config(flags);
  if (flags.pred.empty() || flags.ref.empty()) throw ConfigError("metrics needs --pred and --ref directories");
  const auto pred = loading([&] { return load_character(flags.pred); });
  const auto ref = loading([&] { return load_character(flags.ref); });
  const LayerReport report = evaluate_layers(pred, ref, c.metrics);
  json doc = report.to_json();
  doc["pred"] = flags.pred;
  doc["ref"] = flags.ref;
  write_json(c.out / "metrics.json", doc);
  std::printf("%-10s %12s %10s %10s\n", "layer", "chamfer", "iou", "f1");
  for (const auto& r : report.rows)
    std::printf("%-10s %12.4e %10.4f %10.4f%s\n", r.layer.c_str(), r.chamfer, r.voxel_iou, r.fscore,
                r.empty ? " (empty)" : "");
  return 0;
}

// Portable uniform in [lo, hi) from the raw 64-bit engine output.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int cmd_gradcheck(const Flags& flags) {
  const JobConfig c = build_config(flags);
  if (flags.target != "hole" && flags.target != "collision")
    throw ConfigError("--target must be hole or collision");
  if (!(flags.eps > 0.0)) throw ConfigError("--eps must be positive");
  std::mt19937_64 rng(c.seed);
  GradientCheck check;
  double value = 0.0, weight = 0.0;
  if (flags.target == "hole") {
    GridSpec spec;
    spec.resolution = {4, 4, 4};
    spec.min = {-1, -1, -1};
    spec.max = {1, 1, 1};
    ScalarGrid grid{spec, std::vector<double>(64)};
    for (auto& v : grid.values) v = uniform(rng, -2.0, 2.0);
    check = finite_diff_check_hole(grid, flags.eps);
    value = hole_loss(grid).value;
    weight = c.weights.hole;
  } else {
    const NearestMode mode = flags.mode == "surface" ? NearestMode::kSurface : NearestMode::kVertex;
    if (flags.mode != "surface" && flags.mode != "vertex") throw ConfigError("--mode must be vertex or surface");
    const Mesh inner = make_icosphere({0, 0, 0}, 0.3, 2);
    Mesh outer;
    for (int i = 0; i < 50; ++i) {
      Vec3 d{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
      if (length(d) < 1e-3) d = {1, 0, 0};
      const double r = i % 5 == 4 ? uniform(rng, 0.34, 0.40) : uniform(rng, 0.22, 0.28);
      outer.positions.push_back(d * (r / length(d)));
    }
    check = finite_diff_check_collision(outer, inner, flags.eps, mode);
    value = collision_loss(outer, inner, mode).value;
    weight = c.weights.collision;
  }
  const bool pass = check.max_rel_err < 1e-4;
  json doc{{"target", flags.target},
           {"eps", flags.eps},
           {"seed", c.seed},
           {"loss", value},
           {"weight", weight},
           {"weighted_loss", weight * value},
           {"max_rel_err", check.max_rel_err},
           {"checked", check.checked},
           {"excluded", check.excluded},
           {"pass", pass}};
  write_json(c.out / ("gradcheck_" + flags.target + ".json"), doc);
  std::printf("%s gradient check: max relative error %.3e over %zu coordinates (%zu excluded) %s\n",
              flags.target.c_str(), check.max_rel_err, check.checked, check.excluded.size(),
              pass ? "PASS" : "FAIL");
  return 0;
}

int cmd_resolve(const Flags& flags) {
  const JobConfig c = build_config(flags);
  if (flags.outer.empty() || flags.inner.empty()) throw ConfigError("resolve needs --outer and --inner meshes");
  if (flags.mode != "surface" && flags.mode != "vertex") throw ConfigError("--mode must be vertex or surface");
  const Mesh outer = loading([&] { return load_mesh(flags.outer); });
  const Mesh inner = loading([&] { return load_mesh(flags.inner); });
  if (!inner.has_normals()) throw ConfigError("inner mesh '" + flags.inner + "' has no vertex normals");
  ResolveOptions options;
  options.step = flags.step;
  options.max_iters = flags.max_iters;
  options.smooth_weight = flags.smooth;
  options.mode = flags.mode == "surface" ? NearestMode::kSurface : NearestMode::kVertex;
  if (!(options.step > 0.0) || options.max_iters < 0 || !(options.smooth_weight >= 0.0))
    throw ConfigError("--step must be positive, --max-iters and --smooth non-negative");
  const double before = collision_loss(outer, inner, options.mode).max_penetration;

  json doc;
  try {
    const auto r = resolve_collisions(outer, inner, options);
    const fs::path out_mesh = c.out / (fs::path(flags.outer).stem().string() + "_resolved" +
                                       fs::path(flags.outer).extension().string());
    save_mesh(r.mesh, out_mesh);
    doc = {{"outer", flags.outer},         {"inner", flags.inner},
           {"output", out_mesh.filename().string()},
           {"initial_max_penetration", before},
           {"final_max_penetration", r.max_penetration},
           {"iterations", r.iterations}, {"trace", r.trace}};
    write_json(c.out / "resolve.json", doc);
    std::printf("max penetration %.3e -> %.3e after %d iterations -> %s\n", before, r.max_penetration,
                r.iterations, out_mesh.string().c_str());
  } catch (const DivergenceError& e) {
    write_json(c.out / "resolve.json", {{"error", e.what()}, {"trace", e.trace()}});
    throw;
  }
  return 0;
}

int cmd_demo(const Flags& flags) {
  const JobConfig c = build_config(flags);
  for (const auto& name : demo_scene_names()) {
    const fs::path path = c.out / (name + ".json");
    fs::create_directories(c.out);
    save_scene(demo_scene(name), path);
    std::printf("wrote %s\n", path.string().c_str());
  }
  if (flags.collision_pair) {
    save_mesh(make_icosphere({0, 0, 0}, 0.28, 3), c.out / "collision_outer.obj");
    save_mesh(make_icosphere({0, 0, 0}, 0.30, 3), c.out / "collision_inner.obj");
    std::printf("wrote %s and %s\n", (c.out / "collision_outer.obj").string().c_str(),
                (c.out / "collision_inner.obj").string().c_str());
  }
  return 0;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON job config (schema_version 1); flags override it");
  sub->add_option("--out", f.out, "Output directory (default: out)");
  sub->add_option("--seed", f.seed, "Seed for all sampling (default 0)");
}

void add_scene(CLI::App* sub, Flags& f) {
  sub->add_option("--scene", f.scene, "Scene JSON file or demo scene name (nested-character, two-spheres)");
}

}  // namespace
}  // namespace semsurf::cli

int main(int argc, char** argv) {
  using namespace semsurf::cli;
  CLI::App app{"Layered surface extraction, rendering and evaluation for implicit scenes"};
  app.require_subcommand(1);
  Flags f;
  std::function<int(const Flags&)> run;

  auto* extract = app.add_subcommand("extract", "Extract per-layer meshes (OBJ + PLY) and stats.json");
  add_common(extract, f);
  add_scene(extract, f);
  extract->add_option("--fine,--fine-res", f.fine, "Fine grid resolution, e.g. 256x256x384");
  extract->add_option("--coarse,--coarse-res", f.coarse, "Coarse proposal grid resolution (default fine / 4)");
  extract->add_option("--kernel", f.kernel, "Odd dilation kernel size (default 3)");
  extract->add_flag("--no-proposal", f.no_proposal, "Evaluate the fine grid densely");
  extract->callback([&] { run = cmd_extract; });

  auto* render = app.add_subcommand("render", "Render turntable PNG buffers for every layer");
  add_common(render, f);
  add_scene(render, f);
  render->add_option("--views", f.views, "Number of equidistant azimuths (default 8)");
  render->add_option("--width", f.width, "Image width (default 256)");
  render->add_option("--height", f.height, "Image height (default 256)");
  render->add_option("--samples", f.samples, "Samples per ray (default 512)");
  render->add_option("--elevation", f.elevation, "Elevation in degrees (default 0)");
  render->add_option("--buffer", f.buffers, "Buffers to write: color, alpha, semantic, depth, normal (default all)");
  render->add_option("--layer", f.layers, "Layers to render (default every layer and holistic)");
  render->callback([&] { run = cmd_render; });

  auto* metrics = app.add_subcommand("metrics", "Compare two layer directories; writes metrics.json");
  add_common(metrics, f);
  metrics->add_option("--pred", f.pred, "Directory of predicted <stem>_<layer> meshes")->required();
  metrics->add_option("--ref", f.ref, "Directory of reference meshes")->required();
  metrics->add_option("--samples", f.metric_samples, "Surface samples per mesh (default 100000)");
  metrics->add_option("--convention", f.convention, "Chamfer convention: squared (default) or unsquared");
  metrics->callback([&] { run = cmd_metrics; });

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of a loss gradient");
  add_common(gradcheck, f);
  gradcheck->add_option("--target", f.target, "hole (default) or collision");
  gradcheck->add_option("--eps", f.eps, "Central-difference step (default 1e-5)");
  gradcheck->add_option("--mode", f.mode, "Collision nearest element: vertex (default) or surface");
  gradcheck->callback([&] { run = cmd_gradcheck; });

  auto* resolve = app.add_subcommand("resolve", "Push an outer mesh out of an inner mesh");
  add_common(resolve, f);
  resolve->add_option("--outer", f.outer, "Outer mesh (OBJ or PLY)")->required();
  resolve->add_option("--inner", f.inner, "Inner mesh with vertex normals")->required();
  resolve->add_option("--step", f.step, "Initial step size (default 0.1)");
  resolve->add_option("--max-iters", f.max_iters, "Iteration limit (default 500)");
  resolve->add_option("--smooth", f.smooth, "Edge smoothing weight (default 0)");
  resolve->add_option("--mode", f.mode, "Nearest element: vertex (default) or surface");
  resolve->callback([&] { run = cmd_resolve; });

  auto* demo = app.add_subcommand("demo", "Write the shipped demo scenes as JSON");
  add_common(demo, f);
  demo->add_flag("--collision-pair", f.collision_pair, "Also write a penetrating concentric sphere pair");
  demo->callback([&] { run = cmd_demo; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run(f);
  } catch (const ConfigError& e) {
    std::cerr << "semsurf: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "semsurf: " << e.what() << '\n';
    return 2;
  }
}
