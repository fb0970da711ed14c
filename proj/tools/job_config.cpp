// SPDX-License-Identifier: Apache-2.0
#include "job_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "semsurf/image_io.hpp"

namespace semsurf::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

std::array<std::size_t, 3> resolution(const json& v, const std::string& where) {
  if (v.is_string()) return parse_resolution(v.get<std::string>());
  if (!v.is_array() || v.size() != 3) throw ConfigError(where + ": expected [nx, ny, nz] or \"NXxNYxNZ\"");
  std::array<std::size_t, 3> r{};
  for (int a = 0; a < 3; ++a) {
    if (!v[a].is_number_integer() || v[a].get<long long>() < 2) throw ConfigError(where + ": entries must be >= 2");
    r[a] = v[a].get<std::size_t>();
  }
  return r;
}

}  // namespace

std::array<std::size_t, 3> parse_resolution(const std::string& text) {
  std::array<std::size_t, 3> r{};
  const char* p = text.data();
  const char* end = p + text.size();
  for (int a = 0; a < 3; ++a) {
    auto [next, ec] = std::from_chars(p, end, r[a]);
    if (ec != std::errc() || r[a] < 2) throw ConfigError("bad resolution '" + text + "' (expected e.g. 256x256x384)");
    p = next;
    if (a < 2) {
      if (p == end || (*p != 'x' && *p != 'X')) throw ConfigError("bad resolution '" + text + "' (expected e.g. 256x256x384)");
      ++p;
    }
  }
  if (p != end) throw ConfigError("bad resolution '" + text + "' (expected e.g. 256x256x384)");
  return r;
}

void JobConfig::validate() const {
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("kernel must be a positive odd integer");
  if (camera.views < 1) throw ConfigError("camera.views must be >= 1");
  if (camera.width < 1 || camera.height < 1) throw ConfigError("camera size must be >= 1");
  if (camera.samples < 2) throw ConfigError("camera.samples must be >= 2");
  if (!(camera.near < camera.far)) throw ConfigError("camera.near must be below camera.far");
  if (!(camera.half_extent > 0.0)) throw ConfigError("camera.half_extent must be positive");
  const auto& names = buffer_names();
  for (const auto& b : buffers)
    if (std::find(names.begin(), names.end(), b) == names.end())
      throw ConfigError("unknown buffer '" + b + "' (expected color, alpha, semantic, depth or normal)");
  if (metrics.samples < 1) throw ConfigError("metrics.samples must be >= 1");
  if (!(metrics.iou_granularity > 0.0 && metrics.iou_granularity <= 1.0))
    throw ConfigError("metrics.iou_granularity must be in (0, 1]");
  if (!(metrics.tau_fraction > 0.0)) throw ConfigError("metrics.tau_fraction must be positive");
  try {
    weights.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

JobConfig job_config_from_json(const json& doc, JobConfig c) {
  const std::string where = "config";
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != kConfigSchemaVersion)
    throw ConfigError("config: schema_version must be " + std::to_string(kConfigSchemaVersion));
  reject_unknown(doc,
                 {"schema_version", "scene", "out", "fine", "coarse", "proposal", "kernel", "layers", "camera",
                  "buffers", "loss_weights", "seed", "metrics"},
                 where);
  if (doc.contains("scene")) c.scene = get<std::string>(doc, "scene", where);
  if (doc.contains("out")) c.out = get<std::string>(doc, "out", where);
  if (doc.contains("fine")) c.fine = resolution(doc["fine"], "config.fine");
  if (doc.contains("coarse")) c.coarse = resolution(doc["coarse"], "config.coarse");
  if (doc.contains("proposal")) c.proposal = get<bool>(doc, "proposal", where);
  if (doc.contains("kernel")) c.kernel = get<int>(doc, "kernel", where);
  if (doc.contains("seed")) c.seed = get<std::uint64_t>(doc, "seed", where);
  if (doc.contains("buffers")) c.buffers = get<std::vector<std::string>>(doc, "buffers", where);
  if (doc.contains("layers")) {
    const json& layers = doc["layers"];
    if (!layers.is_array()) throw ConfigError("config.layers: expected an array");
    c.layers.clear();
    for (const auto& l : layers) {
      reject_unknown(l, {"name", "labels"}, "config.layers[]");
      c.layers.push_back({get<std::string>(l, "name", "config.layers[]"),
                          get<std::vector<std::string>>(l, "labels", "config.layers[]")});
    }
  }
  if (doc.contains("camera")) {
    const json& cam = doc["camera"];
    const std::string w = "config.camera";
    reject_unknown(cam, {"views", "width", "height", "samples", "elevation_deg", "half_extent", "near", "far"}, w);
    if (cam.contains("views")) c.camera.views = get<std::size_t>(cam, "views", w);
    if (cam.contains("width")) c.camera.width = get<std::size_t>(cam, "width", w);
    if (cam.contains("height")) c.camera.height = get<std::size_t>(cam, "height", w);
    if (cam.contains("samples")) c.camera.samples = get<std::size_t>(cam, "samples", w);
    if (cam.contains("elevation_deg")) c.camera.elevation_deg = get<double>(cam, "elevation_deg", w);
    if (cam.contains("half_extent")) c.camera.half_extent = get<double>(cam, "half_extent", w);
    if (cam.contains("near")) c.camera.near = get<double>(cam, "near", w);
    if (cam.contains("far")) c.camera.far = get<double>(cam, "far", w);
  }
  if (doc.contains("loss_weights")) {
    const json& lw = doc["loss_weights"];
    const std::string w = "config.loss_weights";
    reject_unknown(lw, {"lpips", "mask", "sem", "depth", "normal", "dev", "hole", "refine_mask", "refine_normal",
                        "collision"},
                   w);
    auto set = [&](const char* key, double& field) {
      if (lw.contains(key)) field = get<double>(lw, key, w);
    };
    set("lpips", c.weights.lpips);
    set("mask", c.weights.mask);
    set("sem", c.weights.sem);
    set("depth", c.weights.depth);
    set("normal", c.weights.normal);
    set("dev", c.weights.dev);
    set("hole", c.weights.hole);
    set("refine_mask", c.weights.refine_mask);
    set("refine_normal", c.weights.refine_normal);
    set("collision", c.weights.collision);
  }
  if (doc.contains("metrics")) {
    const json& m = doc["metrics"];
    const std::string w = "config.metrics";
    reject_unknown(m, {"samples", "iou_granularity", "tau_fraction", "chamfer_convention"}, w);
    if (m.contains("samples")) c.metrics.samples = get<std::size_t>(m, "samples", w);
    if (m.contains("iou_granularity")) c.metrics.iou_granularity = get<double>(m, "iou_granularity", w);
    if (m.contains("tau_fraction")) c.metrics.tau_fraction = get<double>(m, "tau_fraction", w);
    if (m.contains("chamfer_convention")) {
      const auto conv = get<std::string>(m, "chamfer_convention", w);
      if (conv != "squared" && conv != "unsquared")
        throw ConfigError("config.metrics.chamfer_convention: expected squared or unsquared");
      c.metrics.convention = conv == "squared" ? ChamferConvention::kSquared : ChamferConvention::kUnsquared;
    }
  }
  return c;
}

JobConfig load_job_config(const std::filesystem::path& path, JobConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    return job_config_from_json(doc, std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
}

}  // namespace semsurf::cli
