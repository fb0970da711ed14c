// SPDX-License-Identifier: Apache-2.0
#include "semsurf/scene_io.hpp"

#include <fstream>
#include <sstream>

#include "semsurf/error.hpp"

namespace semsurf {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw InvalidInput(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InvalidInput(where + ": expected a number");
  return v.get<double>();
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw InvalidInput(where + ": expected an array of 3 numbers");
  return {number(v[0], where), number(v[1], where), number(v[2], where)};
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

GridSpec grid_from_json(const json& g, const std::string& where) {
  GridSpec spec;
  const json& res = require(g, "resolution", where);
  if (!res.is_array() || res.size() != 3) throw InvalidInput(where + ".resolution: expected 3 integers");
  for (int a = 0; a < 3; ++a) {
    if (!res[a].is_number_integer() || res[a].get<long long>() < 2)
      throw InvalidInput(where + ".resolution: entries must be integers >= 2");
    spec.resolution[a] = res[a].get<std::size_t>();
  }
  spec.min = vec3(require(g, "min", where), where + ".min");
  spec.max = vec3(require(g, "max", where), where + ".max");
  try {
    spec.validate();
  } catch (const InvalidInput& e) {
    throw InvalidInput(where + ": " + e.what());
  }
  return spec;
}

Primitive primitive_from_json(const json& p, const LabelRegistry& labels, const std::string& where) {
  Primitive prim;
  const json& shape = require(p, "shape", where);
  if (!shape.is_string()) throw InvalidInput(where + ".shape: expected a string");
  const std::string kind = shape.get<std::string>();
  if (kind == "sphere") {
    prim.shape = Sphere{number(require(p, "radius", where), where + ".radius")};
  } else if (kind == "box") {
    prim.shape = Box{vec3(require(p, "half_extents", where), where + ".half_extents")};
  } else if (kind == "capsule") {
    prim.shape = Capsule{number(require(p, "radius", where), where + ".radius"),
                         number(require(p, "half_length", where), where + ".half_length")};
  } else if (kind == "torus") {
    prim.shape = Torus{number(require(p, "major_radius", where), where + ".major_radius"),
                       number(require(p, "minor_radius", where), where + ".minor_radius")};
  } else {
    throw InvalidInput(where + ".shape: unknown shape '" + kind + "'");
  }
  prim.center = vec3(require(p, "center", where), where + ".center");
  if (p.contains("rotation_deg")) {
    prim.rotation = rotation_from_euler_degrees(vec3(p["rotation_deg"], where + ".rotation_deg"));
  } else if (p.contains("rotation_matrix")) {
    const json& m = p["rotation_matrix"];
    if (!m.is_array() || m.size() != 9) throw InvalidInput(where + ".rotation_matrix: expected 9 numbers");
    for (int i = 0; i < 9; ++i) prim.rotation.m[i] = number(m[i], where + ".rotation_matrix");
  }
  const json& label = require(p, "label", where);
  if (!label.is_string()) throw InvalidInput(where + ".label: expected a label name");
  prim.label = labels.id(label.get<std::string>());
  if (p.contains("color")) {
    const Vec3 c = vec3(p["color"], where + ".color");
    prim.color = {c.x, c.y, c.z};
  }
  if (p.contains("shell_thickness")) prim.shell_thickness = number(p["shell_thickness"], where + ".shell_thickness");
  if (p.contains("clip")) {
    const json& c = p["clip"];
    prim.clip = ClipPlane{vec3(require(c, "normal", where + ".clip"), where + ".clip.normal"),
                          number(require(c, "offset", where + ".clip"), where + ".clip.offset")};
  }
  return prim;
}

}  // namespace

ImplicitScene scene_from_json(const json& doc) {
  const std::string where = "scene";
  if (!doc.is_object()) throw InvalidInput("scene: expected a JSON object");
  if (doc.contains("schema_version")) {
    const json& v = doc["schema_version"];
    if (!v.is_number_integer() || v.get<int>() != kSceneSchemaVersion)
      throw InvalidInput("scene: unsupported schema_version (expected " + std::to_string(kSceneSchemaVersion) + ")");
  }
  const json& label_list = require(doc, "labels", where);
  if (!label_list.is_array()) throw InvalidInput("scene.labels: expected an array of names");
  std::vector<std::string> names;
  for (const auto& l : label_list) {
    if (!l.is_string()) throw InvalidInput("scene.labels: expected an array of names");
    names.push_back(l.get<std::string>());
  }
  LabelRegistry labels(std::move(names));

  SceneParams params;
  if (doc.contains("beta_sem")) params.beta_sem = number(doc["beta_sem"], "scene.beta_sem");
  if (doc.contains("beta_den")) params.beta_den = number(doc["beta_den"], "scene.beta_den");
  if (doc.contains("sigma_max")) params.sigma_max = number(doc["sigma_max"], "scene.sigma_max");

  const json& prims = require(doc, "primitives", where);
  if (!prims.is_array()) throw InvalidInput("scene.primitives: expected an array");
  std::vector<Primitive> primitives;
  for (std::size_t i = 0; i < prims.size(); ++i)
    primitives.push_back(primitive_from_json(prims[i], labels, "scene.primitives[" + std::to_string(i) + "]"));

  std::optional<GridSpec> grid;
  if (doc.contains("grid")) grid = grid_from_json(doc["grid"], "scene.grid");
  std::string name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "";
  return ImplicitScene(std::move(labels), std::move(primitives), params, grid, std::move(name));
}

json scene_to_json(const ImplicitScene& scene) {
  json doc;
  doc["schema_version"] = kSceneSchemaVersion;
  doc["name"] = scene.name();
  doc["labels"] = scene.labels().names();
  doc["beta_sem"] = scene.params().beta_sem;
  doc["beta_den"] = scene.params().beta_den;
  doc["sigma_max"] = scene.params().sigma_max;
  if (const auto& g = scene.default_grid()) {
    doc["grid"] = {{"resolution", g->resolution}, {"min", to_json(g->min)}, {"max", to_json(g->max)}};
  }
  json prims = json::array();
  for (const auto& p : scene.primitives()) {
    json j;
    j["shape"] = shape_name(p.shape);
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Sphere>) j["radius"] = s.radius;
          if constexpr (std::is_same_v<T, Box>) j["half_extents"] = to_json(s.half_extents);
          if constexpr (std::is_same_v<T, Capsule>) {
            j["radius"] = s.radius;
            j["half_length"] = s.half_length;
          }
          if constexpr (std::is_same_v<T, Torus>) {
            j["major_radius"] = s.major_radius;
            j["minor_radius"] = s.minor_radius;
          }
        },
        p.shape);
    j["center"] = to_json(p.center);
    if (p.rotation.m != Mat3{}.m) j["rotation_matrix"] = p.rotation.m;
    j["label"] = scene.labels().name(p.label);
    j["color"] = json::array({p.color.r, p.color.g, p.color.b});
    if (p.shell_thickness) j["shell_thickness"] = *p.shell_thickness;
    if (p.clip) j["clip"] = {{"normal", to_json(p.clip->normal)}, {"offset", p.clip->offset}};
    prims.push_back(std::move(j));
  }
  doc["primitives"] = std::move(prims);
  return doc;
}

ImplicitScene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("scene file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    return scene_from_json(doc);
  } catch (const InvalidInput& e) {
    throw InvalidInput("scene file '" + path.string() + "': " + e.what());
  }
}

void save_scene(const ImplicitScene& scene, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scene file '" + path.string() + "'");
  out << scene_to_json(scene).dump(2) << '\n';
  if (!out) throw IoError("failed writing scene file '" + path.string() + "'");
}

namespace {

constexpr const char* kNestedCharacter = R"json({
  "schema_version": 1,
  "name": "nested-character",
  "labels": ["body", "cloth", "hair"],
  "beta_sem": 0.05,
  "beta_den": 0.02,
  "sigma_max": 50.0,
  "grid": {"resolution": [256, 256, 384], "min": [-0.5, -0.5, -0.75], "max": [0.5, 0.5, 0.75]},
  "primitives": [
    {"shape": "sphere", "radius": 0.30, "center": [0, 0, 0], "label": "body", "color": [0.96, 0.80, 0.69]},
    {"shape": "sphere", "radius": 0.37, "shell_thickness": 0.06, "center": [0, 0, 0], "label": "cloth",
     "color": [0.20, 0.35, 0.80]},
    {"shape": "sphere", "radius": 0.48, "shell_thickness": 0.06, "center": [0, 0, 0], "label": "hair",
     "color": [0.35, 0.20, 0.10], "clip": {"normal": [0, 0, 1], "offset": 0.25}}
  ]
})json";

constexpr const char* kTwoSpheres = R"json({
  "schema_version": 1,
  "name": "two-spheres",
  "labels": ["body", "cloth", "hair"],
  "beta_sem": 0.05,
  "beta_den": 0.02,
  "sigma_max": 50.0,
  "grid": {"resolution": [256, 256, 384], "min": [-0.5, -0.5, -0.75], "max": [0.5, 0.5, 0.75]},
  "primitives": [
    {"shape": "sphere", "radius": 0.25, "center": [-0.15, 0, 0], "label": "body", "color": [0.90, 0.20, 0.20]},
    {"shape": "sphere", "radius": 0.25, "center": [0.15, 0, 0], "label": "cloth", "color": [0.20, 0.40, 0.90]}
  ]
})json";

}  // namespace

std::vector<std::string> demo_scene_names() { return {"nested-character", "two-spheres"}; }

ImplicitScene demo_scene(std::string_view name) {
  if (name == "nested-character") return scene_from_json(json::parse(kNestedCharacter));
  if (name == "two-spheres") return scene_from_json(json::parse(kTwoSpheres));
  throw InvalidInput("unknown demo scene '" + std::string(name) + "'");
}

}  // namespace semsurf
