// SPDX-License-Identifier: Apache-2.0
#include "semsurf/extract.hpp"

#include <set>

#include "semsurf/error.hpp"
#include "semsurf/parallel.hpp"

namespace semsurf {
namespace {

Vec3 sdf_gradient(const Field& field, const Vec3& p, double h) {
  const Vec3 dx{h, 0.0, 0.0}, dy{0.0, h, 0.0}, dz{0.0, 0.0, h};
  return {(field.sdf(p + dx) - field.sdf(p - dx)) / (2.0 * h), (field.sdf(p + dy) - field.sdf(p - dy)) / (2.0 * h),
          (field.sdf(p + dz) - field.sdf(p - dz)) / (2.0 * h)};
}

// Semantic term of the set-equivalent SDF: max outside prob - max inside prob.
double semantic_term(const FieldSample& s, const SemanticSet& set) {
  double inside = 0.0, outside = 0.0;
  for (std::uint32_t r = 0; r < s.sem_probs.count; ++r) {
    if (set.contains(r)) {
      inside = std::max(inside, s.sem_probs[r]);
    } else {
      outside = std::max(outside, s.sem_probs[r]);
    }
  }
  return outside - inside;
}

void attach_attributes(Mesh& mesh, const ImplicitScene& scene, const SemanticSet& set, double normal_step) {
  const std::vector<Vec3> face_normals = area_weighted_vertex_normals(mesh);
  mesh.colors.resize(mesh.positions.size());
  mesh.normals.resize(mesh.positions.size());
  parallel_for(
      mesh.positions.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
          const Vec3& p = mesh.positions[v];
          const FieldSample s = scene.sample(p);
          mesh.colors[v] = s.color;
          const Vec3 g = normalize(sdf_gradient(scene, p, normal_step));
          const bool semantic_boundary = semantic_term(s, set) > s.sdf;
          mesh.normals[v] = (semantic_boundary || g == Vec3{}) ? face_normals[v] : g;
        }
      },
      256);
}

}  // namespace

LayerResult extract_layer(const ImplicitScene& scene, const SemanticSet& set, const GridSpec& fine,
                          const ExtractOptions& options) {
  fine.validate();
  if (set.members().back() >= scene.labels().size())
    throw InvalidInput("semantic set '" + set.name() + "' references a label outside the scene registry");
  LayerResult result;
  if (options.use_proposal) {
    const GridSpec coarse = options.coarse.value_or(default_coarse_grid(fine));
    ProposalResult proposal = propose_and_evaluate(scene, set, coarse, fine, options.kernel, options.sentinel);
    result.mesh = marching_cubes(proposal.grid);
    result.stats = proposal.stats;
  } else {
    const ScalarGrid dense = equivalent_sdf_grid(scene, fine, set);
    result.mesh = marching_cubes(dense);
    result.stats.fine_evaluations = fine.vertex_count();
    result.stats.dense_evaluations = fine.vertex_count();
    result.stats.active_vertices = fine.vertex_count();
  }
  attach_attributes(result.mesh, scene, set, options.normal_step);
  return result;
}

std::vector<LayerDefinition> default_layer_definitions(const LabelRegistry& registry) {
  std::vector<LayerDefinition> out;
  for (const auto& name : registry.names()) out.push_back({name, {name}});
  return out;
}

CharacterResult extract_character(const ImplicitScene& scene, const std::vector<LayerDefinition>& layers,
                                  const GridSpec& fine, const ExtractOptions& options) {
  if (layers.empty()) throw InvalidInput("at least one layer definition is required");
  std::set<std::string> names;
  std::vector<std::pair<std::string, SemanticSet>> sets;
  for (const auto& def : layers) {
    if (def.name.empty()) throw InvalidInput("layer names must be non-empty");
    if (def.name == kHolisticLayer) throw InvalidInput("layer name 'holistic' is reserved");
    if (!names.insert(def.name).second) throw InvalidInput("duplicate layer name '" + def.name + "'");
    sets.emplace_back(def.name, SemanticSet::from_names(def.name, def.labels, scene.labels()));
  }
  sets.emplace_back(kHolisticLayer, SemanticSet::full(scene.labels()));

  CharacterResult out;
  out.character.scene_id = scene.name();
  for (const auto& [name, set] : sets) {
    LayerResult layer = extract_layer(scene, set, fine, options);
    LayerProvenance prov;
    prov.selector = describe(Selector{set}, scene.labels());
    prov.fine = fine;
    prov.proposal = options.use_proposal;
    if (options.use_proposal) {
      prov.coarse = options.coarse.value_or(default_coarse_grid(fine));
      prov.kernel = options.kernel;
    }
    out.character.layers.emplace(name, std::move(layer.mesh));
    out.character.provenance.emplace(name, std::move(prov));
    out.character.order.push_back(name);
    out.stats.emplace_back(name, layer.stats);
  }
  return out;
}

}  // namespace semsurf
