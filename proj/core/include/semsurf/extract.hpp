// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semsurf/field.hpp"
#include "semsurf/marching_cubes.hpp"
#include "semsurf/mesh.hpp"
#include "semsurf/proposal.hpp"
#include "semsurf/semantics.hpp"

namespace semsurf {

struct ExtractOptions {
  bool use_proposal = true;
  /// Defaults to default_coarse_grid(fine).
  std::optional<GridSpec> coarse;
  int kernel = kDefaultKernel;
  double sentinel = kDefaultSentinel;
  /// Step of the central-difference gradient used for vertex normals.
  double normal_step = 1e-5;
};

struct LayerResult {
  Mesh mesh;
  ProposalStats stats;
};

/// Extracts the zero level set of the equivalent SDF for a semantic set.
/// Vertex colors come from sampling the field at the vertex; vertex normals are
/// the normalized gradient of the original sdf, except at vertices where the
/// semantic term dominates, which keep the area-weighted face normal.
LayerResult extract_layer(const ImplicitScene& scene, const SemanticSet& set, const GridSpec& fine,
                          const ExtractOptions& options = {});

/// Layer name and member labels.
struct LayerDefinition {
  std::string name;
  std::vector<std::string> labels;
};

/// One layer per registry label.
std::vector<LayerDefinition> default_layer_definitions(const LabelRegistry& registry);

inline constexpr const char* kHolisticLayer = "holistic";

struct CharacterResult {
  LayeredCharacter character;
  std::vector<std::pair<std::string, ProposalStats>> stats;  // extraction order
};

/// Extracts every defined layer plus a "holistic" layer over the full label set.
/// Throws InvalidInput for an empty definition list or duplicate names.
CharacterResult extract_character(const ImplicitScene& scene, const std::vector<LayerDefinition>& layers,
                                  const GridSpec& fine, const ExtractOptions& options = {});

}  // namespace semsurf
