// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "semsurf/field.hpp"

namespace semsurf {

inline constexpr int kSceneSchemaVersion = 1;

/// Parses a scene description. Throws InvalidInput with the offending key on
/// schema violations. See docs/scene_format.md for the schema.
ImplicitScene scene_from_json(const nlohmann::json& doc);
nlohmann::json scene_to_json(const ImplicitScene& scene);

/// Throws IoError (with path) when the file cannot be read.
ImplicitScene load_scene(const std::filesystem::path& path);
void save_scene(const ImplicitScene& scene, const std::filesystem::path& path);

/// Names of the shipped demo scenes: "nested-character" and "two-spheres".
std::vector<std::string> demo_scene_names();
/// Throws InvalidInput for unknown names.
ImplicitScene demo_scene(std::string_view name);

}  // namespace semsurf
