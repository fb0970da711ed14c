// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semsurf/mesh.hpp"

namespace semsurf {

/// Wavefront OBJ text. Positions use shortest round-trip decimal formatting;
/// vertex colors follow each "v" line as a "#vc r g b" comment; faces reference
/// normals as "f a//a b//b c//c" when normals are present.
std::string to_obj(const Mesh& mesh);
Mesh parse_obj(const std::string& text);

/// Binary little-endian PLY: float x y z [nx ny nz], uchar red green blue
/// (when colors are present), and uchar-counted int vertex_indices.
std::string to_ply(const Mesh& mesh);
Mesh parse_ply(const std::string& bytes);

void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Reads .obj or .ply by extension.
Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

/// Writes <dir>/<stem>_<layer>.obj and .ply for every layer; returns the paths.
std::vector<std::filesystem::path> export_character(const LayeredCharacter& character,
                                                    const std::filesystem::path& dir,
                                                    const std::string& stem);

/// Loads <stem>_<layer>.ply (or .obj) files from a directory, keyed by layer.
LayeredCharacter load_character(const std::filesystem::path& dir);

}  // namespace semsurf
