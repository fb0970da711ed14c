// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semsurf/grid.hpp"
#include "semsurf/semantics.hpp"
#include "semsurf/vec.hpp"

namespace semsurf {

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh. normals and colors are either empty or one per vertex.
struct Mesh {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<Rgb> colors;
  std::vector<Triangle> triangles;

  bool empty() const { return triangles.empty(); }
  bool has_normals() const { return !positions.empty() && normals.size() == positions.size(); }
  bool has_colors() const { return !positions.empty() && colors.size() == positions.size(); }

  /// Throws InvalidInput on out-of-range indices, non-finite coordinates or
  /// attribute arrays of the wrong length.
  void validate() const;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Unnormalized face normal (twice the area vector).
Vec3 face_area_vector(const Mesh& mesh, const Triangle& t);
double triangle_area(const Mesh& mesh, const Triangle& t);
double surface_area(const Mesh& mesh);

/// Area-weighted average of incident face normals, normalized.
std::vector<Vec3> area_weighted_vertex_normals(const Mesh& mesh);

struct Aabb {
  Vec3 min;
  Vec3 max;
  Vec3 extent() const { return max - min; }
  double max_extent() const;
  double diagonal() const { return length(extent()); }
};
/// Throws InvalidInput for a mesh without vertices.
Aabb bounding_box(const Mesh& mesh);
Aabb merge(const Aabb& a, const Aabb& b);

/// Connected components over shared vertices; component ids are numbered by
/// the lowest triangle index they contain. Returns one id per triangle.
std::vector<std::uint32_t> triangle_components(const Mesh& mesh, std::size_t* component_count = nullptr);

/// Copies the triangles with the given component id; vertices are compacted.
Mesh extract_component(const Mesh& mesh, const std::vector<std::uint32_t>& components,
                       std::uint32_t id);

/// True when every undirected edge is shared by exactly two triangles.
bool is_closed(const Mesh& mesh);

/// Sorted x coordinates where the line {(t, y, z)} crosses the mesh. Shared
/// edges and vertices are counted once via a top-left rule in the yz plane.
std::vector<double> ray_crossings_x(const Mesh& mesh, double y, double z);

/// Parity ray test along +x; meaningful for closed meshes.
bool contains_point(const Mesh& mesh, const Vec3& p);

/// Triangle soup from a uniformly subdivided icosahedron; used for demo collision
/// pairs and metric oracles. Normals point outward.
Mesh make_icosphere(const Vec3& center, double radius, int subdivisions);
/// Axis-aligned box with outward normals, two triangles per face.
Mesh make_box(const Vec3& min, const Vec3& max);

/// Per-layer meshes of one character plus how each was produced.
struct LayerProvenance {
  std::string selector;
  GridSpec fine;
  bool proposal = false;
  GridSpec coarse;
  int kernel = 0;
};

struct LayeredCharacter {
  std::string scene_id;
  std::map<std::string, Mesh> layers;
  std::map<std::string, LayerProvenance> provenance;
  /// Layer names in extraction order.
  std::vector<std::string> order;
};

}  // namespace semsurf
