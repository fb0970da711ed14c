// SPDX-License-Identifier: Apache-2.0
#include "semsurf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "semsurf/error.hpp"

namespace semsurf {

void Mesh::validate() const {
  if (!normals.empty() && normals.size() != positions.size())
    throw InvalidInput("mesh normal count does not match vertex count");
  if (!colors.empty() && colors.size() != positions.size())
    throw InvalidInput("mesh color count does not match vertex count");
  for (const auto& p : positions) {
    if (!is_finite(p)) throw InvalidInput("mesh has a non-finite vertex coordinate");
  }
  for (const auto& t : triangles) {
    for (auto i : t) {
      if (i >= positions.size()) throw InvalidInput("mesh triangle index out of range");
    }
  }
}

Vec3 face_area_vector(const Mesh& mesh, const Triangle& t) {
  const Vec3& a = mesh.positions[t[0]];
  return cross(mesh.positions[t[1]] - a, mesh.positions[t[2]] - a);
}

double triangle_area(const Mesh& mesh, const Triangle& t) { return 0.5 * length(face_area_vector(mesh, t)); }

double surface_area(const Mesh& mesh) {
  double total = 0.0;
  for (const auto& t : mesh.triangles) total += triangle_area(mesh, t);
  return total;
}

std::vector<Vec3> area_weighted_vertex_normals(const Mesh& mesh) {
  std::vector<Vec3> normals(mesh.positions.size());
  for (const auto& t : mesh.triangles) {
    const Vec3 n = face_area_vector(mesh, t);
    for (auto i : t) normals[i] += n;
  }
  for (auto& n : normals) n = normalize(n);
  return normals;
}

double Aabb::max_extent() const {
  const Vec3 e = extent();
  return std::max(e.x, std::max(e.y, e.z));
}

Aabb bounding_box(const Mesh& mesh) {
  if (mesh.positions.empty()) throw InvalidInput("bounding box of a mesh without vertices");
  Aabb box{mesh.positions.front(), mesh.positions.front()};
  for (const auto& p : mesh.positions) {
    box.min = min(box.min, p);
    box.max = max(box.max, p);
  }
  return box;
}

Aabb merge(const Aabb& a, const Aabb& b) { return {min(a.min, b.min), max(a.max, b.max)}; }

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::uint32_t> parent;
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t{a} << 32) | b;
}

}  // namespace

std::vector<std::uint32_t> triangle_components(const Mesh& mesh, std::size_t* component_count) {
  DisjointSets sets(mesh.positions.size());
  for (const auto& t : mesh.triangles) {
    sets.unite(t[0], t[1]);
    sets.unite(t[1], t[2]);
  }
  std::unordered_map<std::uint32_t, std::uint32_t> ids;
  std::vector<std::uint32_t> out(mesh.triangles.size());
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const std::uint32_t root = sets.find(mesh.triangles[i][0]);
    auto [it, inserted] = ids.try_emplace(root, static_cast<std::uint32_t>(ids.size()));
    out[i] = it->second;
  }
  if (component_count) *component_count = ids.size();
  return out;
}

Mesh extract_component(const Mesh& mesh, const std::vector<std::uint32_t>& components, std::uint32_t id) {
  Mesh out;
  std::vector<std::uint32_t> remap(mesh.positions.size(), std::numeric_limits<std::uint32_t>::max());
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    if (components[i] != id) continue;
    Triangle t = mesh.triangles[i];
    for (auto& v : t) {
      if (remap[v] == std::numeric_limits<std::uint32_t>::max()) {
        remap[v] = static_cast<std::uint32_t>(out.positions.size());
        out.positions.push_back(mesh.positions[v]);
        if (mesh.has_normals()) out.normals.push_back(mesh.normals[v]);
        if (mesh.has_colors()) out.colors.push_back(mesh.colors[v]);
      }
      v = remap[v];
    }
    out.triangles.push_back(t);
  }
  return out;
}

bool is_closed(const Mesh& mesh) {
  if (mesh.triangles.empty()) return false;
  std::vector<std::uint64_t> edges;
  edges.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    edges.push_back(edge_key(t[0], t[1]));
    edges.push_back(edge_key(t[1], t[2]));
    edges.push_back(edge_key(t[2], t[0]));
  }
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i < edges.size();) {
    std::size_t j = i;
    while (j < edges.size() && edges[j] == edges[i]) ++j;
    if (j - i != 2) return false;
    i = j;
  }
  return true;
}

namespace {

// Signed parallelogram area of (b - a, q - a) in the yz plane.
double edge_function(const Vec3& a, const Vec3& b, double qy, double qz) {
  // Evaluated from a canonical endpoint so that a shared edge seen from either
  // triangle gives exactly opposite values.
  const bool flip = b.y < a.y || (b.y == a.y && b.z < a.z);
  const Vec3& p = flip ? b : a;
  const Vec3& q = flip ? a : b;
  const double w = (q.y - p.y) * (qz - p.z) - (q.z - p.z) * (qy - p.y);
  return flip ? -w : w;
}

// Top-left fill convention for a counter-clockwise triangle in (y, z).
bool top_left(const Vec3& a, const Vec3& b) { return b.z < a.z || (b.z == a.z && b.y < a.y); }

bool covers(const Vec3& a, const Vec3& b, double w) { return w > 0.0 || (w == 0.0 && top_left(a, b)); }

}  // namespace

std::vector<double> ray_crossings_x(const Mesh& mesh, double y, double z) {
  std::vector<double> xs;
  for (const auto& t : mesh.triangles) {
    Vec3 a = mesh.positions[t[0]];
    Vec3 b = mesh.positions[t[1]];
    Vec3 c = mesh.positions[t[2]];
    double area = edge_function(a, b, c.y, c.z);
    if (area == 0.0) continue;  // parallel to the ray
    if (area < 0.0) {
      std::swap(b, c);
      area = -area;
    }
    const double w0 = edge_function(b, c, y, z);
    const double w1 = edge_function(c, a, y, z);
    const double w2 = edge_function(a, b, y, z);
    if (!covers(b, c, w0) || !covers(c, a, w1) || !covers(a, b, w2)) continue;
    xs.push_back((w0 * a.x + w1 * b.x + w2 * c.x) / area);
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

bool contains_point(const Mesh& mesh, const Vec3& p) {
  const auto xs = ray_crossings_x(mesh, p.y, p.z);
  const auto above = xs.end() - std::upper_bound(xs.begin(), xs.end(), p.x);
  return above % 2 == 1;
}

Mesh make_icosphere(const Vec3& center, double radius, int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> unit = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                            {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                            {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : unit) v = normalize(v);
  std::vector<Triangle> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::unordered_map<std::uint64_t, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      auto [it, inserted] = midpoints.try_emplace(edge_key(a, b), 0u);
      if (inserted) {
        it->second = static_cast<std::uint32_t>(unit.size());
        unit.push_back(normalize(unit[a] + unit[b]));
      }
      return it->second;
    };
    std::vector<Triangle> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const auto ab = midpoint(f[0], f[1]);
      const auto bc = midpoint(f[1], f[2]);
      const auto ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  Mesh mesh;
  mesh.triangles = std::move(faces);
  mesh.positions.reserve(unit.size());
  mesh.normals = unit;
  for (const auto& u : unit) mesh.positions.push_back(center + u * radius);
  return mesh;
}

Mesh make_box(const Vec3& lo, const Vec3& hi) {
  Mesh mesh;
  for (int c = 0; c < 8; ++c) {
    mesh.positions.push_back({(c & 1) ? hi.x : lo.x, (c & 2) ? hi.y : lo.y, (c & 4) ? hi.z : lo.z});
  }
  // two outward (counter-clockwise) triangles per face
  mesh.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                    {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  const Vec3 center = (lo + hi) * 0.5;
  for (const auto& p : mesh.positions) mesh.normals.push_back(normalize(p - center));
  return mesh;
}

}  // namespace semsurf
