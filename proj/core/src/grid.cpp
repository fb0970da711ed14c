// SPDX-License-Identifier: Apache-2.0
#include "semsurf/grid.hpp"

#include <cmath>
#include <string>

#include "semsurf/error.hpp"

namespace semsurf {

Mat3 rotation_from_euler_degrees(const Vec3& degrees) {
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  const double cx = std::cos(degrees.x * kDegToRad), sx = std::sin(degrees.x * kDegToRad);
  const double cy = std::cos(degrees.y * kDegToRad), sy = std::sin(degrees.y * kDegToRad);
  const double cz = std::cos(degrees.z * kDegToRad), sz = std::sin(degrees.z * kDegToRad);
  const Mat3 rx{{1, 0, 0, 0, cx, -sx, 0, sx, cx}};
  const Mat3 ry{{cy, 0, sy, 0, 1, 0, -sy, 0, cy}};
  const Mat3 rz{{cz, -sz, 0, sz, cz, 0, 0, 0, 1}};
  return rz * ry * rx;
}

void GridSpec::validate() const {
  static constexpr const char* kAxis[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    if (resolution[a] < 2) {
      throw InvalidInput(std::string("grid resolution along ") + kAxis[a] + " must be >= 2, got " +
                         std::to_string(resolution[a]));
    }
    if (!std::isfinite(min[a]) || !std::isfinite(max[a]) || !(min[a] < max[a])) {
      throw InvalidInput(std::string("grid bounds along ") + kAxis[a] + " must satisfy min < max");
    }
  }
}

Vec3 GridSpec::spacing() const {
  return {(max.x - min.x) / static_cast<double>(resolution[0] - 1),
          (max.y - min.y) / static_cast<double>(resolution[1] - 1),
          (max.z - min.z) / static_cast<double>(resolution[2] - 1)};
}

Vec3 GridSpec::vertex_position(std::size_t i, std::size_t j, std::size_t k) const {
  // Interpolate from both ends so the last vertex lands exactly on max.
  auto coord = [](double lo, double hi, std::size_t idx, std::size_t n) {
    const double t = static_cast<double>(idx) / static_cast<double>(n - 1);
    return idx + 1 == n ? hi : lo + (hi - lo) * t;
  };
  return {coord(min.x, max.x, i, resolution[0]), coord(min.y, max.y, j, resolution[1]),
          coord(min.z, max.z, k, resolution[2])};
}

bool GridSpec::contains(const Vec3& p) const {
  return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
}

}  // namespace semsurf
