// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "semsurf/grid.hpp"
#include "semsurf/mesh.hpp"
#include "semsurf/proposal.hpp"

namespace semsurf {

struct McOptions {
  double iso = 0.0;
  /// Optional per-vertex displacement (one per grid vertex), at most half the
  /// smallest spacing in length, applied to lattice positions before edge
  /// interpolation.
  std::span<const Vec3> deformation;
};

/// Table-driven marching cubes. A vertex is inside when its value is below
/// iso. Surface vertices are linearly interpolated along sign-change edges and
/// deduplicated by exact (grid vertex, axis) keys; a crossing that lands exactly
/// on a lattice vertex is keyed by that lattice vertex. Vertices are numbered by
/// first use, scanning cells in index order. Zero-area triangles are dropped.
/// Triangles wind counter-clockwise seen from the positive side.
/// Output carries positions and triangles only.
Mesh marching_cubes(const ScalarGrid& grid, const McOptions& options = {});

/// Same extraction over a sparse grid; inactive vertices read as the sentinel.
Mesh marching_cubes(const SparseScalarGrid& grid, const McOptions& options = {});

}  // namespace semsurf
