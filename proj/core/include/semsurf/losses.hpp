// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semsurf/error.hpp"
#include "semsurf/grid.hpp"
#include "semsurf/mesh.hpp"

namespace semsurf {

/// Objective weights. lpips and dev are carried for configuration only: their
/// losses need a pretrained network or FlexiCubes internals and are not
/// implemented.
struct LossWeights {
  double lpips = 2.0;
  double mask = 1.0;
  double sem = 1.0;
  double depth = 0.5;
  double normal = 0.2;
  double dev = 0.5;
  double hole = 1e-4;
  double refine_mask = 1.0;
  double refine_normal = 1.0;
  double collision = 1.0;

  /// Throws InvalidInput for a negative weight.
  void validate() const;
};

struct ScalarLoss {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Hole-filling regularizer over every directed axis-aligned neighbor edge
/// (a, b) with f_a > 0 and f_b < 0: sum of BCE(logistic(f_a), q) with the
/// interior target q = 0, i.e. softplus(f_a). The gradient treats the edge set
/// as fixed, so only positive endpoints receive (positive) gradient.
ScalarLoss hole_loss(const ScalarGrid& grid);

enum class NearestMode {
  kVertex,   // nearest inner vertex and its normal
  kSurface,  // closest point on inner triangles and that face's normal
};

struct CollisionLoss {
  double value = 0.0;
  std::vector<Vec3> gradient;      // per outer vertex
  std::vector<double> penetration;  // max((v_j - v_i) . n_j, 0) per outer vertex
  double max_penetration = 0.0;
};

/// (1/n) sum_i max((v_j - v_i) . n_j, 0)^3 over outer vertices v_i, with v_j the
/// nearest inner element (lowest index on ties). Gradient holds the nearest
/// assignment fixed: -(3/n) max(.,0)^2 n_j. Throws InvalidInput when the inner
/// mesh has no normals or either mesh has no vertices.
CollisionLoss collision_loss(const Mesh& outer, const Mesh& inner, NearestMode mode = NearestMode::kVertex);

struct ResolveOptions {
  double step = 0.1;
  int max_iters = 500;
  double smooth_weight = 0.0;
  double tolerance = 1e-12;
  NearestMode mode = NearestMode::kVertex;
};

struct ResolveResult {
  Mesh mesh;
  int iterations = 0;           // accepted steps
  std::vector<double> trace;    // collision loss after each accepted step, starting with the input
  double max_penetration = 0.0;
};

/// Raised when ten consecutive trial steps fail to decrease the objective.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Pushes outer vertices out of the inner mesh by gradient descent on the
/// collision loss plus smooth_weight times the uniform Laplacian (edge) energy.
/// Steps are accepted only when neither the objective nor the collision loss
/// increases; the step grows after acceptance and halves after rejection.
/// The input mesh is never modified.
ResolveResult resolve_collisions(const Mesh& outer, const Mesh& inner, const ResolveOptions& options = {});

/// Mean squared difference. Throws InvalidInput on size mismatch.
double mask_loss(std::span<const double> rendered_alpha, std::span<const double> reference_mask);
/// Mean of 1 - dot(n, n_gt) over pixels with reference_mask > 0.5 (0 if none).
double normal_loss(std::span<const Vec3> rendered, std::span<const Vec3> reference,
                   std::span<const double> reference_mask);
/// Mean absolute difference over pixels with reference_mask > 0.5 (0 if none).
double depth_loss(std::span<const double> rendered, std::span<const double> reference,
                  std::span<const double> reference_mask);

inline constexpr double kCrossEntropyEpsilon = 1e-12;

/// Mean cross-entropy of alpha-normalized accumulated semantic vectors
/// (pixel-major, `labels` per pixel) against reference labels over
/// mask-positive pixels. Throws InvalidInput for out-of-range labels.
double semantic_ce_loss(std::span<const double> semantic, std::span<const double> alpha, std::size_t labels,
                        std::span<const std::uint32_t> reference_labels,
                        std::span<const double> reference_mask);

struct GradientCheck {
  std::string loss_name;
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  /// Coordinates whose perturbation changes a discrete selection.
  std::vector<std::size_t> excluded;
};

/// Central differences per grid value against hole_loss's analytic gradient.
/// Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradientCheck finite_diff_check_hole(const ScalarGrid& grid, double eps);

/// Central differences per outer coordinate (3 * vertex + axis).
GradientCheck finite_diff_check_collision(const Mesh& outer, const Mesh& inner, double eps,
                                          NearestMode mode = NearestMode::kVertex);

}  // namespace semsurf
