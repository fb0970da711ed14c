// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "semsurf/grid.hpp"
#include "semsurf/vec.hpp"

namespace semsurf {

inline constexpr std::size_t kMaxLabels = 16;

/// Ordered set of semantic label names; a label's id is its position.
class LabelRegistry {
 public:
  LabelRegistry() = default;
  /// Throws InvalidInput on empty, duplicate or too many names.
  explicit LabelRegistry(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::uint32_t> find(const std::string& name) const;
  /// Throws InvalidInput naming the label when it is not registered.
  std::uint32_t id(const std::string& name) const;

 private:
  std::vector<std::string> names_;
};

/// Fixed-capacity probability vector over the registry labels.
struct ProbVector {
  std::array<double, kMaxLabels> values{};
  std::uint32_t count = 0;

  std::span<const double> span() const { return {values.data(), count}; }
  std::span<double> span() { return {values.data(), count}; }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// Joint field value at a point.
struct FieldSample {
  double sdf = 0.0;      // negative inside
  double density = 0.0;  // >= 0, per scene unit
  Rgb color;             // channels in [0, 1]
  ProbVector sem_probs;  // on the simplex
};

struct Sphere {
  double radius;
};
/// Axis-aligned (in local frame) box given by its half extents.
struct Box {
  Vec3 half_extents;
};
/// Segment from (0,0,-half_length) to (0,0,half_length) swept by radius.
struct Capsule {
  double radius;
  double half_length;
};
/// Ring in the local xy plane.
struct Torus {
  double major_radius;
  double minor_radius;
};

using Shape = std::variant<Sphere, Box, Capsule, Torus>;

/// Exact signed distance of a shape at a point in its local frame.
double shape_distance(const Shape& shape, const Vec3& local);
const char* shape_name(const Shape& shape);

/// Keeps the local half-space dot(normal, p) >= offset.
struct ClipPlane {
  Vec3 normal{0.0, 0.0, 1.0};
  double offset = 0.0;
};

struct Primitive {
  Shape shape = Sphere{0.5};
  Vec3 center;
  Mat3 rotation;
  std::uint32_t label = 0;
  Rgb color{1.0, 1.0, 1.0};
  /// Hollows the shape into a shell of this total thickness around its surface.
  std::optional<double> shell_thickness;
  std::optional<ClipPlane> clip;

  Vec3 to_local(const Vec3& world) const { return rotation.transpose_mul(world - center); }
  double distance(const Vec3& world) const;
};

/// Anything that can be sampled for the joint (sdf, density, color, semantics) value.
class Field {
 public:
  virtual ~Field() = default;
  virtual FieldSample sample(const Vec3& x) const = 0;
  /// Signed distance only; defaults to sample(x).sdf.
  virtual double sdf(const Vec3& x) const { return sample(x).sdf; }
  virtual std::size_t label_count() const = 0;
};

struct SceneParams {
  double beta_sem = 0.05;
  double beta_den = 0.02;
  double sigma_max = 50.0;
};

/// Composition of labeled analytic primitives.
///
/// sdf is the minimum primitive distance; semantic probabilities are the
/// per-label sums of softmax(-d_i / beta_sem) over primitives; color is the
/// color of the nearest primitive (lowest list index on ties); density is
/// sigma_max * logistic(-sdf / beta_den). Evaluation is pure and thread-safe.
class ImplicitScene final : public Field {
 public:
  /// Throws InvalidInput when an invariant does not hold.
  ImplicitScene(LabelRegistry labels, std::vector<Primitive> primitives, SceneParams params = {},
                std::optional<GridSpec> default_grid = std::nullopt, std::string name = {});

  FieldSample sample(const Vec3& x) const override;
  double sdf(const Vec3& x) const override;
  std::size_t label_count() const override { return labels_.size(); }

  const LabelRegistry& labels() const { return labels_; }
  const std::vector<Primitive>& primitives() const { return primitives_; }
  const SceneParams& params() const { return params_; }
  const std::string& name() const { return name_; }
  /// Bounds/resolution shipped with the scene description, if any.
  const std::optional<GridSpec>& default_grid() const { return default_grid_; }

 private:
  LabelRegistry labels_;
  std::vector<Primitive> primitives_;
  SceneParams params_;
  std::optional<GridSpec> default_grid_;
  std::string name_;
};

/// sigma_max * logistic(-sdf / beta_den), evaluated without overflow.
double density_from_sdf(double sdf, double sigma_max, double beta_den);

inline constexpr std::size_t kDefaultSampleBudgetBytes = std::size_t{1} << 30;

/// Field samples at every vertex of a grid, in vertex index order.
struct SampleGrid {
  GridSpec spec;
  std::vector<FieldSample> samples;
};

/// Samples the field at every grid vertex. Throws ResourceError if the result
/// would exceed budget_bytes.
SampleGrid sample_grid_dense(const Field& field, const GridSpec& grid,
                             std::size_t budget_bytes = kDefaultSampleBudgetBytes);

/// Field backed by a sample grid, interpolated trilinearly in every channel.
/// Semantic probabilities are renormalized after interpolation.
class GridField final : public Field {
 public:
  explicit GridField(SampleGrid grid);

  /// Throws OutOfDomain outside the grid bounds.
  FieldSample sample(const Vec3& x) const override;
  std::size_t label_count() const override { return labels_; }
  const SampleGrid& grid() const { return grid_; }

 private:
  SampleGrid grid_;
  std::size_t labels_;
};

}  // namespace semsurf
