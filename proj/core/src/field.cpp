// SPDX-License-Identifier: Apache-2.0
#include "semsurf/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "semsurf/error.hpp"
#include "semsurf/parallel.hpp"

namespace semsurf {

// --- labels ---------------------------------------------------------------

LabelRegistry::LabelRegistry(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw InvalidInput("label registry must not be empty");
  if (names_.size() > kMaxLabels) {
    throw InvalidInput("label registry holds at most " + std::to_string(kMaxLabels) + " labels");
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw InvalidInput("label names must be non-empty");
    if (!seen.insert(n).second) throw InvalidInput("duplicate label name '" + n + "'");
  }
}

std::optional<std::uint32_t> LabelRegistry::find(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - names_.begin());
}

std::uint32_t LabelRegistry::id(const std::string& name) const {
  if (auto found = find(name)) return *found;
  throw InvalidInput("unknown semantic label '" + name + "'");
}

// --- shapes ---------------------------------------------------------------

namespace {

double distance_to(const Sphere& s, const Vec3& p) { return length(p) - s.radius; }

double distance_to(const Box& b, const Vec3& p) {
  const Vec3 q{std::abs(p.x) - b.half_extents.x, std::abs(p.y) - b.half_extents.y,
               std::abs(p.z) - b.half_extents.z};
  const double outside = length(max(q, Vec3{}));
  const double inside = std::min(std::max(q.x, std::max(q.y, q.z)), 0.0);
  return outside + inside;
}

double distance_to(const Capsule& c, const Vec3& p) {
  const double z = std::clamp(p.z, -c.half_length, c.half_length);
  return length(Vec3{p.x, p.y, p.z - z}) - c.radius;
}

double distance_to(const Torus& t, const Vec3& p) {
  const double ring = std::hypot(p.x, p.y) - t.major_radius;
  return std::hypot(ring, p.z) - t.minor_radius;
}

bool positive_params(const Shape& shape) {
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) return s.radius > 0.0;
        if constexpr (std::is_same_v<T, Box>)
          return s.half_extents.x > 0.0 && s.half_extents.y > 0.0 && s.half_extents.z > 0.0;
        if constexpr (std::is_same_v<T, Capsule>) return s.radius > 0.0 && s.half_length > 0.0;
        if constexpr (std::is_same_v<T, Torus>) return s.major_radius > 0.0 && s.minor_radius > 0.0;
      },
      shape);
}

}  // namespace

double shape_distance(const Shape& shape, const Vec3& local) {
  return std::visit([&](const auto& s) { return distance_to(s, local); }, shape);
}

const char* shape_name(const Shape& shape) {
  static constexpr const char* kNames[] = {"sphere", "box", "capsule", "torus"};
  return kNames[shape.index()];
}

double Primitive::distance(const Vec3& world) const {
  const Vec3 p = to_local(world);
  double d = shape_distance(shape, p);
  if (shell_thickness) d = std::abs(d) - 0.5 * *shell_thickness;
  if (clip) d = std::max(d, clip->offset - dot(clip->normal, p));
  return d;
}

// --- scene ----------------------------------------------------------------

double density_from_sdf(double sdf, double sigma_max, double beta_den) {
  const double z = -sdf / beta_den;
  const double logistic = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return sigma_max * logistic;
}

ImplicitScene::ImplicitScene(LabelRegistry labels, std::vector<Primitive> primitives, SceneParams params,
                             std::optional<GridSpec> default_grid, std::string name)
    : labels_(std::move(labels)),
      primitives_(std::move(primitives)),
      params_(params),
      default_grid_(std::move(default_grid)),
      name_(std::move(name)) {
  if (labels_.size() == 0) throw InvalidInput("scene needs at least one label");
  if (primitives_.empty()) throw InvalidInput("scene needs at least one primitive");
  if (!(params_.beta_sem > 0.0) || !std::isfinite(params_.beta_sem))
    throw InvalidInput("beta_sem must be a positive finite number");
  if (!(params_.beta_den > 0.0) || !std::isfinite(params_.beta_den))
    throw InvalidInput("beta_den must be a positive finite number");
  if (!(params_.sigma_max >= 0.0) || !std::isfinite(params_.sigma_max))
    throw InvalidInput("sigma_max must be a non-negative finite number");
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    const auto& p = primitives_[i];
    const std::string where = "primitive " + std::to_string(i) + " (" + shape_name(p.shape) + ")";
    if (!positive_params(p.shape)) throw InvalidInput(where + ": shape parameters must be > 0");
    if (p.label >= labels_.size()) throw InvalidInput(where + ": label id out of range");
    if (p.shell_thickness && !(*p.shell_thickness > 0.0))
      throw InvalidInput(where + ": shell thickness must be > 0");
    if (p.clip) {
      const double n = length(p.clip->normal);
      if (!(n > 0.0)) throw InvalidInput(where + ": clip normal must be non-zero");
      primitives_[i].clip->normal = p.clip->normal / n;
    }
    for (double c : {p.color.r, p.color.g, p.color.b}) {
      if (!(c >= 0.0 && c <= 1.0)) throw InvalidInput(where + ": color channels must lie in [0, 1]");
    }
    if (!is_finite(p.center)) throw InvalidInput(where + ": center must be finite");
  }
  if (default_grid_) default_grid_->validate();
}

double ImplicitScene::sdf(const Vec3& x) const {
  if (!is_finite(x)) throw InvalidInput("field query point must be finite");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : primitives_) best = std::min(best, p.distance(x));
  return best;
}

FieldSample ImplicitScene::sample(const Vec3& x) const {
  if (!is_finite(x)) throw InvalidInput("field query point must be finite");
  constexpr std::size_t kInline = 64;
  std::array<double, kInline> inline_d;
  std::vector<double> heap_d;
  double* d = inline_d.data();
  if (primitives_.size() > kInline) {
    heap_d.resize(primitives_.size());
    d = heap_d.data();
  }

  FieldSample out;
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    d[i] = primitives_[i].distance(x);
    if (d[i] < best) {  // strict: lowest index wins ties
      best = d[i];
      nearest = i;
    }
  }
  out.sdf = best;
  out.color = primitives_[nearest].color;
  out.density = density_from_sdf(best, params_.sigma_max, params_.beta_den);

  // softmax(-d / beta) shifted by the maximum logit, summed per label
  out.sem_probs.count = static_cast<std::uint32_t>(labels_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    const double w = std::exp((best - d[i]) / params_.beta_sem);
    out.sem_probs[primitives_[i].label] += w;
    total += w;
  }
  for (std::size_t l = 0; l < labels_.size(); ++l) out.sem_probs[l] /= total;
  return out;
}

// --- grids ----------------------------------------------------------------

SampleGrid sample_grid_dense(const Field& field, const GridSpec& grid, std::size_t budget_bytes) {
  grid.validate();
  const std::size_t n = grid.vertex_count();
  if (n > budget_bytes / sizeof(FieldSample)) {
    throw ResourceError("dense sample grid of " + std::to_string(n) + " vertices needs " +
                        std::to_string(n * sizeof(FieldSample)) + " bytes, over the memory budget of " +
                        std::to_string(budget_bytes) + " bytes");
  }
  SampleGrid out{grid, std::vector<FieldSample>(n)};
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) out.samples[v] = field.sample(grid.vertex_position(v));
  });
  return out;
}

GridField::GridField(SampleGrid grid) : grid_(std::move(grid)) {
  grid_.spec.validate();
  if (grid_.samples.size() != grid_.spec.vertex_count())
    throw InvalidInput("sample count does not match the grid vertex count");
  labels_ = grid_.samples.front().sem_probs.count;
  for (const auto& s : grid_.samples) {
    if (s.sem_probs.count != labels_) throw InvalidInput("inconsistent label counts in sample grid");
  }
}

FieldSample GridField::sample(const Vec3& x) const {
  const GridSpec& g = grid_.spec;
  if (!is_finite(x) || !g.contains(x)) throw OutOfDomain("query point lies outside the grid bounds");

  std::array<std::size_t, 3> cell{};
  std::array<double, 3> frac{};
  const Vec3 h = g.spacing();
  for (int a = 0; a < 3; ++a) {
    const double u = (x[a] - g.min[a]) / h[a];
    const auto last = static_cast<double>(g.resolution[a] - 2);
    const double c = std::min(std::floor(u), last);
    cell[a] = static_cast<std::size_t>(c);
    frac[a] = std::clamp(u - c, 0.0, 1.0);
  }

  FieldSample out;
  out.sem_probs.count = static_cast<std::uint32_t>(labels_);
  for (int corner = 0; corner < 8; ++corner) {
    const int di = corner & 1, dj = (corner >> 1) & 1, dk = (corner >> 2) & 1;
    const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                     (dk ? frac[2] : 1.0 - frac[2]);
    if (w == 0.0) continue;
    const FieldSample& s = grid_.samples[g.index(cell[0] + di, cell[1] + dj, cell[2] + dk)];
    out.sdf += w * s.sdf;
    out.density += w * s.density;
    out.color.r += w * s.color.r;
    out.color.g += w * s.color.g;
    out.color.b += w * s.color.b;
    for (std::size_t l = 0; l < labels_; ++l) out.sem_probs[l] += w * s.sem_probs[l];
  }
  double total = 0.0;
  for (std::size_t l = 0; l < labels_; ++l) total += out.sem_probs[l];
  if (total > 0.0) {
    for (std::size_t l = 0; l < labels_; ++l) out.sem_probs[l] /= total;
  }
  return out;
}

}  // namespace semsurf
