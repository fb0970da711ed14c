// SPDX-License-Identifier: Apache-2.0
#include "semsurf/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "semsurf/parallel.hpp"
#include "semsurf/point_index.hpp"

namespace semsurf {
namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log(1 - logistic(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_grid(const ScalarGrid& grid) {
  for (auto r : grid.spec.resolution)
    if (r == 0) throw InvalidInput("loss grid has a zero resolution");
  if (grid.values.size() != grid.spec.vertex_count()) throw InvalidInput("loss grid value count mismatch");
  for (double v : grid.values)
    if (!std::isfinite(v)) throw InvalidInput("loss grid has a non-finite value");
}

// Per-vertex loss and gradient for the directed edges leaving vertex v.
void hole_terms(const ScalarGrid& grid, std::size_t v, double& term, double& grad) {
  term = 0.0;
  grad = 0.0;
  const double fa = grid.values[v];
  if (!(fa > 0.0)) return;
  const auto& res = grid.spec.resolution;
  const auto c = grid.spec.coords(v);
  std::size_t stride = 1;
  for (int a = 0; a < 3; ++a) {
    if (c[a] > 0 && grid.values[v - stride] < 0.0) {
      term += softplus(fa);
      grad += logistic(fa);
    }
    if (c[a] + 1 < res[a] && grid.values[v + stride] < 0.0) {
      term += softplus(fa);
      grad += logistic(fa);
    }
    stride *= res[a];
  }
}

double hole_value(const ScalarGrid& grid) {
  std::vector<double> terms(grid.values.size());
  double unused = 0.0;
  for (std::size_t v = 0; v < terms.size(); ++v) hole_terms(grid, v, terms[v], unused);
  return pairwise_sum(terms);
}

struct Nearest {
  Vec3 point;
  Vec3 normal;
  std::uint32_t id = 0;  // inner vertex or triangle
};

Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

// Nearest-element lookup against a fixed inner mesh.
class InnerQuery {
 public:
  InnerQuery(const Mesh& inner, NearestMode mode) : inner_(inner), mode_(mode), index_(inner.positions) {
    if (mode == NearestMode::kSurface) {
      face_normals_.reserve(inner.triangles.size());
      for (const auto& t : inner.triangles) face_normals_.push_back(normalize(face_area_vector(inner, t)));
    }
  }

  Nearest operator()(const Vec3& p) const {
    if (mode_ == NearestMode::kVertex) {
      const auto hit = index_.nearest(p);
      return {inner_.positions[hit.index], inner_.normals[hit.index], hit.index};
    }
    Nearest best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < inner_.triangles.size(); ++f) {
      const auto& t = inner_.triangles[f];
      const Vec3 q = closest_on_triangle(p, inner_.positions[t[0]], inner_.positions[t[1]], inner_.positions[t[2]]);
      const double d2 = length_squared(q - p);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = {q, face_normals_[f], static_cast<std::uint32_t>(f)};
      }
    }
    return best;
  }

 private:
  const Mesh& inner_;
  NearestMode mode_;
  PointIndex index_;
  std::vector<Vec3> face_normals_;
};

void check_collision_inputs(const Mesh& outer, const Mesh& inner, NearestMode mode) {
  if (outer.positions.empty()) throw InvalidInput("collision loss: outer mesh has no vertices");
  if (inner.positions.empty()) throw InvalidInput("collision loss: inner mesh has no vertices");
  if (mode == NearestMode::kVertex && !inner.has_normals())
    throw InvalidInput("collision loss: inner mesh has no vertex normals");
  if (mode == NearestMode::kSurface && inner.triangles.empty())
    throw InvalidInput("collision loss: surface mode needs inner triangles");
}

double penetration(const Vec3& v, const Nearest& n) { return std::max(dot(n.point - v, n.normal), 0.0); }

CollisionLoss collision_with(std::span<const Vec3> positions, const InnerQuery& query) {
  CollisionLoss out;
  const std::size_t n = positions.size();
  out.gradient.resize(n);
  out.penetration.resize(n);
  std::vector<double> cubes(n);
  const double scale = 3.0 / static_cast<double>(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Nearest near = query(positions[i]);
      const double d = penetration(positions[i], near);
      out.penetration[i] = d;
      cubes[i] = d * d * d;
      out.gradient[i] = near.normal * (-scale * d * d);
    }
  }, 256);
  out.value = pairwise_sum(cubes) / static_cast<double>(n);
  for (double d : out.penetration) out.max_penetration = std::max(out.max_penetration, d);
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> unique_edges(const Mesh& mesh) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) edges.emplace_back(std::minmax(t[e], t[(e + 1) % 3]));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

double smooth_energy(std::span<const Vec3> x, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  std::vector<double> terms(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) terms[e] = length_squared(x[edges[e].first] - x[edges[e].second]);
  return pairwise_sum(terms);
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

}  // namespace

void LossWeights::validate() const {
  for (double w : {lpips, mask, sem, depth, normal, dev, hole, refine_mask, refine_normal, collision})
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("loss weights must be finite and non-negative");
}

ScalarLoss hole_loss(const ScalarGrid& grid) {
  check_grid(grid);
  ScalarLoss out;
  const std::size_t n = grid.values.size();
  std::vector<double> terms(n);
  out.gradient.assign(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) hole_terms(grid, v, terms[v], out.gradient[v]);
  });
  out.value = pairwise_sum(terms);
  return out;
}

CollisionLoss collision_loss(const Mesh& outer, const Mesh& inner, NearestMode mode) {
  check_collision_inputs(outer, inner, mode);
  const InnerQuery query(inner, mode);
  return collision_with(outer.positions, query);
}

ResolveResult resolve_collisions(const Mesh& outer, const Mesh& inner, const ResolveOptions& options) {
  if (!(options.step > 0.0)) throw InvalidInput("resolve: step must be positive");
  if (options.max_iters < 0) throw InvalidInput("resolve: max_iters must be non-negative");
  if (!(options.smooth_weight >= 0.0)) throw InvalidInput("resolve: smooth_weight must be non-negative");
  check_collision_inputs(outer, inner, options.mode);
  const InnerQuery query(inner, options.mode);
  const auto edges = unique_edges(outer);

  ResolveResult result;
  result.mesh = outer;
  std::vector<Vec3> x = outer.positions;
  CollisionLoss current = collision_with(x, query);
  double objective = current.value + options.smooth_weight * smooth_energy(x, edges);
  result.trace.push_back(current.value);
  double step = options.step;
  int rejected = 0;
  for (int it = 0; it < options.max_iters && current.value >= options.tolerance; ++it) {
    std::vector<Vec3> grad = current.gradient;
    if (options.smooth_weight > 0.0) {
      for (const auto& [a, b] : edges) {
        const Vec3 d = (x[a] - x[b]) * (2.0 * options.smooth_weight);
        grad[a] += d;
        grad[b] -= d;
      }
    }
    std::vector<Vec3> trial(x.size());
    bool moved = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      trial[i] = x[i] - grad[i] * step;
      moved = moved || trial[i] != x[i];
    }
    if (!moved) break;  // converged to machine precision
    CollisionLoss next = collision_with(trial, query);
    const double next_objective = next.value + options.smooth_weight * smooth_energy(trial, edges);
    if (next_objective <= objective && next.value <= current.value) {
      x = std::move(trial);
      current = std::move(next);
      objective = next_objective;
      result.trace.push_back(current.value);
      ++result.iterations;
      rejected = 0;
      step *= 2.0;
    } else {
      step *= 0.5;
      if (++rejected == 10)
        throw DivergenceError("resolve: loss increased for 10 consecutive steps after " +
                                  std::to_string(result.iterations) + " accepted iterations",
                              result.trace);
    }
  }
  result.mesh.positions = std::move(x);
  if (result.mesh.has_normals() && result.iterations > 0) {
    if (!result.mesh.triangles.empty()) result.mesh.normals = area_weighted_vertex_normals(result.mesh);
  }
  result.max_penetration = current.max_penetration;
  return result;
}

double mask_loss(std::span<const double> rendered_alpha, std::span<const double> reference_mask) {
  if (rendered_alpha.size() != reference_mask.size()) throw InvalidInput("mask loss: buffer sizes differ");
  if (rendered_alpha.empty()) return 0.0;
  std::vector<double> terms(rendered_alpha.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double d = rendered_alpha[i] - reference_mask[i];
    terms[i] = d * d;
  }
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

double normal_loss(std::span<const Vec3> rendered, std::span<const Vec3> reference,
                   std::span<const double> reference_mask) {
  if (rendered.size() != reference.size() || rendered.size() != reference_mask.size())
    throw InvalidInput("normal loss: buffer sizes differ");
  std::vector<double> terms;
  for (std::size_t i = 0; i < rendered.size(); ++i)
    if (reference_mask[i] > 0.5) terms.push_back(1.0 - dot(rendered[i], reference[i]));
  return terms.empty() ? 0.0 : pairwise_sum(terms) / static_cast<double>(terms.size());
}

double depth_loss(std::span<const double> rendered, std::span<const double> reference,
                  std::span<const double> reference_mask) {
  if (rendered.size() != reference.size() || rendered.size() != reference_mask.size())
    throw InvalidInput("depth loss: buffer sizes differ");
  std::vector<double> terms;
  for (std::size_t i = 0; i < rendered.size(); ++i)
    if (reference_mask[i] > 0.5) terms.push_back(std::abs(rendered[i] - reference[i]));
  return terms.empty() ? 0.0 : pairwise_sum(terms) / static_cast<double>(terms.size());
}

double semantic_ce_loss(std::span<const double> semantic, std::span<const double> alpha, std::size_t labels,
                        std::span<const std::uint32_t> reference_labels, std::span<const double> reference_mask) {
  if (labels == 0) throw InvalidInput("semantic loss: label count must be positive");
  const std::size_t n = alpha.size();
  if (semantic.size() != n * labels || reference_labels.size() != n || reference_mask.size() != n)
    throw InvalidInput("semantic loss: buffer sizes differ");
  std::vector<double> terms;
  for (std::size_t p = 0; p < n; ++p) {
    if (!(reference_mask[p] > 0.5)) continue;
    const std::uint32_t label = reference_labels[p];
    if (label >= labels) throw InvalidInput("semantic loss: reference label " + std::to_string(label) + " out of range");
    const double q = semantic[p * labels + label] / std::max(alpha[p], kCrossEntropyEpsilon);
    terms.push_back(-std::log(std::clamp(q, kCrossEntropyEpsilon, 1.0)));
  }
  return terms.empty() ? 0.0 : pairwise_sum(terms) / static_cast<double>(terms.size());
}

GradientCheck finite_diff_check_hole(const ScalarGrid& grid, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("gradient check: eps must be positive");
  const ScalarLoss analytic = hole_loss(grid);
  GradientCheck report{"hole_loss", 0.0, 0, {}};
  ScalarGrid probe = grid;
  const auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  for (std::size_t c = 0; c < grid.values.size(); ++c) {
    const double f = grid.values[c];
    if (sign(f + eps) != sign(f) || sign(f - eps) != sign(f)) {
      report.excluded.push_back(c);
      continue;
    }
    probe.values[c] = f + eps;
    const double up = hole_value(probe);
    probe.values[c] = f - eps;
    const double down = hole_value(probe);
    probe.values[c] = f;
    report.max_rel_err = std::max(report.max_rel_err, relative_error(analytic.gradient[c], (up - down) / (2.0 * eps)));
    ++report.checked;
  }
  return report;
}

GradientCheck finite_diff_check_collision(const Mesh& outer, const Mesh& inner, double eps, NearestMode mode) {
  if (!(eps > 0.0)) throw InvalidInput("gradient check: eps must be positive");
  check_collision_inputs(outer, inner, mode);
  const InnerQuery query(inner, mode);
  const CollisionLoss analytic = collision_with(outer.positions, query);
  GradientCheck report{"collision_loss", 0.0, 0, {}};
  std::vector<Vec3> probe = outer.positions;
  for (std::size_t v = 0; v < probe.size(); ++v) {
    const Vec3 base = outer.positions[v];
    const Nearest here = query(base);
    const double d0 = dot(here.point - base, here.normal);
    for (int a = 0; a < 3; ++a) {
      const std::size_t coord = 3 * v + static_cast<std::size_t>(a);
      Vec3 up = base, down = base;
      up[a] += eps;
      down[a] -= eps;
      const Nearest nu = query(up), nd = query(down);
      const double du = dot(nu.point - up, nu.normal), dd = dot(nd.point - down, nd.normal);
      // Selection changes: a different nearest element, or the clamp at zero
      // switching on or off within the stencil.
      const bool flips = nu.id != here.id || nd.id != here.id || (du > 0.0) != (d0 > 0.0) || (dd > 0.0) != (d0 > 0.0);
      if (flips) {
        report.excluded.push_back(coord);
        continue;
      }
      probe[v] = up;
      const double lu = collision_with(probe, query).value;
      probe[v] = down;
      const double ld = collision_with(probe, query).value;
      probe[v] = base;
      report.max_rel_err = std::max(report.max_rel_err, relative_error(analytic.gradient[v][a], (lu - ld) / (2.0 * eps)));
      ++report.checked;
    }
  }
  return report;
}

}  // namespace semsurf
