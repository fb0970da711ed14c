// SPDX-License-Identifier: Apache-2.0
#include "semsurf/render.hpp"

#include <cmath>
#include <numbers>

#include "semsurf/error.hpp"
#include "semsurf/parallel.hpp"

namespace semsurf {
namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

// Shared compositing loop. weight(sample) is the per-sample probability that
// scales opacity: 1 for holistic rendering, p_s or the set sum otherwise.
template <class Weight>
PixelResult composite(const Ray& ray, const Field& field, Weight&& weight) {
  PixelResult out;
  const std::size_t k = field.label_count();
  out.semantic.count = static_cast<std::uint32_t>(k);
  const double delta = ray.step();
  double transmittance = 1.0;
  for (std::size_t i = 0; i < ray.samples; ++i) {
    const double t = ray.t(i);
    const FieldSample s = field.sample(ray.at(t));
    const double alpha = 1.0 - std::exp(-s.density * delta);
    const double q = weight(s);
    const double w = transmittance * alpha * q;
    out.color.r += w * s.color.r;
    out.color.g += w * s.color.g;
    out.color.b += w * s.color.b;
    for (std::size_t l = 0; l < k; ++l) out.semantic.values[l] += w * s.sem_probs.values[l];
    out.weighted_depth += w * t;
    transmittance *= 1.0 - alpha * q;
  }
  out.alpha = 1.0 - transmittance;
  return out;
}

}  // namespace

void Camera::validate() const {
  if (!(near < far)) throw InvalidInput("camera: near must be below far");
  if (samples < 2) throw InvalidInput("camera: at least 2 samples per ray are required");
  if (width < 1 || height < 1) throw InvalidInput("camera: image size must be at least 1x1");
  if (!(half_extent > 0.0)) throw InvalidInput("camera: half_extent must be positive");
  if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg) || !is_finite(target))
    throw InvalidInput("camera: non-finite pose");
}

Vec3 Camera::direction() const {
  const double az = radians(azimuth_deg), el = radians(elevation_deg);
  return {-std::sin(az) * std::cos(el), -std::cos(az) * std::cos(el), -std::sin(el)};
}

Vec3 Camera::right() const {
  const double az = radians(azimuth_deg);
  return {-std::cos(az), std::sin(az), 0.0};
}

Vec3 Camera::up() const { return cross(right(), direction()); }

std::vector<Camera> turntable(const Camera& base, std::size_t count) {
  std::vector<Camera> cams;
  for (std::size_t i = 0; i < count; ++i) {
    Camera c = base;
    c.azimuth_deg = 360.0 * static_cast<double>(i) / static_cast<double>(count);
    c.elevation_deg = 0.0;
    cams.push_back(c);
  }
  return cams;
}

std::vector<Ray> generate_rays(const Camera& camera) {
  camera.validate();
  const Vec3 dir = camera.direction(), right = camera.right(), up = camera.up();
  const Vec3 center = camera.target - dir * ((camera.near + camera.far) / 2.0);
  const double w = static_cast<double>(camera.width), h = static_cast<double>(camera.height);
  const double half_w = camera.half_extent * w / h;
  std::vector<Ray> rays;
  rays.reserve(camera.width * camera.height);
  for (std::size_t r = 0; r < camera.height; ++r) {
    const double v = (1.0 - 2.0 * (static_cast<double>(r) + 0.5) / h) * camera.half_extent;
    for (std::size_t c = 0; c < camera.width; ++c) {
      const double u = (2.0 * (static_cast<double>(c) + 0.5) / w - 1.0) * half_w;
      rays.push_back({center + right * u + up * v, dir, camera.near, camera.far, camera.samples});
    }
  }
  return rays;
}

PixelResult render_pixel(const Ray& ray, const Field& field) {
  return composite(ray, field, [](const FieldSample&) { return 1.0; });
}

PixelResult render_pixel_semantic(const Ray& ray, const Field& field, std::uint32_t label) {
  if (label >= field.label_count()) throw InvalidInput("render: label id out of range");
  return composite(ray, field, [label](const FieldSample& s) { return s.sem_probs.values[label]; });
}

PixelResult render_pixel_set(const Ray& ray, const Field& field, const SemanticSet& set) {
  for (auto m : set.members())
    if (m >= field.label_count()) throw InvalidInput("render: semantic set '" + set.name() + "' exceeds the registry");
  return composite(ray, field, [&set](const FieldSample& s) {
    // Singletons add to an exact 0, which keeps them bitwise equal to the
    // single-label path.
    double q = 0.0;
    for (auto m : set.members()) q += s.sem_probs.values[m];
    return q;
  });
}

PixelResult render_pixel(const Ray& ray, const Field& field, const RenderMode& mode) {
  return std::visit(
      [&](const auto& m) -> PixelResult {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Holistic>) return render_pixel(ray, field);
        else if constexpr (std::is_same_v<T, std::uint32_t>) return render_pixel_semantic(ray, field, m);
        else return render_pixel_set(ray, field, m);
      },
      mode);
}

Rgb RenderBuffers::composited(std::size_t pixel) const {
  const Rgb& c = color[pixel];
  const double rest = 1.0 - alpha[pixel];
  return {c.r + rest * background.r, c.g + rest * background.g, c.b + rest * background.b};
}

RenderBuffers render_buffers(const Camera& camera, const Field& field, const RenderMode& mode,
                             const RenderOptions& options) {
  const auto rays = generate_rays(camera);
  RenderBuffers buf;
  buf.width = camera.width;
  buf.height = camera.height;
  buf.labels = field.label_count();
  buf.near = camera.near;
  buf.far = camera.far;
  buf.background = options.background;
  const std::size_t n = rays.size();
  buf.color.resize(n);
  buf.alpha.resize(n);
  buf.semantic.resize(n * buf.labels);
  buf.argmax.resize(n);
  buf.depth.resize(n);
  buf.normal.resize(n);
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
          const Ray& ray = rays[p];
          const PixelResult px = render_pixel(ray, field, mode);
          buf.color[p] = px.color;
          buf.alpha[p] = px.alpha;
          std::uint32_t best = 0;
          for (std::size_t l = 0; l < buf.labels; ++l) {
            buf.semantic[p * buf.labels + l] = px.semantic.values[l];
            if (px.semantic.values[l] > px.semantic.values[best]) best = static_cast<std::uint32_t>(l);
          }
          buf.argmax[p] = best;
          buf.depth[p] = px.alpha > 0.0 ? px.weighted_depth / std::max(px.alpha, kDepthEpsilon) : camera.far;
          if (px.alpha >= options.normal_alpha_threshold) {
            const Vec3 x = ray.at(buf.depth[p]);
            const double h = options.normal_step;
            const Vec3 g{field.sdf(x + Vec3{h, 0, 0}) - field.sdf(x - Vec3{h, 0, 0}),
                         field.sdf(x + Vec3{0, h, 0}) - field.sdf(x - Vec3{0, h, 0}),
                         field.sdf(x + Vec3{0, 0, h}) - field.sdf(x - Vec3{0, 0, h})};
            buf.normal[p] = normalize(g);
          }
        }
      },
      16);
  return buf;
}

}  // namespace semsurf
