// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "semsurf/field.hpp"
#include "semsurf/semantics.hpp"
#include "semsurf/vec.hpp"

namespace semsurf {

/// Orthographic camera orbiting a target.
///
/// The view direction is -(sin(az)cos(el), cos(az)cos(el), sin(el)): azimuth 0,
/// elevation 0 looks along -y (front view from +y), azimuth 90 looks along -x.
/// right = normalize(dir x z) = (-cos az, sin az, 0) and up = right x dir, so
/// images are not mirrored. Rows run top to bottom, columns left to right. Rays
/// start on the plane through target - dir * (near + far) / 2 and are sampled
/// for t in [near, far].
struct Camera {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  /// Half the vertical extent of the view window; horizontal scales by W/H.
  double half_extent = 0.8;
  std::size_t width = 128;
  std::size_t height = 128;
  double near = 0.0;
  double far = 2.0;
  std::size_t samples = 512;
  Vec3 target;

  /// Throws InvalidInput unless near < far, samples >= 2, width/height >= 1.
  void validate() const;
  Vec3 direction() const;
  Vec3 right() const;
  Vec3 up() const;
};

/// `count` cameras at equidistant azimuths starting from 0, elevation 0.
std::vector<Camera> turntable(const Camera& base, std::size_t count);

struct Ray {
  Vec3 origin;
  Vec3 direction;
  double near = 0.0;
  double far = 1.0;
  std::size_t samples = 2;

  double step() const { return (far - near) / static_cast<double>(samples); }
  /// Midpoint of the i-th of `samples` uniform intervals.
  double t(std::size_t i) const { return near + (static_cast<double>(i) + 0.5) * step(); }
  Vec3 at(double t) const { return origin + direction * t; }
};

/// One ray per pixel center, row-major from the top-left pixel.
std::vector<Ray> generate_rays(const Camera& camera);

struct PixelResult {
  Rgb color;
  double alpha = 0.0;
  /// Accumulated probability vectors (holistic semantic map, or its masked form).
  ProbVector semantic;
  /// Sum of compositing weight times t; divide by alpha for expected depth.
  double weighted_depth = 0.0;
};

/// Plain volume rendering: C = sum T_i a_i c_i with a_i = 1 - exp(-sigma_i d),
/// T_i = prod_{j<i} (1 - a_j).
PixelResult render_pixel(const Ray& ray, const Field& field);

/// Rendering under one label: weights a_i p_{s,i}, transmittance
/// prod_{j<i} (1 - a_j p_{s,j}).
PixelResult render_pixel_semantic(const Ray& ray, const Field& field, std::uint32_t label);

/// Rendering under a label set with the set-summed probability in place of p_s.
PixelResult render_pixel_set(const Ray& ray, const Field& field, const SemanticSet& set);

struct Holistic {};
using RenderMode = std::variant<Holistic, std::uint32_t, SemanticSet>;

PixelResult render_pixel(const Ray& ray, const Field& field, const RenderMode& mode);

inline constexpr double kDepthEpsilon = 1e-8;

struct RenderOptions {
  Rgb background{0.0, 0.0, 0.0};
  double normal_step = 1e-4;
  /// Normals are written where alpha reaches this value.
  double normal_alpha_threshold = 0.5;
};

/// Per-pixel images, row-major. Colors are not premultiplied with the background.
struct RenderBuffers {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t labels = 0;
  std::vector<Rgb> color;
  std::vector<double> alpha;
  std::vector<double> semantic;         // width * height * labels
  std::vector<std::uint32_t> argmax;    // label with the largest accumulated value
  std::vector<double> depth;            // expected depth; far where alpha == 0
  std::vector<Vec3> normal;             // unit, zero below the alpha threshold
  double far = 0.0;
  double near = 0.0;
  Rgb background;

  std::size_t pixel_count() const { return width * height; }
  /// color + (1 - alpha) * background.
  Rgb composited(std::size_t pixel) const;
};

RenderBuffers render_buffers(const Camera& camera, const Field& field, const RenderMode& mode,
                             const RenderOptions& options = {});

}  // namespace semsurf
