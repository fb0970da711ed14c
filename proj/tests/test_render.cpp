// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "semsurf/error.hpp"
#include "semsurf/image_io.hpp"
#include "semsurf/parallel.hpp"
#include "semsurf/render.hpp"
#include "semsurf/scene_io.hpp"
#include "test_util.hpp"

namespace semsurf {
namespace {

using testing::SlabField;

// Rays along -y from y = 0.5 to y = -0.5.
Ray slab_ray(std::size_t samples) { return Ray{{0, 0.5, 0}, {0, -1, 0}, 0.0, 1.0, samples}; }

Camera small_camera(std::size_t size, std::size_t samples) {
  Camera c;
  c.width = c.height = size;
  c.samples = samples;
  return c;
}

double channel_delta(const PixelResult& a, const PixelResult& b) {
  double d = std::abs(a.alpha - b.alpha);
  d = std::max({d, std::abs(a.color.r - b.color.r), std::abs(a.color.g - b.color.g), std::abs(a.color.b - b.color.b)});
  for (std::size_t k = 0; k < a.semantic.count; ++k) d = std::max(d, std::abs(a.semantic[k] - b.semantic[k]));
  return d;
}

bool bitwise_equal(const PixelResult& a, const PixelResult& b) {
  if (a.alpha != b.alpha || a.weighted_depth != b.weighted_depth) return false;
  if (a.color.r != b.color.r || a.color.g != b.color.g || a.color.b != b.color.b) return false;
  for (std::size_t k = 0; k < kMaxLabels; ++k)
    if (a.semantic[k] != b.semantic[k]) return false;
  return true;
}

TEST(Camera, FrontViewLooksDownMinusY) {
  const Camera c;
  EXPECT_NEAR(c.direction().x, 0.0, 1e-15);
  EXPECT_NEAR(c.direction().y, -1.0, 1e-15);
  EXPECT_NEAR(c.direction().z, 0.0, 1e-15);
  EXPECT_NEAR(c.right().x, -1.0, 1e-15);
  EXPECT_NEAR(c.up().z, 1.0, 1e-15);
}

TEST(Camera, Azimuth45) {
  Camera c;
  c.azimuth_deg = 45.0;
  const double h = std::sqrt(0.5);
  EXPECT_NEAR(c.direction().x, -h, 1e-15);
  EXPECT_NEAR(c.direction().y, -h, 1e-15);
  EXPECT_NEAR(c.direction().z, 0.0, 1e-15);
  c.azimuth_deg = 90.0;
  EXPECT_NEAR(c.direction().x, -1.0, 1e-15);
}

TEST(Camera, SinglePixelGivesCentralRay) {
  Camera c = small_camera(1, 8);
  c.target = {0.1, 0.2, 0.3};
  const auto rays = generate_rays(c);
  ASSERT_EQ(rays.size(), 1u);
  EXPECT_NEAR(rays[0].origin.x, 0.1, 1e-15);
  EXPECT_NEAR(rays[0].origin.y, 0.2 + 1.0, 1e-15);
  EXPECT_NEAR(rays[0].origin.z, 0.3, 1e-15);
  EXPECT_EQ(rays[0].samples, 8u);
  EXPECT_DOUBLE_EQ(rays[0].step(), 2.0 / 8.0);
}

TEST(Camera, PixelGridAndValidation) {
  Camera c = small_camera(4, 8);
  c.width = 8;
  const auto rays = generate_rays(c);
  ASSERT_EQ(rays.size(), 32u);
  // Top-left pixel: +z (up) and +x (image left at azimuth 0).
  EXPECT_GT(rays[0].origin.z, 0.0);
  EXPECT_GT(rays[0].origin.x, 0.0);
  EXPECT_NEAR(rays[0].origin.x, 0.8 * (7.0 / 8.0) * 2.0, 1e-12);
  c.near = 3.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  EXPECT_EQ(turntable(Camera{}, 8)[3].azimuth_deg, 135.0);
}

TEST(Render, ZeroDensityIsTransparent) {
  const SlabField empty({}, 1);
  const auto r = render_pixel(slab_ray(64), empty);
  EXPECT_EQ(r.alpha, 0.0);
  EXPECT_EQ(r.color.r + r.color.g + r.color.b, 0.0);
}

TEST(Render, HomogeneousSlabMatchesExponential) {
  const SlabField slab({{-0.25, 0.25, 10.0, {1, 1, 1}, 0}}, 1);
  const double exact = 1.0 - std::exp(-5.0);
  EXPECT_NEAR(exact, 0.99326, 1e-5);
  EXPECT_NEAR(render_pixel(slab_ray(256), slab).alpha, exact, 2e-3);
  EXPECT_NEAR(render_pixel(slab_ray(512), slab).alpha, exact, 1e-3);
  // Slab not aligned with sample boundaries still converges.
  const SlabField offset({{-0.2013, 0.2987, 10.0, {1, 1, 1}, 0}}, 1);
  EXPECT_NEAR(render_pixel(slab_ray(256), offset).alpha, exact, 2e-3);
  EXPECT_NEAR(render_pixel(slab_ray(512), offset).alpha, exact, 1e-3);
}

TEST(Render, DoublingSamplesConverges) {
  const SlabField slab({{-0.2013, 0.2987, 10.0, {1, 1, 1}, 0}}, 1);
  for (std::size_t n : {256u, 512u, 1024u})
    EXPECT_LT(std::abs(render_pixel(slab_ray(2 * n), slab).alpha - render_pixel(slab_ray(n), slab).alpha), 1e-3);
}

TEST(Render, OpaqueRedSphere) {
  const auto scene = testing::sphere_scene(0.3);
  const Camera c = small_camera(1, 512);
  const auto r = render_pixel(generate_rays(c)[0], scene);
  EXPECT_GT(r.alpha, 0.99);
  EXPECT_NEAR(r.color.r, 1.0, 1e-2);
  EXPECT_EQ(r.color.g, 0.0);
  EXPECT_EQ(r.color.b, 0.0);
  const auto buffers = render_buffers(c, scene, Holistic{});
  EXPECT_NEAR(buffers.depth[0], 0.7, 0.02);  // surface at y = 0.3 seen from y = 1
  EXPECT_NEAR(buffers.normal[0].y, 1.0, 1e-6);
}

TEST(Render, SemanticReductions) {
  const auto scene = testing::sphere_scene(0.3);  // one label: p == 1
  for (const auto& ray : generate_rays(small_camera(6, 128))) {
    EXPECT_TRUE(bitwise_equal(render_pixel_semantic(ray, scene, 0), render_pixel(ray, scene)));
  }
  const SlabField only_a({{-0.25, 0.25, 10.0, {1, 0, 0}, 0}}, 2);
  const auto r = render_pixel_semantic(slab_ray(128), only_a, 1);
  EXPECT_EQ(r.alpha, 0.0);
  EXPECT_EQ(r.color.r, 0.0);
}

TEST(Render, BackLayerShowsThroughFrontLayer) {
  const Rgb red{1, 0, 0}, blue{0, 0, 1};
  const SlabField layers({{0.0, 0.25, 100.0, red, 0}, {-0.25, 0.0, 100.0, blue, 1}}, 2);
  const auto holistic = render_pixel(slab_ray(256), layers);
  EXPECT_GT(holistic.color.r, 0.99);
  const auto back = render_pixel_semantic(slab_ray(256), layers, 1);
  const double alpha = 1.0 - std::exp(-25.0);
  EXPECT_NEAR(back.alpha, alpha, 1e-9);
  EXPECT_NEAR(back.color.b, alpha, 1e-9);
  EXPECT_EQ(back.color.r, 0.0);
  EXPECT_NEAR(back.semantic[1], alpha, 1e-9);
}

class DemoRender : public ::testing::TestWithParam<std::string> {};

TEST_P(DemoRender, SetIdentities) {
  const auto scene = demo_scene(GetParam());
  const auto full = SemanticSet::full(scene.labels());
  for (double az : {0.0, 90.0}) {
    Camera c = small_camera(12, 256);
    c.azimuth_deg = az;
    for (const auto& ray : generate_rays(c)) {
      const auto base = render_pixel(ray, scene);
      ASSERT_LE(channel_delta(render_pixel_set(ray, scene, full), base), 1e-6);
      for (std::uint32_t s = 0; s < scene.label_count(); ++s) {
        ASSERT_TRUE(bitwise_equal(render_pixel_set(ray, scene, SemanticSet::single(s, scene.labels())),
                                  render_pixel_semantic(ray, scene, s)));
      }
    }
  }
}

TEST_P(DemoRender, LayerOverCompositing) {
  const auto scene = demo_scene(GetParam());
  const auto& labels = scene.labels();
  const auto full = SemanticSet::full(labels);
  const auto rays = generate_rays(small_camera(12, 256));
  for (std::uint32_t s = 0; s < labels.size(); ++s) {
    std::vector<std::uint32_t> rest;
    for (std::uint32_t r = 0; r < labels.size(); ++r)
      if (r != s) rest.push_back(r);
    const SemanticSet p("p", {s}, labels), q("q", rest, labels);
    for (const auto& ray : rays) {
      const double a = render_pixel_set(ray, scene, p).alpha + render_pixel_set(ray, scene, q).alpha;
      ASSERT_GE(a, render_pixel_set(ray, scene, full).alpha - 1e-3);
    }
  }
}

TEST_P(DemoRender, TransmittanceIsMonotone) {
  const auto scene = demo_scene(GetParam());
  const auto rays = generate_rays(small_camera(5, 128));
  for (const auto& ray : rays) {
    double previous = 0.0;
    for (std::size_t k = 1; k <= ray.samples; k += 7) {
      // Prefix of the ray: identical sample positions, k of them.
      Ray prefix = ray;
      prefix.samples = k;
      prefix.far = ray.near + static_cast<double>(k) * ray.step();
      for (std::uint32_t s = 0; s < scene.label_count(); ++s) {
        const auto r = render_pixel_semantic(prefix, scene, s);
        ASSERT_GE(r.alpha, 0.0);
        ASSERT_LE(r.alpha, 1.0);
      }
      const double alpha = render_pixel(prefix, scene).alpha;
      ASSERT_GE(alpha, previous);
      ASSERT_LE(alpha, 1.0);
      previous = alpha;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Scenes, DemoRender, ::testing::Values("nested-character", "two-spheres"),
                         [](const auto& info) { return info.param == "two-spheres" ? "TwoSpheres" : "Nested"; });

TEST(Render, InnerLayerVisibleThroughOuterUnderItsSet) {
  const auto scene = demo_scene("nested-character");
  const Ray ray = generate_rays(small_camera(1, 512))[0];
  const Rgb skin = scene.primitives()[0].color, cloth = scene.primitives()[1].color;
  auto dist = [](const Rgb& a, const Rgb& b) {
    return std::hypot(a.r - b.r, a.g - b.g, a.b - b.b);
  };
  const auto holistic = render_pixel(ray, scene);
  EXPECT_LT(dist(holistic.color, cloth), 0.05);
  const auto body = render_pixel_set(ray, scene, SemanticSet::from_names("body", {"body"}, scene.labels()));
  EXPECT_GT(body.alpha, 0.9);
  EXPECT_LT(dist(body.color, skin), dist(body.color, cloth));
}

TEST(Render, TwoSpheresArgmaxSplitsLeftRight) {
  const auto scene = demo_scene("two-spheres");
  const auto b = render_buffers(small_camera(32, 256), scene, Holistic{});
  std::size_t checked = 0;
  for (std::size_t row = 0; row < b.height; ++row) {
    for (std::size_t col = 0; col < b.width; ++col) {
      const std::size_t p = row * b.width + col;
      if (b.alpha[p] < 0.5) continue;
      // Image left is world +x, where the cloth sphere sits.
      EXPECT_EQ(b.argmax[p], col < b.width / 2 ? 1u : 0u) << row << "," << col;
      // Mirror symmetry of the accumulated maps.
      const std::size_t m = row * b.width + (b.width - 1 - col);
      EXPECT_NEAR(b.semantic[p * b.labels], b.semantic[m * b.labels + 1], 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 150u);
}

TEST(Render, BuffersMatchPixelOpsAndAreThreadDeterministic) {
  const auto scene = demo_scene("nested-character");
  const Camera c = small_camera(16, 128);
  const auto set = SemanticSet::from_names("outer", {"cloth", "hair"}, scene.labels());
  RenderBuffers a, b;
  {
    ScopedThreadCount t(1);
    a = render_buffers(c, scene, set);
  }
  {
    ScopedThreadCount t(4);
    b = render_buffers(c, scene, set);
  }
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.semantic, b.semantic);
  EXPECT_EQ(a.depth, b.depth);
  const auto rays = generate_rays(c);
  for (std::size_t p = 0; p < rays.size(); ++p) {
    const auto r = render_pixel_set(rays[p], scene, set);
    ASSERT_EQ(a.alpha[p], r.alpha);
    if (r.alpha == 0.0) ASSERT_EQ(a.depth[p], c.far);
    if (r.alpha < 0.5) ASSERT_EQ(length(a.normal[p]), 0.0);
  }
}

TEST(ImageIo, PngRoundTrip) {
  Image8 img{3, 2, 3, {}};
  for (int i = 0; i < 18; ++i) img.data.push_back(static_cast<std::uint8_t>(i * 14));
  EXPECT_EQ(decode_png(encode_png(img)), img);
  Image8 gray{5, 1, 1, {0, 1, 2, 254, 255}};
  EXPECT_EQ(decode_png(encode_png(gray)), gray);
  EXPECT_EQ(encode_png(img), encode_png(img));
  EXPECT_THROW(decode_png("not a png"), InvalidInput);
}

TEST(ImageIo, BufferImages) {
  const auto scene = demo_scene("two-spheres");
  const auto b = render_buffers(small_camera(8, 64), scene, Holistic{});
  for (const auto& name : buffer_names()) {
    const auto img = buffer_image(b, name);
    EXPECT_EQ(img.width, 8u);
    EXPECT_EQ(img.channels, name == "alpha" || name == "depth" ? 1 : 3);
  }
  EXPECT_THROW(buffer_image(b, "albedo"), InvalidInput);
  const auto alpha = buffer_image(b, "alpha");
  EXPECT_EQ(alpha.data[0], 0);                // corner is empty
  EXPECT_EQ(buffer_image(b, "semantic").data[0], 0);
  EXPECT_EQ(max_channel_delta(alpha, alpha), 0);
}

// Turntable regression images. SEMSURF_UPDATE_GOLDEN=1 rewrites them.
TEST(ImageIo, GoldenTurntable) {
  const std::filesystem::path dir = std::filesystem::path(SEMSURF_FIXTURE_DIR) / "golden";
  const bool update = std::getenv("SEMSURF_UPDATE_GOLDEN") != nullptr;
  const auto scene = demo_scene("nested-character");
  const auto cameras = turntable(small_camera(64, 256), 8);
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    const auto b = render_buffers(cameras[v], scene, Holistic{});
    for (const std::string name : {"color", "semantic"}) {
      char file[64];
      std::snprintf(file, sizeof file, "nested-character_holistic_az%03d_%s.png",
                    static_cast<int>(cameras[v].azimuth_deg), name.c_str());
      const auto img = buffer_image(b, name);
      if (update) {
        write_png(img, dir / file);
        continue;
      }
      ASSERT_TRUE(std::filesystem::exists(dir / file)) << file;
      EXPECT_LE(max_channel_delta(img, read_png(dir / file)), 1) << file;
    }
  }
}

}  // namespace
}  // namespace semsurf
