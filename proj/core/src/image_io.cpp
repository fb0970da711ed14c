// SPDX-License-Identifier: Apache-2.0
#include "semsurf/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "semsurf/error.hpp"
#include "semsurf/mesh_io.hpp"

namespace semsurf {
namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

struct ReadCursor {
  const std::string* bytes;
  std::size_t offset;
};

void png_error_fn(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  *text = message;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

void write_fn(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void flush_fn(png_structp) {}

void read_fn(png_structp png, png_bytep data, png_size_t length) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + length > cur->bytes->size()) png_error(png, "truncated PNG data");
  std::memcpy(data, cur->bytes->data() + cur->offset, length);
  cur->offset += length;
}

// Distinct label colors; labels beyond the table wrap around.
constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette{{
    {230, 159, 0},
    {86, 180, 233},
    {0, 158, 115},
    {240, 228, 66},
    {0, 114, 178},
    {213, 94, 0},
    {204, 121, 167},
    {255, 255, 255},
}};

}  // namespace

std::string encode_png(const Image8& image) {
  if (image.channels != 1 && image.channels != 3) throw InvalidInput("PNG encode: channels must be 1 or 3");
  if (image.width == 0 || image.height == 0) throw InvalidInput("PNG encode: empty image");
  if (image.data.size() != image.width * image.height * static_cast<std::size_t>(image.channels))
    throw InvalidInput("PNG encode: data size does not match the image shape");
  std::string out;
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
  if (png == nullptr) throw ResourceError("PNG encode: cannot allocate libpng state");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed: " + error);
  }
  png_set_write_fn(png, &out, write_fn, flush_fn);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = image.width * static_cast<std::size_t>(image.channels);
  for (std::size_t r = 0; r < image.height; ++r)
    png_write_row(png, const_cast<png_bytep>(image.data.data() + r * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Image8 decode_png(const std::string& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0)
    throw InvalidInput("not a PNG file");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
  if (png == nullptr) throw ResourceError("PNG decode: cannot allocate libpng state");
  png_infop info = png_create_info_struct(png);
  Image8 image;
  ReadCursor cursor{&bytes, 0};
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InvalidInput("PNG decode failed: " + error);
  }
  png_set_read_fn(png, &cursor, read_fn);
  png_read_info(png, info);
  const auto color_type = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  image.width = png_get_image_width(png, info);
  image.height = png_get_image_height(png, info);
  image.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  image.data.resize(stride * image.height);
  std::vector<png_bytep> rows(image.height);
  for (std::size_t r = 0; r < image.height; ++r) rows[r] = image.data.data() + r * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void write_png(const Image8& image, const std::filesystem::path& path) { write_file(path, encode_png(image)); }

Image8 read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_file(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput("'" + path.string() + "': " + e.what());
  }
}

const std::vector<std::string>& buffer_names() {
  static const std::vector<std::string> names{"color", "alpha", "semantic", "depth", "normal"};
  return names;
}

Image8 buffer_image(const RenderBuffers& buffers, const std::string& buffer) {
  const auto& names = buffer_names();
  if (std::find(names.begin(), names.end(), buffer) == names.end())
    throw InvalidInput("unknown buffer '" + buffer + "' (expected color, alpha, semantic, depth or normal)");
  Image8 img;
  img.width = buffers.width;
  img.height = buffers.height;
  const std::size_t n = buffers.pixel_count();
  if (buffer == "alpha" || buffer == "depth") {
    img.channels = 1;
    img.data.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
      const double v = buffer == "alpha"
                           ? buffers.alpha[p]
                           : (buffers.depth[p] - buffers.near) / (buffers.far - buffers.near);
      img.data[p] = to_byte(v);
    }
    return img;
  }
  img.channels = 3;
  img.data.resize(n * 3);
  for (std::size_t p = 0; p < n; ++p) {
    std::array<std::uint8_t, 3> px{};
    if (buffer == "color") {
      const Rgb c = buffers.composited(p);
      px = {to_byte(c.r), to_byte(c.g), to_byte(c.b)};
    } else if (buffer == "semantic") {
      if (buffers.alpha[p] >= kSemanticAlphaThreshold) px = kPalette[buffers.argmax[p] % kPalette.size()];
    } else {
      const Vec3& v = buffers.normal[p];
      px = {to_byte((v.x + 1.0) / 2.0), to_byte((v.y + 1.0) / 2.0), to_byte((v.z + 1.0) / 2.0)};
    }
    std::copy(px.begin(), px.end(), img.data.begin() + static_cast<std::ptrdiff_t>(p * 3));
  }
  return img;
}

int max_channel_delta(const Image8& a, const Image8& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels || a.data.size() != b.data.size())
    throw InvalidInput("image shapes differ");
  int worst = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) worst = std::max(worst, std::abs(int{a.data[i]} - int{b.data[i]}));
  return worst;
}

}  // namespace semsurf
