// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semsurf/render.hpp"

namespace semsurf {

/// 8-bit image with 1 (gray) or 3 (RGB) channels, row-major.
struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 3;
  std::vector<std::uint8_t> data;

  friend bool operator==(const Image8&, const Image8&) = default;
};

std::string encode_png(const Image8& image);
Image8 decode_png(const std::string& bytes);
void write_png(const Image8& image, const std::filesystem::path& path);
Image8 read_png(const std::filesystem::path& path);

/// Buffer names accepted by buffer_image(): color, alpha, semantic, depth, normal.
const std::vector<std::string>& buffer_names();

inline constexpr double kSemanticAlphaThreshold = 0.5;

/// Quantizes one buffer: color composited over the background; alpha as gray;
/// semantic as a per-label palette color on the argmax (black where alpha is
/// below kSemanticAlphaThreshold);
/// depth mapped from [near, far] to [0, 255]; normals as (n + 1) / 2.
Image8 buffer_image(const RenderBuffers& buffers, const std::string& buffer);

/// Largest absolute per-channel difference; throws InvalidInput on shape mismatch.
int max_channel_delta(const Image8& a, const Image8& b);

}  // namespace semsurf
