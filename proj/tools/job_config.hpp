// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semsurf/extract.hpp"
#include "semsurf/losses.hpp"
#include "semsurf/metrics.hpp"

namespace semsurf::cli {

inline constexpr int kConfigSchemaVersion = 1;

/// Bad flags, bad config files, unreadable inputs: exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CameraConfig {
  std::size_t views = 8;
  std::size_t width = 256;
  std::size_t height = 256;
  std::size_t samples = 512;
  double elevation_deg = 0.0;
  double half_extent = 0.8;
  double near = 0.0;
  double far = 2.0;
};

struct JobConfig {
  std::string scene;  // scene file, or a demo scene name
  std::filesystem::path out = "out";
  std::optional<std::array<std::size_t, 3>> fine;
  std::optional<std::array<std::size_t, 3>> coarse;
  bool proposal = true;
  int kernel = kDefaultKernel;
  std::vector<LayerDefinition> layers;  // empty: one layer per label
  CameraConfig camera;
  std::vector<std::string> buffers;     // empty: every buffer
  LossWeights weights;
  std::uint64_t seed = 0;
  MetricsConfig metrics;

  /// Throws ConfigError.
  void validate() const;
};

/// Parses "WxHxD".
std::array<std::size_t, 3> parse_resolution(const std::string& text);

/// Reads a versioned config file over `base`; unknown keys are rejected.
JobConfig load_job_config(const std::filesystem::path& path, JobConfig base = {});
JobConfig job_config_from_json(const nlohmann::json& doc, JobConfig base = {});

}  // namespace semsurf::cli
