#pragma once

// Synthetic segmentation dataset: 32x32 gray images whose background is one
// per-image constant <= 120 and whose foreground pixels are all >= 160.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cvplan::testing {

struct SyntheticCase {
  int width = 0;
  int height = 0;
  /// Row-major 8-bit image after noise.
  std::vector<std::uint8_t> pixels;
  /// Row-major 0/1 reference (noise never touches it).
  std::vector<std::uint8_t> mask;
};

struct SyntheticOptions {
  int train = 20;
  int test = 10;
  int size = 32;
  /// Salt-and-pepper fraction applied to images only.
  double noise = 0.0;
  std::uint32_t seed = 7;
};

struct SyntheticDataset {
  std::filesystem::path root;
  std::vector<SyntheticCase> train;
  std::vector<SyntheticCase> test;
  std::filesystem::path train_csv;
  std::filesystem::path test_csv;
  std::filesystem::path bindings;
  std::filesystem::path plan_json;
  /// Scripted completions whose only entry wraps plan_json in a json fence.
  std::filesystem::path completions;
};

/// The three target supernodes of the synthetic plan, in plan order.
const std::vector<std::string>& synthetic_targets();

/// Plan with a reader chunk and three targets that differ in preprocessing:
/// resize + z_score, histeq, and nearest resize + expand_channels.
std::string synthetic_plan_json();

/// Generates images, masks, manifests, bindings, plan and completions under
/// `root` (created; existing files overwritten).
SyntheticDataset make_synthetic_dataset(const std::filesystem::path& root, const SyntheticOptions& options = {});

/// A fresh, empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace cvplan::testing
