#pragma once

// Pixel kernels in two builds with identical results: `serial` is the
// reference, `parallel` is the OpenMP version the tools call. Floating-point
// reductions use fixed-size blocks combined in block order, so both builds and
// every thread count produce the same bits.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cvplan/vision/image.hpp"

namespace cvplan::vision {

inline constexpr int kClaheTiles = 8;
inline constexpr std::size_t kReductionBlock = 4096;

struct Moments {
  double mean = 0.0;
  /// Population standard deviation.
  double stddev = 0.0;
};

/// One training case for the threshold fit: 8-bit levels and a 0/1 mask.
struct LevelPair {
  std::span<const std::uint8_t> levels;
  std::span<const std::uint8_t> mask;
};

using ThresholdScores = std::array<double, 256>;

namespace common {

/// Histogram bin of `v` for nbins equal bins over [lo, hi]; hi itself lands in
/// the last bin. A degenerate range maps everything to bin 0.
int bin_index(double v, double lo, double hi, int nbins);

/// Clips `hist` at `clip`, spreads the excess evenly over all bins and returns
/// the normalized cumulative mapping (last entry 1).
std::vector<double> clipped_cdf(std::vector<double> hist, double clip);

/// Clip height for a tile of `tile_pixels` samples.
double clahe_clip(double clip_limit, std::size_t tile_pixels);

/// Tile index pair and weight of the far tile, per coordinate along one axis.
struct AxisWeights {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> w;
};
AxisWeights axis_weights(int length, int tiles);

/// Start offset of tile `t` when `length` is split into `tiles` parts.
inline int tile_start(int t, int length, int tiles) { return static_cast<int>(static_cast<long long>(t) * length / tiles); }

/// Dice for one threshold from suffix counts; empty vs empty is 1.
double dice_from_counts(std::uint64_t overlap, std::uint64_t a, std::uint64_t b);

}  // namespace common

namespace serial {

/// order 0: nearest neighbour; otherwise bilinear with half-pixel centres and
/// clamped edges.
std::vector<double> resize_plane(std::span<const double> src, int width, int height, int out_width,
                                 int out_height, int order);
std::vector<std::uint64_t> histogram(std::span<const double> plane, double lo, double hi, int nbins);
/// Global equalization; values in [0, 1].
std::vector<double> equalize(std::span<const double> plane, int nbins);
/// Per-tile clipped CDF mappings, row-major over the tile grid.
std::vector<std::vector<double>> clahe_tile_maps(std::span<const double> plane, int width, int height, int nbins,
                                                 double clip_limit, int tiles_y, int tiles_x);
/// Tiled, clipped equalization with bilinear blending of tile mappings; [0, 1].
std::vector<double> clahe(std::span<const double> plane, int width, int height, int nbins, double clip_limit,
                          int tiles_y = kClaheTiles, int tiles_x = kClaheTiles);
Moments moments(std::span<const double> plane);
/// Mean Dice of {level >= t} against the masks, for every t in 0..255.
ThresholdScores threshold_scores(std::span<const LevelPair> pairs);
double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
/// Inside the mask: (1 - alpha) * gray + alpha * 255, rounded.
std::vector<std::uint8_t> overlay(std::span<const std::uint8_t> gray, std::span<const std::uint8_t> mask, double alpha);

}  // namespace serial

namespace parallel {

std::vector<double> resize_plane(std::span<const double> src, int width, int height, int out_width,
                                 int out_height, int order);
std::vector<std::uint64_t> histogram(std::span<const double> plane, double lo, double hi, int nbins);
std::vector<double> equalize(std::span<const double> plane, int nbins);
std::vector<std::vector<double>> clahe_tile_maps(std::span<const double> plane, int width, int height, int nbins,
                                                 double clip_limit, int tiles_y, int tiles_x);
std::vector<double> clahe(std::span<const double> plane, int width, int height, int nbins, double clip_limit,
                          int tiles_y = kClaheTiles, int tiles_x = kClaheTiles);
Moments moments(std::span<const double> plane);
ThresholdScores threshold_scores(std::span<const LevelPair> pairs);
double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
std::vector<std::uint8_t> overlay(std::span<const std::uint8_t> gray, std::span<const std::uint8_t> mask, double alpha);

}  // namespace parallel

}  // namespace cvplan::vision
