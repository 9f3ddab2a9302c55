#pragma once

// Per-element building blocks shared by the serial and OpenMP kernels so both
// evaluate identical expressions.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "cvplan/vision/kernels.hpp"

namespace cvplan::vision::impl {

double bilinear_at(std::span<const double> src, int width, int height, double sx, double sy);
double resize_sample(std::span<const double> src, int width, int height, int out_width, int out_height, int order,
                     int x, int y);
void check_resize(std::span<const double> src, int width, int height, int out_width, int out_height);
void check_bins(int nbins);
std::pair<double, double> value_range(std::span<const double> plane);
std::vector<double> cdf_from_counts(const std::vector<std::uint64_t>& counts);
double clahe_blend(const std::vector<std::vector<double>>& maps, int tiles_x, const common::AxisWeights& ay,
                   const common::AxisWeights& ax, int x, int y, int bin);
std::vector<double> tile_map(std::span<const double> plane, int width, int height, int nbins, double clip_limit,
                             int tiles_y, int tiles_x, int ty, int tx, double lo, double hi);
void dice_row(const LevelPair& pair, double* row);
ThresholdScores mean_rows(const std::vector<double>& rows, std::size_t n);
std::uint8_t blend_pixel(std::uint8_t g, bool inside, double alpha);

}  // namespace cvplan::vision::impl
