#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "cvplan/vision/kernels.hpp"
#include "kernels_impl.hpp"

namespace cvplan::vision::parallel {

std::vector<double> resize_plane(std::span<const double> src, int width, int height, int out_width, int out_height,
                                 int order) {
  impl::check_resize(src, width, height, out_width, out_height);
  std::vector<double> out(static_cast<std::size_t>(out_width) * out_height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_height; ++y)
    for (int x = 0; x < out_width; ++x)
      out[static_cast<std::size_t>(y) * out_width + x] =
          impl::resize_sample(src, width, height, out_width, out_height, order, x, y);
  return out;
}

std::vector<std::uint64_t> histogram(std::span<const double> plane, double lo, double hi, int nbins) {
  impl::check_bins(nbins);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(nbins), 0);
  const auto n = static_cast<std::ptrdiff_t>(plane.size());
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(static_cast<std::size_t>(nbins), 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) ++local[common::bin_index(plane[i], lo, hi, nbins)];
#pragma omp critical
    for (int b = 0; b < nbins; ++b) counts[b] += local[b];
  }
  return counts;
}

std::vector<double> equalize(std::span<const double> plane, int nbins) {
  const auto [lo, hi] = impl::value_range(plane);
  const auto cdf = impl::cdf_from_counts(histogram(plane, lo, hi, nbins));
  std::vector<double> out(plane.size());
  const auto n = static_cast<std::ptrdiff_t>(plane.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = cdf[common::bin_index(plane[i], lo, hi, nbins)];
  return out;
}

std::vector<std::vector<double>> clahe_tile_maps(std::span<const double> plane, int width, int height, int nbins,
                                                 double clip_limit, int tiles_y, int tiles_x) {
  impl::check_bins(nbins);
  const auto [lo, hi] = impl::value_range(plane);
  std::vector<std::vector<double>> maps(static_cast<std::size_t>(tiles_y) * tiles_x);
  const int total = tiles_y * tiles_x;
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < total; ++t)
    maps[t] = impl::tile_map(plane, width, height, nbins, clip_limit, tiles_y, tiles_x, t / tiles_x, t % tiles_x, lo, hi);
  return maps;
}

std::vector<double> clahe(std::span<const double> plane, int width, int height, int nbins, double clip_limit,
                          int tiles_y, int tiles_x) {
  if (width < tiles_x || height < tiles_y) return equalize(plane, nbins);
  const auto [lo, hi] = impl::value_range(plane);
  const auto maps = clahe_tile_maps(plane, width, height, nbins, clip_limit, tiles_y, tiles_x);
  const auto ay = common::axis_weights(height, tiles_y);
  const auto ax = common::axis_weights(width, tiles_x);
  std::vector<double> out(plane.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto i = static_cast<std::size_t>(y) * width + x;
      out[i] = impl::clahe_blend(maps, tiles_x, ay, ax, x, y, common::bin_index(plane[i], lo, hi, nbins));
    }
  }
  return out;
}

Moments moments(std::span<const double> plane) {
  if (plane.empty()) return {};
  const auto size = plane.size();
  const auto blocks = static_cast<std::ptrdiff_t>((size + kReductionBlock - 1) / kReductionBlock);
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    double s = 0.0;
    for (std::size_t i = b * kReductionBlock; i < std::min(size, (b + 1) * kReductionBlock); ++i) s += plane[i];
    partial[b] = s;
  }
  double sum = 0.0;
  for (double p : partial) sum += p;
  const double mean = sum / static_cast<double>(size);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    double s = 0.0;
    for (std::size_t i = b * kReductionBlock; i < std::min(size, (b + 1) * kReductionBlock); ++i) {
      const double d = plane[i] - mean;
      s += d * d;
    }
    partial[b] = s;
  }
  double sq = 0.0;
  for (double p : partial) sq += p;
  return {mean, std::sqrt(sq / static_cast<double>(size))};
}

ThresholdScores threshold_scores(std::span<const LevelPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("threshold fit: no training pairs");
  std::vector<double> rows(pairs.size() * 256);
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  bool size_error = false;
#pragma omp parallel for schedule(dynamic) reduction(|| : size_error)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    if (pairs[p].levels.size() != pairs[p].mask.size()) {
      size_error = true;
      continue;
    }
    impl::dice_row(pairs[p], rows.data() + p * 256);
  }
  if (size_error) throw std::invalid_argument("threshold fit: image and mask sizes differ");
  return impl::mean_rows(rows, pairs.size());
}

double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dice: mask sizes differ");
  std::uint64_t na = 0, nb = 0, both = 0;
  const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static) reduction(+ : na, nb, both)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    na += a[i] != 0;
    nb += b[i] != 0;
    both += (a[i] != 0) && (b[i] != 0);
  }
  return common::dice_from_counts(both, na, nb);
}

std::vector<std::uint8_t> overlay(std::span<const std::uint8_t> gray, std::span<const std::uint8_t> mask, double alpha) {
  if (gray.size() != mask.size()) throw std::invalid_argument("overlay: image and mask sizes differ");
  std::vector<std::uint8_t> out(gray.size());
  const auto n = static_cast<std::ptrdiff_t>(gray.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = impl::blend_pixel(gray[i], mask[i] != 0, alpha);
  return out;
}

}  // namespace cvplan::vision::parallel
