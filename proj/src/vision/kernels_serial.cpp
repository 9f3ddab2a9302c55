#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cvplan/vision/kernels.hpp"
#include "kernels_impl.hpp"

namespace cvplan::vision {

namespace common {

int bin_index(double v, double lo, double hi, int nbins) {
  if (!(hi > lo)) return 0;
  const auto b = static_cast<long long>(std::floor((v - lo) / (hi - lo) * nbins));
  return static_cast<int>(std::clamp<long long>(b, 0, nbins - 1));
}

std::vector<double> clipped_cdf(std::vector<double> hist, double clip) {
  double total = 0.0;
  for (double h : hist) total += h;
  if (total <= 0.0) return std::vector<double>(hist.size(), 0.0);
  double excess = 0.0;
  for (double& h : hist) {
    if (h > clip) {
      excess += h - clip;
      h = clip;
    }
  }
  const double share = excess / static_cast<double>(hist.size());
  std::vector<double> cdf(hist.size());
  double run = 0.0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    run += hist[i] + share;
    cdf[i] = run / total;
  }
  cdf.back() = 1.0;
  return cdf;
}

double clahe_clip(double clip_limit, std::size_t tile_pixels) {
  return std::max(1.0, clip_limit * static_cast<double>(tile_pixels));
}

AxisWeights axis_weights(int length, int tiles) {
  std::vector<double> centre(static_cast<std::size_t>(tiles));
  for (int t = 0; t < tiles; ++t)
    centre[t] = 0.5 * (tile_start(t, length, tiles) + tile_start(t + 1, length, tiles));
  AxisWeights out;
  out.lo.resize(length);
  out.hi.resize(length);
  out.w.resize(length);
  int t = 0;
  for (int i = 0; i < length; ++i) {
    const double p = i + 0.5;
    while (t + 1 < tiles && centre[t + 1] <= p) ++t;
    if (p <= centre[0]) {
      out.lo[i] = out.hi[i] = 0;
      out.w[i] = 0.0;
    } else if (t + 1 >= tiles) {
      out.lo[i] = out.hi[i] = tiles - 1;
      out.w[i] = 0.0;
    } else {
      out.lo[i] = t;
      out.hi[i] = t + 1;
      out.w[i] = (p - centre[t]) / (centre[t + 1] - centre[t]);
    }
  }
  return out;
}

double dice_from_counts(std::uint64_t overlap, std::uint64_t a, std::uint64_t b) {
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(a + b);
}

}  // namespace common

namespace impl {

double bilinear_at(std::span<const double> src, int width, int height, double sx, double sy) {
  sx = std::clamp(sx, 0.0, static_cast<double>(width - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(sx);
  const int y0 = static_cast<int>(sy);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  const auto px = [&](int x, int y) { return src[static_cast<std::size_t>(y) * width + x]; };
  const double top = (1.0 - fx) * px(x0, y0) + fx * px(x1, y0);
  const double bottom = (1.0 - fx) * px(x0, y1) + fx * px(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

double resize_sample(std::span<const double> src, int width, int height, int out_width, int out_height, int order,
                     int x, int y) {
  const double scale_x = static_cast<double>(width) / out_width;
  const double scale_y = static_cast<double>(height) / out_height;
  if (order == 0) {
    const int sx = std::min(width - 1, static_cast<int>(std::floor((x + 0.5) * scale_x)));
    const int sy = std::min(height - 1, static_cast<int>(std::floor((y + 0.5) * scale_y)));
    return src[static_cast<std::size_t>(sy) * width + sx];
  }
  return bilinear_at(src, width, height, (x + 0.5) * scale_x - 0.5, (y + 0.5) * scale_y - 0.5);
}

void check_resize(std::span<const double> src, int width, int height, int out_width, int out_height) {
  if (width <= 0 || height <= 0 || out_width <= 0 || out_height <= 0)
    throw std::invalid_argument("resize: dimensions must be positive");
  if (src.size() != static_cast<std::size_t>(width) * height) throw std::invalid_argument("resize: plane size mismatch");
}

std::pair<double, double> value_range(std::span<const double> plane) {
  if (plane.empty()) return {0.0, 0.0};
  const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
  return {*lo, *hi};
}

std::vector<double> cdf_from_counts(const std::vector<std::uint64_t>& counts) {
  std::vector<double> hist(counts.begin(), counts.end());
  return common::clipped_cdf(std::move(hist), std::numeric_limits<double>::infinity());
}

double clahe_blend(const std::vector<std::vector<double>>& maps, int tiles_x, const common::AxisWeights& ay,
                   const common::AxisWeights& ax, int x, int y, int bin) {
  const auto m = [&](int ty, int tx) { return maps[static_cast<std::size_t>(ty) * tiles_x + tx][bin]; };
  const double wy = ay.w[y];
  const double wx = ax.w[x];
  const double top = (1.0 - wx) * m(ay.lo[y], ax.lo[x]) + wx * m(ay.lo[y], ax.hi[x]);
  const double bottom = (1.0 - wx) * m(ay.hi[y], ax.lo[x]) + wx * m(ay.hi[y], ax.hi[x]);
  return (1.0 - wy) * top + wy * bottom;
}

std::vector<double> tile_map(std::span<const double> plane, int width, int height, int nbins, double clip_limit,
                             int tiles_y, int tiles_x, int ty, int tx, double lo, double hi) {
  const int y0 = common::tile_start(ty, height, tiles_y);
  const int y1 = common::tile_start(ty + 1, height, tiles_y);
  const int x0 = common::tile_start(tx, width, tiles_x);
  const int x1 = common::tile_start(tx + 1, width, tiles_x);
  std::vector<double> hist(static_cast<std::size_t>(nbins), 0.0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) hist[common::bin_index(plane[static_cast<std::size_t>(y) * width + x], lo, hi, nbins)] += 1.0;
  const auto pixels = static_cast<std::size_t>(y1 - y0) * static_cast<std::size_t>(x1 - x0);
  return common::clipped_cdf(std::move(hist), common::clahe_clip(clip_limit, pixels));
}

void check_bins(int nbins) {
  if (nbins < 2) throw std::invalid_argument("nbins must be at least 2");
}

std::array<std::uint64_t, 512> level_counts(const LevelPair& pair) {
  if (pair.levels.size() != pair.mask.size()) throw std::invalid_argument("threshold fit: image and mask sizes differ");
  // [0, 256): all pixels per level, [256, 512): mask pixels per level.
  std::array<std::uint64_t, 512> counts{};
  for (std::size_t i = 0; i < pair.levels.size(); ++i) {
    ++counts[pair.levels[i]];
    if (pair.mask[i]) ++counts[256 + pair.levels[i]];
  }
  return counts;
}

void dice_row(const LevelPair& pair, double* row) {
  const auto counts = level_counts(pair);
  std::uint64_t mask_total = 0;
  for (int v = 0; v < 256; ++v) mask_total += counts[256 + v];
  std::uint64_t ge = 0;
  std::uint64_t overlap = 0;
  for (int t = 255; t >= 0; --t) {
    ge += counts[t];
    overlap += counts[256 + t];
    row[t] = common::dice_from_counts(overlap, ge, mask_total);
  }
}

ThresholdScores mean_rows(const std::vector<double>& rows, std::size_t n) {
  ThresholdScores out{};
  for (std::size_t p = 0; p < n; ++p)
    for (int t = 0; t < 256; ++t) out[t] += rows[p * 256 + t];
  for (double& s : out) s /= static_cast<double>(n);
  return out;
}

std::uint8_t blend_pixel(std::uint8_t g, bool inside, double alpha) {
  return inside ? quantize((1.0 - alpha) * g + alpha * 255.0) : g;
}

}  // namespace impl

namespace serial {

std::vector<double> resize_plane(std::span<const double> src, int width, int height, int out_width, int out_height,
                                 int order) {
  impl::check_resize(src, width, height, out_width, out_height);
  std::vector<double> out(static_cast<std::size_t>(out_width) * out_height);
  for (int y = 0; y < out_height; ++y)
    for (int x = 0; x < out_width; ++x)
      out[static_cast<std::size_t>(y) * out_width + x] =
          impl::resize_sample(src, width, height, out_width, out_height, order, x, y);
  return out;
}

std::vector<std::uint64_t> histogram(std::span<const double> plane, double lo, double hi, int nbins) {
  impl::check_bins(nbins);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(nbins), 0);
  for (double v : plane) ++counts[common::bin_index(v, lo, hi, nbins)];
  return counts;
}

std::vector<double> equalize(std::span<const double> plane, int nbins) {
  const auto [lo, hi] = impl::value_range(plane);
  const auto cdf = impl::cdf_from_counts(histogram(plane, lo, hi, nbins));
  std::vector<double> out(plane.size());
  for (std::size_t i = 0; i < plane.size(); ++i) out[i] = cdf[common::bin_index(plane[i], lo, hi, nbins)];
  return out;
}

std::vector<std::vector<double>> clahe_tile_maps(std::span<const double> plane, int width, int height, int nbins,
                                                 double clip_limit, int tiles_y, int tiles_x) {
  impl::check_bins(nbins);
  const auto [lo, hi] = impl::value_range(plane);
  std::vector<std::vector<double>> maps;
  for (int ty = 0; ty < tiles_y; ++ty)
    for (int tx = 0; tx < tiles_x; ++tx)
      maps.push_back(impl::tile_map(plane, width, height, nbins, clip_limit, tiles_y, tiles_x, ty, tx, lo, hi));
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
  const std::size_t blocks = (plane.size() + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t i = b * kReductionBlock; i < std::min(plane.size(), (b + 1) * kReductionBlock); ++i)
      partial[b] += plane[i];
  double sum = 0.0;
  for (double p : partial) sum += p;
  const double mean = sum / static_cast<double>(plane.size());
  std::fill(partial.begin(), partial.end(), 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t i = b * kReductionBlock; i < std::min(plane.size(), (b + 1) * kReductionBlock); ++i) {
      const double d = plane[i] - mean;
      partial[b] += d * d;
    }
  }
  double sq = 0.0;
  for (double p : partial) sq += p;
  return {mean, std::sqrt(sq / static_cast<double>(plane.size()))};
}

ThresholdScores threshold_scores(std::span<const LevelPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("threshold fit: no training pairs");
  std::vector<double> rows(pairs.size() * 256);
  for (std::size_t p = 0; p < pairs.size(); ++p) impl::dice_row(pairs[p], rows.data() + p * 256);
  return impl::mean_rows(rows, pairs.size());
}

double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dice: mask sizes differ");
  std::uint64_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] != 0;
    nb += b[i] != 0;
    both += (a[i] != 0) && (b[i] != 0);
  }
  return common::dice_from_counts(both, na, nb);
}

std::vector<std::uint8_t> overlay(std::span<const std::uint8_t> gray, std::span<const std::uint8_t> mask, double alpha) {
  if (gray.size() != mask.size()) throw std::invalid_argument("overlay: image and mask sizes differ");
  std::vector<std::uint8_t> out(gray.size());
  for (std::size_t i = 0; i < gray.size(); ++i) out[i] = impl::blend_pixel(gray[i], mask[i] != 0, alpha);
  return out;
}

}  // namespace serial

}  // namespace cvplan::vision
