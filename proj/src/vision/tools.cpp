#include "cvplan/vision/tools.hpp"

#include <algorithm>
#include <cmath>

namespace cvplan::vision {

namespace {

void require_image(const ImageBuffer& image, const char* tool) {
  if (!image.valid()) throw ToolError(std::string(tool) + ": empty or malformed image");
}

std::vector<int> selected_channels(const ImageBuffer& image, std::optional<int> channel, const char* tool) {
  if (!channel) {
    std::vector<int> all(static_cast<std::size_t>(image.channels));
    for (int c = 0; c < image.channels; ++c) all[c] = c;
    return all;
  }
  if (*channel < 0 || *channel >= image.channels) {
    throw ToolError(std::string(tool) + ": channel " + std::to_string(*channel) + " out of range for " +
                    std::to_string(image.channels) + "-channel image");
  }
  return {*channel};
}

bool is_8bit_integral(const std::vector<double>& plane) {
  return std::all_of(plane.begin(), plane.end(),
                     [](double v) { return v >= 0.0 && v <= 255.0 && v == std::floor(v); });
}

template <typename Map>
ImageBuffer equalize_channels(const ImageBuffer& image, std::optional<int> channel, const char* tool, Map&& map) {
  require_image(image, tool);
  ImageBuffer out = image;
  for (int c : selected_channels(image, channel, tool)) {
    const auto plane = image.channel(c);
    auto mapped = map(plane);
    if (is_8bit_integral(plane))
      for (double& v : mapped) v *= 255.0;
    out.set_channel(c, mapped);
  }
  return out;
}

}  // namespace

ImageBuffer resize(const ImageBuffer& image, const ResizeOptions& options) {
  require_image(image, "resize");
  if (options.rows <= 0 || options.cols <= 0) throw ToolError("resize: target_shape must be two positive integers");
  ImageBuffer out(options.cols, options.rows, image.channels);
  for (int c = 0; c < image.channels; ++c) {
    auto plane = parallel::resize_plane(image.channel(c), image.width, image.height, options.cols, options.rows,
                                        std::max(0, options.order));
    if (!options.preserve_range)
      for (double& v : plane) v /= 255.0;
    out.set_channel(c, plane);
  }
  return out;
}

ImageBuffer expand_channels(const ImageBuffer& image, int number_of_channels) {
  require_image(image, "expand_channels");
  if (number_of_channels < 1) throw ToolError("expand_channels: number_of_channels must be at least 1");
  if (image.channels == number_of_channels) return image;
  const auto base = image.channel(0);
  ImageBuffer out(image.width, image.height, number_of_channels);
  for (int c = 0; c < number_of_channels; ++c) out.set_channel(c, base);
  return out;
}

ImageBuffer clahe(const ImageBuffer& image, int nbins, double clip_limit, std::optional<int> channel) {
  if (nbins < 2) throw ToolError("clahe: nbins must be at least 2");
  if (!(clip_limit > 0.0 && clip_limit <= 1.0)) throw ToolError("clahe: clip_limit must lie in (0, 1]");
  return equalize_channels(image, channel, "clahe", [&](const std::vector<double>& plane) {
    return parallel::clahe(plane, image.width, image.height, nbins, clip_limit);
  });
}

ImageBuffer histeq(const ImageBuffer& image, int nbins, std::optional<int> channel) {
  if (nbins < 2) throw ToolError("histeq: nbins must be at least 2");
  return equalize_channels(image, channel, "histeq",
                           [&](const std::vector<double>& plane) { return parallel::equalize(plane, nbins); });
}

ImageBuffer z_score(const ImageBuffer& image, std::optional<int> channel) {
  require_image(image, "z_score");
  ImageBuffer out = image;
  for (int c : selected_channels(image, channel, "z_score")) {
    auto plane = image.channel(c);
    const auto m = parallel::moments(plane);
    for (double& v : plane) v = m.stddev > 0.0 ? (v - m.mean) / m.stddev : 0.0;
    out.set_channel(c, plane);
  }
  return out;
}

ThresholdModel threshold_segmentation_learn(const std::vector<TrainingCase>& cases) {
  if (cases.empty()) throw EmptyTrainingSet();
  std::vector<LevelPair> pairs;
  pairs.reserve(cases.size());
  for (const auto& c : cases) {
    if (c.levels.size() != c.mask.bits.size()) throw ToolError("threshold fit: image and reference mask sizes differ");
    pairs.push_back({c.levels, c.mask.bits});
  }
  const auto scores = parallel::threshold_scores(pairs);
  ThresholdModel best{0, scores[0]};
  for (int t = 1; t < 256; ++t)
    if (scores[t] > best.score) best = {t, scores[t]};
  return best;
}

MaskBuffer threshold_segmentation_infer(const std::vector<std::uint8_t>& levels, int width, int height, int threshold,
                                        double prediction_threshold) {
  if (levels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw ToolError("segmentation: level map size mismatch");
  MaskBuffer mask(width, height);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double score = levels[i] >= threshold ? 1.0 : 0.0;
    mask.bits[i] = score >= prediction_threshold ? 1 : 0;
  }
  return mask;
}

MaskBuffer resize_mask_nearest(const MaskBuffer& mask, int width, int height) {
  if (mask.width == width && mask.height == height) return mask;
  std::vector<double> plane(mask.bits.begin(), mask.bits.end());
  const auto scaled = parallel::resize_plane(plane, mask.width, mask.height, width, height, 0);
  MaskBuffer out(width, height);
  for (std::size_t i = 0; i < scaled.size(); ++i) out.bits[i] = scaled[i] != 0.0 ? 1 : 0;
  return out;
}

GrayImage render_overlay(const ImageBuffer& image, const MaskBuffer* mask, double mask_alpha) {
  require_image(image, "save_image");
  auto gray = to_gray(image, 0);
  if (mask == nullptr) return gray;
  if (mask->width != image.width || mask->height != image.height) {
    throw ToolError("save_image: mask is " + std::to_string(mask->width) + "x" + std::to_string(mask->height) +
                    " but image is " + std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  if (!(mask_alpha >= 0.0 && mask_alpha <= 1.0)) throw ToolError("save_image: mask_alpha must lie in [0, 1]");
  gray.pixels = parallel::overlay(gray.pixels, mask->bits, mask_alpha);
  return gray;
}

double dice(const MaskBuffer& a, const MaskBuffer& b) {
  if (a.width != b.width || a.height != b.height) throw ToolError("dice: mask dimensions differ");
  return parallel::dice(a.bits, b.bits);
}

}  // namespace cvplan::vision
