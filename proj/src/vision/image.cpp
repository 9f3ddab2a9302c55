#include "cvplan/vision/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvplan::vision {

ImageBuffer::ImageBuffer(int w, int h, int c, double fill)
    : width(w), height(h), channels(c),
      samples(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {}

bool ImageBuffer::valid() const {
  return width > 0 && height > 0 && channels > 0 && samples.size() == pixel_count() * static_cast<std::size_t>(channels);
}

std::vector<double> ImageBuffer::channel(int c) const {
  if (c < 0 || c >= channels) throw std::out_of_range("channel " + std::to_string(c) + " out of range");
  std::vector<double> plane(pixel_count());
  for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = samples[i * static_cast<std::size_t>(channels) + c];
  return plane;
}

void ImageBuffer::set_channel(int c, const std::vector<double>& plane) {
  if (c < 0 || c >= channels) throw std::out_of_range("channel " + std::to_string(c) + " out of range");
  for (std::size_t i = 0; i < plane.size(); ++i) samples[i * static_cast<std::size_t>(channels) + c] = plane[i];
}

MaskBuffer::MaskBuffer(int w, int h, bool fill)
    : width(w), height(h), bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0) {}

std::size_t MaskBuffer::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

std::uint8_t quantize(double v) {
  if (std::isnan(v)) return 0;
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

std::vector<std::uint8_t> normalized_levels(const ImageBuffer& image, int c) {
  const auto plane = image.channel(c);
  std::vector<std::uint8_t> out(plane.size(), 0);
  if (plane.empty()) return out;
  const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
  const double span = *hi - *lo;
  if (span <= 0) return out;
  for (std::size_t i = 0; i < plane.size(); ++i) out[i] = quantize((plane[i] - *lo) / span * 255.0);
  return out;
}

GrayImage to_gray(const ImageBuffer& image, int c) {
  GrayImage gray{image.width, image.height, {}};
  const auto plane = image.channel(c);
  const bool in_range = std::all_of(plane.begin(), plane.end(), [](double v) { return v >= 0.0 && v <= 255.0; });
  if (!in_range) {
    gray.pixels = normalized_levels(image, c);
    return gray;
  }
  gray.pixels.resize(plane.size());
  std::transform(plane.begin(), plane.end(), gray.pixels.begin(), quantize);
  return gray;
}

ImageBuffer from_gray(const GrayImage& gray) {
  ImageBuffer image(gray.width, gray.height, 1);
  std::copy(gray.pixels.begin(), gray.pixels.end(), image.samples.begin());
  return image;
}

MaskBuffer mask_from_gray(const GrayImage& gray) {
  MaskBuffer mask(gray.width, gray.height);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i) mask.bits[i] = gray.pixels[i] != 0 ? 1 : 0;
  return mask;
}

GrayImage mask_to_gray(const MaskBuffer& mask) {
  GrayImage gray{mask.width, mask.height, std::vector<std::uint8_t>(mask.bits.size())};
  for (std::size_t i = 0; i < mask.bits.size(); ++i) gray.pixels[i] = mask.bits[i] ? 255 : 0;
  return gray;
}

}  // namespace cvplan::vision
