#pragma once

#include <cstdint>
#include <vector>

namespace cvplan::vision {

/// Row-major, channel-interleaved float64 samples.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> samples;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c = 1, double fill = 0.0);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool valid() const;
  double at(int x, int y, int c = 0) const { return samples[index(x, y, c)]; }
  double& at(int x, int y, int c = 0) { return samples[index(x, y, c)]; }

  /// One channel as a dense plane.
  std::vector<double> channel(int c) const;
  void set_channel(int c, const std::vector<double>& plane);

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels) +
           static_cast<std::size_t>(c);
  }
};

/// Row-major 0/1 bytes.
struct MaskBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  MaskBuffer() = default;
  MaskBuffer(int w, int h, bool fill = false);

  std::size_t count() const;
  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + x] != 0; }
  bool operator==(const MaskBuffer&) const = default;
};

/// 8-bit single-channel raster, the at-rest file format.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  bool operator==(const GrayImage&) const = default;
};

/// Round half away from zero, clamp to [0, 255].
std::uint8_t quantize(double v);

/// Channel `c` as 8-bit levels: quantized directly when every sample lies in
/// [0, 255], otherwise min-max normalized to [0, 255] first.
GrayImage to_gray(const ImageBuffer& image, int c = 0);

/// Channel `c` min-max normalized to [0, 255] and quantized (constant -> 0).
std::vector<std::uint8_t> normalized_levels(const ImageBuffer& image, int c = 0);

ImageBuffer from_gray(const GrayImage& gray);
MaskBuffer mask_from_gray(const GrayImage& gray);
GrayImage mask_to_gray(const MaskBuffer& mask);

}  // namespace cvplan::vision
