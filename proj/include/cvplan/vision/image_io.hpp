#pragma once

#include <filesystem>
#include <stdexcept>

#include "cvplan/vision/image.hpp"

namespace cvplan::vision {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// PNG (any colour type, converted to gray) or binary PGM (P5, maxval <= 255),
/// chosen by magic bytes.
GrayImage read_gray(const std::filesystem::path& path);

/// 8-bit grayscale PNG; parent directories are created.
void write_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace cvplan::vision
