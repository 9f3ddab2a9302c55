#pragma once

// Desk-scale agent implementations. Every function is pure: same inputs and
// parameters, same bits out.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvplan/vision/image.hpp"
#include "cvplan/vision/kernels.hpp"

namespace cvplan::vision {

class ToolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyTrainingSet : public std::runtime_error {
 public:
  EmptyTrainingSet() : std::runtime_error("empty training set: no image/mask pairs") {}
};

struct ResizeOptions {
  int rows = 0;
  int cols = 0;
  /// 0 nearest neighbour; 1 and above bilinear (bicubic is approximated).
  int order = 1;
  /// When false, values are rescaled from the 8-bit range to [0, 1].
  bool preserve_range = false;
};

ImageBuffer resize(const ImageBuffer& image, const ResizeOptions& options);

/// Sets the channel count by replicating channel 0.
ImageBuffer expand_channels(const ImageBuffer& image, int number_of_channels);

/// `channel` absent: every channel. Output is the CDF scaled by 255 when the
/// channel holds integers in [0, 255], else the CDF itself in [0, 1].
ImageBuffer clahe(const ImageBuffer& image, int nbins, double clip_limit, std::optional<int> channel);
ImageBuffer histeq(const ImageBuffer& image, int nbins, std::optional<int> channel);

/// (x - mean) / std with population std; a constant channel becomes zeros.
ImageBuffer z_score(const ImageBuffer& image, std::optional<int> channel);

struct TrainingCase {
  std::vector<std::uint8_t> levels;
  MaskBuffer mask;
};

struct ThresholdModel {
  int threshold = 0;
  /// Mean Dice at the chosen threshold.
  double score = 0.0;
};

/// argmax over t in 0..255 of mean Dice({level >= t}, mask); ties go to the
/// smallest t.
ThresholdModel threshold_segmentation_learn(const std::vector<TrainingCase>& cases);

/// Score map s = [level >= t]; mask = {s >= prediction_threshold}.
MaskBuffer threshold_segmentation_infer(const std::vector<std::uint8_t>& levels, int width, int height,
                                        int threshold, double prediction_threshold);

MaskBuffer resize_mask_nearest(const MaskBuffer& mask, int width, int height);

/// 8-bit rendering of channel 0 with the mask blended towards white.
GrayImage render_overlay(const ImageBuffer& image, const MaskBuffer* mask, double mask_alpha);

double dice(const MaskBuffer& a, const MaskBuffer& b);

}  // namespace cvplan::vision
