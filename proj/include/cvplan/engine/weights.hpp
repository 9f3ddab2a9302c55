#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace cvplan::engine {

class MissingWeights : public std::runtime_error {
 public:
  MissingWeights(const std::string& agent_path, const std::filesystem::path& file, const std::string& hint = {})
      : std::runtime_error(agent_path + ": no trained weights at '" + file.string() + "'" +
                           (hint.empty() ? std::string("; run learn first") : "; " + hint)),
        file_(file) {}
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
};

/// Learned state of the threshold segmenter.
struct SegmenterWeights {
  std::string tool = "tf2_segmentation";
  int version = 1;
  /// On the per-case min-max [0, 255] level scale.
  int threshold = 0;
  std::string intensity_scale = "minmax_0_255";
  std::size_t train_cases = 0;
  double train_mean_dice = 0.0;

  bool operator==(const SegmenterWeights&) const = default;
};

std::string serialize_weights(const SegmenterWeights& weights);
SegmenterWeights parse_weights(const std::string& text);

void save_weights(const std::filesystem::path& file, const SegmenterWeights& weights);
/// Throws MissingWeights when the file does not exist.
SegmenterWeights load_weights(const std::filesystem::path& file, const std::string& agent_path);

/// `<weights_dir>/<weights_path>/weights.json` (absolute weights_path used as
/// is) or `<weights_dir>/<supernode>/weights.json` when weights_path is absent.
std::filesystem::path weights_file(const std::filesystem::path& weights_dir, const std::string& supernode,
                                   const std::optional<std::string>& weights_path);

}  // namespace cvplan::engine
