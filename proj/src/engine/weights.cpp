#include "cvplan/engine/weights.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace cvplan::engine {

std::string serialize_weights(const SegmenterWeights& w) {
  nlohmann::ordered_json j;
  j["tool"] = w.tool;
  j["version"] = w.version;
  j["threshold"] = w.threshold;
  j["intensity_scale"] = w.intensity_scale;
  j["train_cases"] = w.train_cases;
  j["train_mean_dice"] = w.train_mean_dice;
  return j.dump(2) + "\n";
}

SegmenterWeights parse_weights(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SegmenterWeights w;
    w.tool = j.at("tool").get<std::string>();
    w.version = j.at("version").get<int>();
    w.threshold = j.at("threshold").get<int>();
    w.intensity_scale = j.at("intensity_scale").get<std::string>();
    w.train_cases = j.value("train_cases", std::size_t{0});
    w.train_mean_dice = j.value("train_mean_dice", 0.0);
    if (w.version != 1) throw std::runtime_error("unsupported weights version " + std::to_string(w.version));
    if (w.threshold < 0 || w.threshold > 255) throw std::runtime_error("threshold out of range");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed weights file: ") + e.what());
  }
}

void save_weights(const std::filesystem::path& file, const SegmenterWeights& weights) {
  std::error_code ec;
  std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << serialize_weights(weights);
  if (!out) throw std::runtime_error("cannot write weights file '" + file.string() + "'");
}

SegmenterWeights load_weights(const std::filesystem::path& file, const std::string& agent_path) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw MissingWeights(agent_path, file);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_weights(ss.str());
}

std::filesystem::path weights_file(const std::filesystem::path& weights_dir, const std::string& supernode,
                                   const std::optional<std::string>& weights_path) {
  if (!weights_path || weights_path->empty()) return weights_dir / supernode / "weights.json";
  const std::filesystem::path p(*weights_path);
  return (p.is_absolute() ? p : weights_dir / p) / "weights.json";
}

}  // namespace cvplan::engine
