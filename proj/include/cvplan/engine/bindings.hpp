#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "cvplan/kg/model.hpp"

namespace cvplan::engine {

enum class Mode { Learn, Think };

std::string_view to_string(Mode mode);

class PlaceholderUnbound : public std::runtime_error {
 public:
  PlaceholderUnbound(const std::string& placeholder, const kg::SourcePath& path)
      : std::runtime_error(path.render() + ": placeholder " + placeholder + " has no binding"),
        placeholder_(placeholder) {}
  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

struct RunBindings {
  /// Keyed by the full placeholder text, e.g. "__input_images__".
  std::map<std::string, std::string> substitutions;
  Mode mode = Mode::Think;
  /// Where this run writes its artifacts and blackboard.json.
  std::filesystem::path out_dir;
  std::filesystem::path weights_dir;
  /// Relative manifest paths resolve against this directory.
  std::filesystem::path base_dir;
};

/// A bindings document:
///   substitutions: {input_images: train.csv, header_params: "image,mask"}
///   learn: {...}   think: {...}   weights_dir: weights
/// `learn`/`think` override `substitutions` for that mode. Keys may be written
/// with or without the surrounding double underscores.
struct BindingsFile {
  std::map<std::string, std::string> common;
  std::map<std::string, std::string> learn;
  std::map<std::string, std::string> think;
  std::optional<std::filesystem::path> weights_dir;
  std::filesystem::path base_dir;

  RunBindings for_mode(Mode mode, const std::filesystem::path& out_dir,
                       const std::filesystem::path& default_weights_dir) const;
};

/// JSON or YAML. Throws kg::SyntaxError or std::runtime_error.
BindingsFile load_bindings(const std::filesystem::path& path);
BindingsFile parse_bindings(std::string_view text, const std::filesystem::path& base_dir);

/// "input_images" and "__input_images__" both become "__input_images__".
std::string placeholder_key(const std::string& name);

/// Copy of the graph with every placeholder parameter replaced. Throws
/// PlaceholderUnbound naming the first one without a substitution.
kg::KnowledgeGraph bind_placeholders(const kg::KnowledgeGraph& graph, const RunBindings& bindings);

}  // namespace cvplan::engine
