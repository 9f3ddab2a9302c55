#include "cvplan/engine/bindings.hpp"

#include <fstream>
#include <sstream>

#include "cvplan/kg/parse.hpp"

namespace cvplan::engine {

namespace {

using kg::ParamValue;

std::string scalar_text(const ParamValue& v, const std::string& key) {
  switch (v.kind()) {
    case ParamValue::Kind::String: return v.as_string();
    case ParamValue::Kind::Integer:
    case ParamValue::Kind::Float:
    case ParamValue::Kind::Boolean: return v.display();
    default: throw std::runtime_error("bindings: value for '" + key + "' must be a scalar");
  }
}

std::map<std::string, std::string> read_section(const ParamValue& section, const std::string& name) {
  if (section.kind() == ParamValue::Kind::Null) return {};
  if (section.kind() != ParamValue::Kind::Map) throw std::runtime_error("bindings: '" + name + "' must be a mapping");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : section.fields()) out[placeholder_key(k)] = scalar_text(v, k);
  return out;
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::Learn ? "learn" : "think"; }

std::string placeholder_key(const std::string& name) {
  if (kg::is_placeholder(name)) return name;
  return "__" + name + "__";
}

RunBindings BindingsFile::for_mode(Mode mode, const std::filesystem::path& out_dir,
                                   const std::filesystem::path& default_weights_dir) const {
  RunBindings b;
  b.mode = mode;
  b.substitutions = common;
  for (const auto& [k, v] : mode == Mode::Learn ? learn : think) b.substitutions[k] = v;
  b.out_dir = out_dir;
  b.weights_dir = weights_dir ? (weights_dir->is_absolute() ? *weights_dir : base_dir / *weights_dir)
                              : default_weights_dir;
  b.base_dir = base_dir;
  return b;
}

BindingsFile parse_bindings(std::string_view text, const std::filesystem::path& base_dir) {
  const auto first = text.find_first_not_of(" \t\r\n");
  const auto root = first != std::string_view::npos && text[first] == '{' ? kg::load_json_tree(text)
                                                                          : kg::load_yaml_tree(text);
  if (root.kind() != ParamValue::Kind::Map) throw std::runtime_error("bindings: document must be a mapping");
  BindingsFile file;
  file.base_dir = base_dir;
  for (const auto& [key, value] : root.fields()) {
    if (key == "substitutions") file.common = read_section(value, key);
    else if (key == "learn") file.learn = read_section(value, key);
    else if (key == "think") file.think = read_section(value, key);
    else if (key == "weights_dir") file.weights_dir = scalar_text(value, key);
    else throw std::runtime_error("bindings: unknown key '" + key + "' (expected substitutions, learn, think, weights_dir)");
  }
  return file;
}

BindingsFile load_bindings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bindings file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_bindings(ss.str(), base);
}

kg::KnowledgeGraph bind_placeholders(const kg::KnowledgeGraph& graph, const RunBindings& bindings) {
  auto bound = graph;
  for (auto& [sn, supernode] : bound.supernodes) {
    for (auto& [cn, chunk] : supernode.chunks) {
      for (auto& [an, agent] : chunk.agents) {
        for (auto& [pn, value] : agent.params) {
          if (!value.is_string() || !kg::is_placeholder(value.as_string())) continue;
          const auto it = bindings.substitutions.find(value.as_string());
          if (it == bindings.substitutions.end()) throw PlaceholderUnbound(value.as_string(), {sn, cn, an, pn});
          value = ParamValue::string(it->second);
        }
      }
    }
  }
  return bound;
}

}  // namespace cvplan::engine
