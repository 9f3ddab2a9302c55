#pragma once

// Per-tool contracts in the agent dictionary format:
//
//   { "<tool>": { "info": { "agent_input_def":     { "<slot>": {"alternate_names": [..],
//                                                              "optional": false,
//                                                              "type": "<data kind>"} },
//                           "agent_output_def":    { "<slot>": {"type": "<data kind>"} },
//                           "agent_parameter_def": { "<param>": {"optional": true} } },
//                 "path": "..." } }
//
// Three optional `info` keys extend the format: "trainable" (bool),
// "param_format" (param -> rule object) and "requires_agents" (list).

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cvplan/kg/dag.hpp"
#include "cvplan/kg/model.hpp"

namespace cvplan::registry {

enum class DataKind { Image, Mask, WeightsFile, FilePath, Scalar };

std::string_view to_string(DataKind kind);
std::optional<DataKind> data_kind_from_string(std::string_view name);

struct PortSpec {
  std::string name;
  std::vector<std::string> alternate_names;
  bool optional = false;
  DataKind kind = DataKind::Image;

  bool answers_to(std::string_view key) const;
  bool operator==(const PortSpec&) const = default;
};

struct ParamSpec {
  std::string name;
  bool optional = false;
  bool operator==(const ParamSpec&) const = default;
};

/// Value-format constraint layered on top of the dictionary.
struct FormatRule {
  enum class Kind { StringifiedList };
  Kind kind = Kind::StringifiedList;
  /// Exact element count, when constrained.
  std::optional<std::size_t> length;
  bool positive_integers = false;

  /// A literal that satisfies the rule, quoted as it should appear in YAML.
  std::string example() const;
  bool operator==(const FormatRule&) const = default;
};

struct ToolSpec {
  std::string name;
  std::vector<PortSpec> inputs;
  std::vector<PortSpec> outputs;
  std::vector<ParamSpec> params;
  std::string path;
  bool trainable = false;
  std::map<std::string, FormatRule> param_format_rules;
  /// Agents that must appear upstream in the same supernode.
  std::vector<std::string> requires_agents;

  const ParamSpec* find_param(std::string_view param) const;
  /// Index of the input port answering to `key` (name or alternate).
  std::optional<std::size_t> find_input(std::string_view key) const;
  /// Kind of the message this tool posts (its first output).
  std::optional<DataKind> output_kind() const;
  bool operator==(const ToolSpec&) const = default;
};

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& tool, const std::string& what)
      : std::runtime_error("tool '" + tool + "': " + what), tool_(tool) {}
  const std::string& tool() const { return tool_; }

 private:
  std::string tool_;
};

class ToolRegistry {
 public:
  ToolRegistry() = default;
  explicit ToolRegistry(std::vector<ToolSpec> tools);

  const ToolSpec* lookup(std::string_view name) const;
  bool contains(std::string_view name) const { return lookup(name) != nullptr; }
  const std::vector<ToolSpec>& tools() const { return tools_; }
  std::vector<std::string> names() const;

  /// Input-link classifier for agent-level keys (see collect_links).
  kg::AgentPortPredicate agent_port_predicate() const;

  bool operator==(const ToolRegistry&) const = default;

 private:
  std::vector<ToolSpec> tools_;
};

/// Parses the dictionary document. Missing "optional" means required.
/// Throws kg::SyntaxError for malformed JSON, SchemaError for missing keys.
ToolRegistry load_registry(std::string_view text);

/// Dictionary document for the registry (extension keys included).
std::string serialize_registry(const ToolRegistry& registry);

/// Registry covering every agent the shipped plans and examples use.
const ToolRegistry& builtin_registry();

/// The builtin registry's dictionary text.
std::string_view builtin_registry_text();

/// Outcome of checking one value against a param contract.
struct ParamCheck {
  bool ok = true;
  std::string violation;
};

/// Checks a value against its format rule, if any. The violation text names
/// the expected format and shows a correct literal.
ParamCheck check_param(const kg::ParamValue& value, const ParamSpec& spec, const FormatRule* rule);

}  // namespace cvplan::registry
