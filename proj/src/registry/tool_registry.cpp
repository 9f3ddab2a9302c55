#include "cvplan/registry/tool_registry.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "cvplan/kg/parse.hpp"

namespace cvplan::registry {

namespace {

using kg::ParamValue;
using ordered_json = nlohmann::ordered_json;

const ParamValue* field(const ParamValue& obj, std::string_view key) {
  if (obj.kind() != ParamValue::Kind::Map) return nullptr;
  for (const auto& [k, v] : obj.fields())
    if (k == key) return &v;
  return nullptr;
}

bool read_optional(const std::string& tool, const ParamValue& def) {
  const auto* opt = field(def, "optional");
  if (opt == nullptr || opt->kind() == ParamValue::Kind::Null) return false;
  if (opt->kind() != ParamValue::Kind::Boolean) throw SchemaError(tool, "\"optional\" must be a boolean");
  return opt->as_bool();
}

std::vector<PortSpec> read_ports(const std::string& tool, const ParamValue& defs, const char* section) {
  if (defs.kind() != ParamValue::Kind::Map)
    throw SchemaError(tool, std::string(section) + " must be an object");
  std::vector<PortSpec> ports;
  for (const auto& [slot, def] : defs.fields()) {
    if (def.kind() != ParamValue::Kind::Map)
      throw SchemaError(tool, std::string(section) + "." + slot + " must be an object");
    PortSpec port;
    port.name = slot;
    port.optional = read_optional(tool, def);
    const auto* type = field(def, "type");
    if (type == nullptr || !type->is_string())
      throw SchemaError(tool, std::string(section) + "." + slot + " has no \"type\"");
    const auto kind = data_kind_from_string(type->as_string());
    if (!kind) throw SchemaError(tool, "unknown data type '" + type->as_string() + "'");
    port.kind = *kind;
    if (const auto* alts = field(def, "alternate_names")) {
      if (alts->kind() != ParamValue::Kind::List)
        throw SchemaError(tool, std::string(section) + "." + slot + ".alternate_names must be a list");
      for (const auto& a : alts->items()) {
        if (!a.is_string()) throw SchemaError(tool, "alternate names must be strings");
        if (a.as_string() == slot) throw SchemaError(tool, "alternate name repeats slot '" + slot + "'");
        port.alternate_names.push_back(a.as_string());
      }
    }
    ports.push_back(std::move(port));
  }
  return ports;
}

FormatRule read_rule(const std::string& tool, const std::string& param, const ParamValue& def) {
  FormatRule rule;
  const auto* format = field(def, "format");
  if (format == nullptr || !format->is_string() || format->as_string() != "stringified_list")
    throw SchemaError(tool, "param_format." + param + " must have \"format\": \"stringified_list\"");
  if (const auto* len = field(def, "length")) {
    if (len->kind() != ParamValue::Kind::Integer || len->as_integer() < 0)
      throw SchemaError(tool, "param_format." + param + ".length must be a non-negative integer");
    rule.length = static_cast<std::size_t>(len->as_integer());
  }
  if (const auto* elem = field(def, "element")) {
    if (!elem->is_string() || elem->as_string() != "positive_integer")
      throw SchemaError(tool, "param_format." + param + ".element must be \"positive_integer\"");
    rule.positive_integers = true;
  }
  return rule;
}

ToolSpec read_tool(const std::string& name, const ParamValue& entry) {
  if (entry.kind() != ParamValue::Kind::Map) throw SchemaError(name, "entry must be an object");
  const auto* info = field(entry, "info");
  if (info == nullptr || info->kind() != ParamValue::Kind::Map) throw SchemaError(name, "missing \"info\"");

  ToolSpec spec;
  spec.name = name;
  for (const char* key : {"agent_input_def", "agent_output_def", "agent_parameter_def"})
    if (field(*info, key) == nullptr) throw SchemaError(name, std::string("info has no \"") + key + "\"");

  spec.inputs = read_ports(name, *field(*info, "agent_input_def"), "agent_input_def");
  spec.outputs = read_ports(name, *field(*info, "agent_output_def"), "agent_output_def");

  const auto& params = *field(*info, "agent_parameter_def");
  if (params.kind() != ParamValue::Kind::Map) throw SchemaError(name, "agent_parameter_def must be an object");
  for (const auto& [pn, def] : params.fields()) spec.params.push_back({pn, read_optional(name, def)});

  for (std::size_t i = 0; i < spec.inputs.size(); ++i) {
    for (std::size_t j = 0; j < spec.inputs.size(); ++j) {
      if (i == j) continue;
      const auto& other = spec.inputs[j];
      for (const auto& alt : spec.inputs[i].alternate_names)
        if (other.answers_to(alt)) throw SchemaError(name, "input name '" + alt + "' is ambiguous");
    }
  }

  if (const auto* path = field(entry, "path"); path != nullptr && path->is_string()) spec.path = path->as_string();
  if (const auto* trainable = field(*info, "trainable")) {
    if (trainable->kind() != ParamValue::Kind::Boolean) throw SchemaError(name, "\"trainable\" must be a boolean");
    spec.trainable = trainable->as_bool();
  }
  if (const auto* formats = field(*info, "param_format")) {
    if (formats->kind() != ParamValue::Kind::Map) throw SchemaError(name, "\"param_format\" must be an object");
    for (const auto& [pn, def] : formats->fields()) spec.param_format_rules[pn] = read_rule(name, pn, def);
  }
  if (const auto* reqs = field(*info, "requires_agents")) {
    if (reqs->kind() != ParamValue::Kind::List) throw SchemaError(name, "\"requires_agents\" must be a list");
    for (const auto& r : reqs->items()) {
      if (!r.is_string()) throw SchemaError(name, "\"requires_agents\" entries must be strings");
      spec.requires_agents.push_back(r.as_string());
    }
  }
  return spec;
}

}  // namespace

std::string_view to_string(DataKind kind) {
  switch (kind) {
    case DataKind::Image: return "image_compressed_numpy";
    case DataKind::Mask: return "mask_compressed_numpy";
    case DataKind::WeightsFile: return "weights_file";
    case DataKind::FilePath: return "file_path";
    case DataKind::Scalar: return "scalar";
  }
  return "?";
}

std::optional<DataKind> data_kind_from_string(std::string_view name) {
  for (auto k : {DataKind::Image, DataKind::Mask, DataKind::WeightsFile, DataKind::FilePath, DataKind::Scalar})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

bool PortSpec::answers_to(std::string_view key) const {
  return name == key || std::find(alternate_names.begin(), alternate_names.end(), key) != alternate_names.end();
}

std::string FormatRule::example() const {
  if (!length || *length == 2) return "'[512, 512]'";
  std::string out = "'[";
  for (std::size_t i = 0; i < *length; ++i) out += (i ? ", 1" : "1");
  return out + "]'";
}

const ParamSpec* ToolSpec::find_param(std::string_view param) const {
  for (const auto& p : params)
    if (p.name == param) return &p;
  return nullptr;
}

std::optional<std::size_t> ToolSpec::find_input(std::string_view key) const {
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (inputs[i].answers_to(key)) return i;
  return std::nullopt;
}

std::optional<DataKind> ToolSpec::output_kind() const {
  if (outputs.empty()) return std::nullopt;
  return outputs.front().kind;
}

ToolRegistry::ToolRegistry(std::vector<ToolSpec> tools) : tools_(std::move(tools)) {}

const ToolSpec* ToolRegistry::lookup(std::string_view name) const {
  for (const auto& t : tools_)
    if (t.name == name) return &t;
  return nullptr;
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& t : tools_) out.push_back(t.name);
  return out;
}

kg::AgentPortPredicate ToolRegistry::agent_port_predicate() const {
  return [this](const std::string& agent, const std::string& key) {
    if (kg::input_slot_index(key)) return true;
    const auto* spec = lookup(agent);
    return spec != nullptr && spec->find_input(key).has_value() && spec->find_param(key) == nullptr;
  };
}

ToolRegistry load_registry(std::string_view text) {
  const auto root = kg::load_json_tree(text);
  if (root.kind() != ParamValue::Kind::Map) throw SchemaError("<root>", "dictionary must be a JSON object");
  std::vector<ToolSpec> tools;
  for (const auto& [name, entry] : root.fields()) tools.push_back(read_tool(name, entry));
  return ToolRegistry(std::move(tools));
}

std::string serialize_registry(const ToolRegistry& registry) {
  auto root = ordered_json::object();
  for (const auto& tool : registry.tools()) {
    auto inputs = ordered_json::object();
    for (const auto& p : tool.inputs) {
      inputs[p.name] = {{"alternate_names", p.alternate_names},
                        {"optional", p.optional},
                        {"type", std::string(to_string(p.kind))}};
    }
    auto outputs = ordered_json::object();
    for (const auto& p : tool.outputs) {
      auto o = ordered_json::object();
      if (!p.alternate_names.empty()) o["alternate_names"] = p.alternate_names;
      if (p.optional) o["optional"] = true;
      o["type"] = std::string(to_string(p.kind));
      outputs[p.name] = std::move(o);
    }
    auto params = ordered_json::object();
    for (const auto& p : tool.params) params[p.name] = {{"optional", p.optional}};

    auto info = ordered_json::object();
    info["agent_input_def"] = std::move(inputs);
    info["agent_output_def"] = std::move(outputs);
    info["agent_parameter_def"] = std::move(params);
    if (tool.trainable) info["trainable"] = true;
    if (!tool.param_format_rules.empty()) {
      auto formats = ordered_json::object();
      for (const auto& [pn, rule] : tool.param_format_rules) {
        auto r = ordered_json::object();
        r["format"] = "stringified_list";
        if (rule.length) r["length"] = *rule.length;
        if (rule.positive_integers) r["element"] = "positive_integer";
        formats[pn] = std::move(r);
      }
      info["param_format"] = std::move(formats);
    }
    if (!tool.requires_agents.empty()) info["requires_agents"] = tool.requires_agents;

    root[tool.name] = {{"info", std::move(info)}, {"path", tool.path}};
  }
  return root.dump(2) + "\n";
}

ParamCheck check_param(const kg::ParamValue& value, const ParamSpec& spec, const FormatRule* rule) {
  if (rule == nullptr) return {};
  const auto expected = "expected stringified list like " + rule->example();
  if (!value.is_stringified_list()) {
    std::string found;
    if (value.kind() == ParamValue::Kind::List) found = "a native list " + value.display();
    else found = value.display();
    return {false, spec.name + ": " + expected + " (a quoted string), found " + found};
  }
  const auto numbers = kg::parse_stringified_list(value.as_string());
  if (!numbers) return {false, spec.name + ": " + expected + ", found non-numeric " + value.display()};
  if (rule->length && numbers->size() != *rule->length) {
    return {false, spec.name + ": " + expected + " with " + std::to_string(*rule->length) +
                       " elements, found " + std::to_string(numbers->size())};
  }
  if (rule->positive_integers) {
    for (double n : *numbers) {
      if (n < 1 || n != static_cast<double>(static_cast<long long>(n)))
        return {false, spec.name + ": " + expected + " of positive integers, found " + value.display()};
    }
  }
  return {};
}

}  // namespace cvplan::registry
