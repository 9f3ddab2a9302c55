#include "cvplan/kg/parse.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <regex>
#include <set>
#include <nlohmann/json.hpp>

namespace cvplan::kg {

namespace {

using ordered_json = nlohmann::ordered_json;
using Fields = std::vector<std::pair<std::string, ParamValue>>;

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

ParamValue from_json(const ordered_json& j) {
  switch (j.type()) {
    case ordered_json::value_t::null:
      return ParamValue::null();
    case ordered_json::value_t::boolean:
      return ParamValue::boolean(j.get<bool>());
    case ordered_json::value_t::number_integer:
      return ParamValue::integer(j.get<std::int64_t>());
    case ordered_json::value_t::number_unsigned: {
      const auto u = j.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        return ParamValue::floating(static_cast<double>(u));
      return ParamValue::integer(static_cast<std::int64_t>(u));
    }
    case ordered_json::value_t::number_float:
      return ParamValue::floating(j.get<double>());
    case ordered_json::value_t::string:
      return ParamValue::string(j.get<std::string>());
    case ordered_json::value_t::array: {
      std::vector<ParamValue> items;
      for (const auto& e : j) items.push_back(from_json(e));
      return ParamValue::list(std::move(items));
    }
    case ordered_json::value_t::object: {
      Fields fields;
      for (const auto& [k, v] : j.items()) fields.emplace_back(k, from_json(v));
      return ParamValue::map(std::move(fields));
    }
    default:
      return ParamValue::null();
  }
}

// YAML 1.2 core-schema resolution for plain scalars.
ParamValue resolve_plain_scalar(const std::string& s) {
  static const std::set<std::string> nulls{"", "~", "null", "Null", "NULL"};
  static const std::set<std::string> trues{"true", "True", "TRUE"};
  static const std::set<std::string> falses{"false", "False", "FALSE"};
  static const std::regex int_re(R"([-+]?[0-9]+)");
  static const std::regex float_re(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");

  if (nulls.contains(s)) return ParamValue::null();
  if (trues.contains(s)) return ParamValue::boolean(true);
  if (falses.contains(s)) return ParamValue::boolean(false);
  if (std::regex_match(s, int_re)) {
    std::int64_t v = 0;
    const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return ParamValue::integer(v);
  }
  if (std::regex_match(s, float_re)) return ParamValue::floating(std::stod(s));
  if (s == ".inf" || s == ".Inf" || s == ".INF" || s == "+.inf")
    return ParamValue::floating(std::numeric_limits<double>::infinity());
  if (s == "-.inf" || s == "-.Inf" || s == "-.INF")
    return ParamValue::floating(-std::numeric_limits<double>::infinity());
  if (s == ".nan" || s == ".NaN" || s == ".NAN")
    return ParamValue::floating(std::numeric_limits<double>::quiet_NaN());
  return ParamValue::string(s);
}

ParamValue from_yaml(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Undefined:
    case YAML::NodeType::Null:
      return ParamValue::null();
    case YAML::NodeType::Scalar:
      // "?" marks a plain scalar; quoted and explicitly tagged scalars are strings.
      if (n.Tag() == "?") return resolve_plain_scalar(n.Scalar());
      return ParamValue::string(n.Scalar());
    case YAML::NodeType::Sequence: {
      std::vector<ParamValue> items;
      for (const auto& e : n) items.push_back(from_yaml(e));
      return ParamValue::list(std::move(items));
    }
    case YAML::NodeType::Map: {
      Fields fields;
      std::set<std::string> seen;
      for (const auto& kv : n) {
        auto key = kv.first.Scalar();
        if (!seen.insert(key).second) {
          throw SyntaxError("duplicate key '" + key + "'", 0, kv.first.Mark().line + 1,
                            kv.first.Mark().column + 1);
        }
        fields.emplace_back(std::move(key), from_yaml(kv.second));
      }
      return ParamValue::map(std::move(fields));
    }
  }
  return ParamValue::null();
}

const char* kind_name(ParamValue::Kind k) {
  switch (k) {
    case ParamValue::Kind::Null: return "null";
    case ParamValue::Kind::String: return "string";
    case ParamValue::Kind::Integer: return "integer";
    case ParamValue::Kind::Float: return "float";
    case ParamValue::Kind::Boolean: return "boolean";
    case ParamValue::Kind::List: return "list";
    case ParamValue::Kind::Map: return "object";
  }
  return "?";
}

AgentInstance build_agent(const ParamValue& value) {
  AgentInstance agent;
  if (value.kind() == ParamValue::Kind::Null) return agent;
  if (value.kind() != ParamValue::Kind::Map) {
    agent.inline_value = value;
    return agent;
  }
  for (const auto& [key, v] : value.fields()) {
    if (is_reserved_flag(key) && v.kind() == ParamValue::Kind::Boolean) {
      (key == kSupernodeOutput ? agent.supernode_output : agent.chunk_output) = v.as_bool();
      continue;
    }
    // Non-boolean flags stay as params so the verifier can report them.
    agent.params.insert(key, v);
  }
  return agent;
}

Chunk build_chunk(const ParamValue& value, const std::string& sn, const std::string& cn) {
  if (value.kind() != ParamValue::Kind::Map)
    throw StructureError(std::string("chunk must be an object, found ") + kind_name(value.kind()),
                         {sn, cn, {}, {}});
  Chunk chunk;
  for (const auto& [key, v] : value.fields()) {
    if (key == "agents") {
      if (v.kind() == ParamValue::Kind::Null) continue;
      if (v.kind() != ParamValue::Kind::Map)
        throw StructureError("\"agents\" must be an object keyed by agent name", {sn, cn, {}, {}});
      for (const auto& [an, av] : v.fields()) chunk.agents.insert(an, build_agent(av));
      continue;
    }
    if (v.kind() != ParamValue::Kind::String) {
      throw StructureError("chunk key '" + key + "' must be an input link string or \"agents\"",
                           {sn, cn, {}, key});
    }
    chunk.inputs.insert(key, InputRef::parse(v.as_string()));
  }
  return chunk;
}

KnowledgeGraph build_graph(const ParamValue& root) {
  if (root.kind() != ParamValue::Kind::Map)
    throw StructureError("document must be an object with a top-level \"chunks\" key", {});
  const ParamValue* chunks = nullptr;
  for (const auto& [k, v] : root.fields())
    if (k == "chunks") chunks = &v;
  if (chunks == nullptr) throw StructureError("missing top-level key \"chunks\"", {});
  if (chunks->kind() != ParamValue::Kind::Map)
    throw StructureError("\"chunks\" must be an object keyed by supernode name", {});
  if (chunks->fields().empty()) throw StructureError("\"chunks\" has no supernodes", {});

  KnowledgeGraph graph;
  for (const auto& [sn, sv] : chunks->fields()) {
    if (sn.empty()) throw StructureError("empty supernode name", {});
    if (sv.kind() != ParamValue::Kind::Map)
      throw StructureError(std::string("supernode must be an object of chunks, found ") +
                               kind_name(sv.kind()),
                           {sn, {}, {}, {}});
    Supernode supernode;
    for (const auto& [cn, cv] : sv.fields()) {
      if (cn == "agents") {
        throw StructureError("\"agents\" found directly under a supernode; wrap it in a chunk",
                             {sn, {}, {}, {}});
      }
      supernode.chunks.insert(cn, build_chunk(cv, sn, cn));
    }
    graph.supernodes.insert(sn, std::move(supernode));
  }
  return graph;
}

}  // namespace

ParamValue load_json_tree(std::string_view text) {
  // Duplicate keys are rejected: ordered_json would silently keep the first.
  std::vector<std::set<std::string>> open_objects;
  std::string duplicate;
  ordered_json::parser_callback_t cb = [&](int, ordered_json::parse_event_t event,
                                           ordered_json& parsed) {
    using E = ordered_json::parse_event_t;
    if (event == E::object_start) {
      open_objects.emplace_back();
    } else if (event == E::object_end) {
      if (!open_objects.empty()) open_objects.pop_back();
    } else if (event == E::key && !open_objects.empty()) {
      const auto key = parsed.get<std::string>();
      if (!open_objects.back().insert(key).second && duplicate.empty()) duplicate = key;
    }
    return true;
  };
  ordered_json j;
  try {
    j = ordered_json::parse(text.begin(), text.end(), cb);
  } catch (const ordered_json::parse_error& e) {
    const std::size_t pos = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = line_column(text, pos);
    throw SyntaxError("JSON syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what(),
                      pos, line, col);
  }
  if (!duplicate.empty()) throw SyntaxError("duplicate key '" + duplicate + "'", 0, 0, 0);
  return from_json(j);
}

ParamValue load_yaml_tree(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    const auto line = static_cast<std::size_t>(e.mark.line + 1);
    const auto col = static_cast<std::size_t>(e.mark.column + 1);
    throw SyntaxError("YAML syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.msg,
                      e.mark.pos > 0 ? static_cast<std::size_t>(e.mark.pos) : 0, line, col);
  }
  if (!root.IsDefined() || root.IsNull()) throw SyntaxError("empty YAML document", 0, 1, 1);
  return from_yaml(root);
}

KnowledgeGraph parse_json_plan(std::string_view text) { return build_graph(load_json_tree(text)); }

KnowledgeGraph parse_yaml_plan(std::string_view text) { return build_graph(load_yaml_tree(text)); }

KnowledgeGraph parse_plan(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_json_plan(text);
  return parse_yaml_plan(text);
}

}  // namespace cvplan::kg
