#include "cvplan/kg/serialize.hpp"

#include <charconv>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>
#include <nlohmann/json.hpp>

namespace cvplan::kg {

namespace {

using ordered_json = nlohmann::ordered_json;

bool reads_as_non_string(const std::string& s) {
  static const std::set<std::string> words{"~",    "null",  "Null",  "NULL",  "true",  "True",
                                           "TRUE", "false", "False", "FALSE", ".inf",  ".Inf",
                                           ".INF", "+.inf", "-.inf", "-.Inf", "-.INF", ".nan",
                                           ".NaN", ".NAN"};
  static const std::regex number_re(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
  return words.contains(s) || std::regex_match(s, number_re);
}

bool needs_double_quotes(const std::string& s) {
  for (unsigned char c : s)
    if (c < 0x20 || c == 0x7f) return true;
  return false;
}

std::string single_quoted(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

std::string quoted(const std::string& s) {
  if (needs_double_quotes(s)) return ordered_json(s).dump();
  return single_quoted(s);
}

std::string format_float(double v) {
  if (std::isnan(v)) return ".nan";
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string out(buf, ptr);
  if (out.find_first_of(".eE") == std::string::npos) out += ".0";
  return out;
}

std::string flow_value(const ParamValue& v);

std::string scalar_value(const ParamValue& v) {
  switch (v.kind()) {
    case ParamValue::Kind::Null:
      return "null";
    case ParamValue::Kind::String:
      // Stringified lists are always quoted, as in '[512, 512]'.
      if (v.is_stringified_list()) return quoted(v.as_string());
      return yaml_string(v.as_string());
    case ParamValue::Kind::Integer:
      return std::to_string(v.as_integer());
    case ParamValue::Kind::Float:
      return format_float(v.as_number());
    case ParamValue::Kind::Boolean:
      return v.as_bool() ? "true" : "false";
    case ParamValue::Kind::List:
    case ParamValue::Kind::Map:
      return flow_value(v);
  }
  return {};
}

std::string flow_value(const ParamValue& v) {
  if (v.kind() == ParamValue::Kind::String) return quoted(v.as_string());
  if (v.kind() == ParamValue::Kind::List) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.items().size(); ++i) {
      if (i) out += ", ";
      out += flow_value(v.items()[i]);
    }
    return out + "]";
  }
  if (v.kind() == ParamValue::Kind::Map) {
    std::string out = "{";
    for (std::size_t i = 0; i < v.fields().size(); ++i) {
      if (i) out += ", ";
      out += quoted(v.fields()[i].first) + ": " + flow_value(v.fields()[i].second);
    }
    return out + "}";
  }
  return scalar_value(v);
}

ordered_json to_json_value(const ParamValue& v) {
  switch (v.kind()) {
    case ParamValue::Kind::Null:
      return nullptr;
    case ParamValue::Kind::String:
      return v.as_string();
    case ParamValue::Kind::Integer:
      return v.as_integer();
    case ParamValue::Kind::Float:
      return v.as_number();
    case ParamValue::Kind::Boolean:
      return v.as_bool();
    case ParamValue::Kind::List: {
      auto arr = ordered_json::array();
      for (const auto& e : v.items()) arr.push_back(to_json_value(e));
      return arr;
    }
    case ParamValue::Kind::Map: {
      auto obj = ordered_json::object();
      for (const auto& [k, e] : v.fields()) obj[k] = to_json_value(e);
      return obj;
    }
  }
  return nullptr;
}

}  // namespace

std::string yaml_string(const std::string& s) {
  static const std::string indicators = "-?:,[]{}#&*!|>'\"%@`";
  const bool plain_ok = !s.empty() && indicators.find(s.front()) == std::string::npos &&
                        s.front() != ' ' && s.back() != ' ' && s.back() != ':' &&
                        s.find(": ") == std::string::npos && s.find(" #") == std::string::npos &&
                        s.find('\t') == std::string::npos && !needs_double_quotes(s) &&
                        !reads_as_non_string(s);
  return plain_ok ? s : quoted(s);
}

std::string to_yaml(const KnowledgeGraph& graph) {
  std::ostringstream out;
  out << "chunks:\n";
  for (const auto& [sn, supernode] : graph.supernodes) {
    out << "  " << yaml_string(sn) << ":";
    if (supernode.chunks.empty()) {
      out << " {}\n";
      continue;
    }
    out << "\n";
    for (const auto& [cn, chunk] : supernode.chunks) {
      out << "    " << yaml_string(cn) << ":\n";
      for (const auto& [slot, ref] : chunk.inputs)
        out << "      " << yaml_string(slot) << ": " << yaml_string(ref.text()) << "\n";
      if (chunk.agents.empty()) {
        out << "      agents: {}\n";
        continue;
      }
      out << "      agents:\n";
      for (const auto& [an, agent] : chunk.agents) {
        out << "        " << yaml_string(an) << ":";
        if (agent.inline_value) {
          out << " " << scalar_value(*agent.inline_value) << "\n";
          continue;
        }
        out << "\n";
        for (const auto& [pn, pv] : agent.params)
          out << "          " << yaml_string(pn) << ": " << scalar_value(pv) << "\n";
        if (agent.supernode_output) out << "          supernode_output: true\n";
        if (agent.chunk_output) out << "          chunk_output: true\n";
      }
    }
  }
  return out.str();
}

std::string to_json(const KnowledgeGraph& graph) {
  auto supernodes = ordered_json::object();
  for (const auto& [sn, supernode] : graph.supernodes) {
    auto chunks = ordered_json::object();
    for (const auto& [cn, chunk] : supernode.chunks) {
      auto c = ordered_json::object();
      for (const auto& [slot, ref] : chunk.inputs) c[slot] = ref.text();
      auto agents = ordered_json::object();
      for (const auto& [an, agent] : chunk.agents) {
        if (agent.inline_value) {
          agents[an] = to_json_value(*agent.inline_value);
          continue;
        }
        auto a = ordered_json::object();
        for (const auto& [pn, pv] : agent.params) a[pn] = to_json_value(pv);
        if (agent.supernode_output) a[std::string(kSupernodeOutput)] = true;
        if (agent.chunk_output) a[std::string(kChunkOutput)] = true;
        agents[an] = std::move(a);
      }
      c["agents"] = std::move(agents);
      chunks[cn] = std::move(c);
    }
    supernodes[sn] = std::move(chunks);
  }
  ordered_json root = ordered_json::object();
  root["chunks"] = std::move(supernodes);
  return root.dump(2) + "\n";
}

}  // namespace cvplan::kg
