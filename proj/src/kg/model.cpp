#include "cvplan/kg/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace cvplan::kg {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string out(buf, ptr);
  if (std::isfinite(v) && out.find_first_of(".eE") == std::string::npos) out += ".0";
  return out;
}

}  // namespace

bool is_reserved_flag(std::string_view name) {
  return name == kSupernodeOutput || name == kChunkOutput;
}

ParamValue ParamValue::string(std::string s) {
  ParamValue v;
  v.kind_ = Kind::String;
  v.text_ = std::move(s);
  return v;
}

ParamValue ParamValue::integer(std::int64_t i) {
  ParamValue v;
  v.kind_ = Kind::Integer;
  v.int_ = i;
  return v;
}

ParamValue ParamValue::floating(double d) {
  ParamValue v;
  v.kind_ = Kind::Float;
  v.float_ = d;
  return v;
}

ParamValue ParamValue::boolean(bool b) {
  ParamValue v;
  v.kind_ = Kind::Boolean;
  v.bool_ = b;
  return v;
}

ParamValue ParamValue::list(std::vector<ParamValue> items) {
  ParamValue v;
  v.kind_ = Kind::List;
  v.items_ = std::move(items);
  return v;
}

ParamValue ParamValue::map(std::vector<std::pair<std::string, ParamValue>> fields) {
  ParamValue v;
  v.kind_ = Kind::Map;
  v.fields_ = std::move(fields);
  return v;
}

bool ParamValue::is_stringified_list() const {
  if (kind_ != Kind::String) return false;
  const auto t = trim(text_);
  return t.size() >= 2 && t.front() == '[' && t.back() == ']';
}

double ParamValue::as_number() const {
  if (kind_ == Kind::Integer) return static_cast<double>(int_);
  if (kind_ == Kind::Float) return float_;
  return 0.0;
}

std::string ParamValue::display() const {
  switch (kind_) {
    case Kind::Null:
      return "null";
    case Kind::String:
      return "'" + text_ + "'";
    case Kind::Integer:
      return std::to_string(int_);
    case Kind::Float:
      return format_double(float_);
    case Kind::Boolean:
      return bool_ ? "true" : "false";
    case Kind::List: {
      std::string out = "[";
      for (std::size_t i = 0; i < items_.size(); ++i) {
        if (i) out += ", ";
        out += items_[i].display();
      }
      return out + "]";
    }
    case Kind::Map: {
      std::string out = "{";
      for (std::size_t i = 0; i < fields_.size(); ++i) {
        if (i) out += ", ";
        out += fields_[i].first + ": " + fields_[i].second.display();
      }
      return out + "}";
    }
  }
  return {};
}

std::optional<std::vector<double>> parse_stringified_list(std::string_view text) {
  auto t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') return std::nullopt;
  t = trim(t.substr(1, t.size() - 2));
  std::vector<double> out;
  if (t.empty()) return out;
  while (true) {
    const auto comma = t.find(',');
    const auto item = trim(t.substr(0, comma));
    if (item.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc{} || ptr != item.data() + item.size()) return std::nullopt;
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    t = t.substr(comma + 1);
  }
  return out;
}

bool is_placeholder(std::string_view text) {
  return text.size() > 4 && text.starts_with("__") && text.ends_with("__") &&
         std::all_of(text.begin() + 2, text.end() - 2,
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string SourcePath::render() const {
  std::string out = supernode;
  for (const auto* seg : {&chunk, &agent, &param})
    if (seg->has_value()) out += "/" + **seg;
  return out;
}

InputRef InputRef::parse(std::string_view text) {
  const auto t = trim(text);
  if (t.starts_with("from ")) return {Kind::Chunk, std::string(trim(t.substr(5)))};
  return {Kind::Supernode, std::string(t)};
}

std::string InputRef::text() const {
  return kind == Kind::Chunk ? "from " + name : name;
}

std::optional<int> input_slot_index(std::string_view key) {
  if (key == "input") return 1;
  if (!key.starts_with("input_") || key.size() == 6) return std::nullopt;
  const auto digits = key.substr(6);
  if (digits.front() == '0') return std::nullopt;
  int n = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || n <= 0) return std::nullopt;
  return n;
}

std::vector<std::pair<std::string, InputRef>> ordered_inputs(const Chunk& chunk) {
  std::vector<std::pair<std::string, InputRef>> out(chunk.inputs.begin(), chunk.inputs.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return input_slot_index(a.first).value_or(1 << 30) < input_slot_index(b.first).value_or(1 << 30);
  });
  return out;
}

}  // namespace cvplan::kg
