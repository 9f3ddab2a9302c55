#include "cvplan/planner/extract.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace cvplan::planner {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::optional<std::string> fenced_json(std::string_view text) {
  std::size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string_view::npos) {
    const auto line_end = text.find('\n', pos);
    if (line_end == std::string_view::npos) return std::nullopt;
    const auto info = trim(text.substr(pos + 3, line_end - pos - 3));
    const auto close = text.find("```", line_end + 1);
    if (close == std::string_view::npos) return std::nullopt;
    if (iequals(info, "json")) {
      const auto body = trim(text.substr(line_end + 1, close - line_end - 1));
      if (!body.empty()) return std::string(body);
    }
    pos = close + 3;
  }
  return std::nullopt;
}

std::optional<std::string> longest_object(std::string_view text) {
  std::size_t best_start = 0, best_len = 0;
  int depth = 0;
  bool in_string = false, escaped = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (ch == '\\') escaped = true;
      else if (ch == '"') in_string = false;
      continue;
    }
    if (ch == '"' && depth > 0) {
      in_string = true;
    } else if (ch == '{') {
      if (depth++ == 0) start = i;
    } else if (ch == '}' && depth > 0) {
      if (--depth == 0 && i + 1 - start > best_len) {
        best_start = start;
        best_len = i + 1 - start;
      }
    }
  }
  if (best_len == 0) return std::nullopt;
  return std::string(text.substr(best_start, best_len));
}

}  // namespace

std::string extract_json(std::string_view completion) {
  if (auto fenced = fenced_json(completion)) return *fenced;
  if (auto span = longest_object(completion)) return *span;
  throw ExtractionFailed("no JSON object found in the completion");
}

}  // namespace cvplan::planner
