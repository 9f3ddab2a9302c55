#include "cvplan/planner/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "cvplan/registry/tool_registry.hpp"

namespace cvplan::planner {

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string strip_trailing(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

}  // namespace

PromptBundle build_prompt(std::string introduction, std::string guidelines, std::string example,
                          std::string dictionary, std::string preface, std::string user_request) {
  const std::pair<const char*, const std::string*> sections[] = {
      {"introduction", &introduction}, {"guidelines", &guidelines}, {"example", &example},
      {"dictionary", &dictionary},     {"preface", &preface},       {"user request", &user_request}};
  for (const auto& [name, text] : sections)
    if (blank(*text)) throw PromptError(std::string("prompt section '") + name + "' is empty");
  return {std::move(introduction), std::move(guidelines), std::move(example),
          std::move(dictionary),   std::move(preface),    std::move(user_request)};
}

PromptBundle default_prompt(std::string user_request) {
  return build_prompt(default_introduction(), default_guidelines(), default_example(),
                      std::string(registry::builtin_registry_text()), default_preface(), std::move(user_request));
}

std::string render_system(const PromptBundle& b) {
  std::string out;
  out += std::string(kIntroductionHeader) + "\n" + strip_trailing(b.introduction) + "\n\n";
  out += std::string(kGuidelinesHeader) + "\n" + strip_trailing(b.guidelines) + "\n\n";
  out += std::string(kExampleHeader) + "\n" + strip_trailing(b.example) + "\n\n";
  out += std::string(kDictionaryHeader) + "\n" + strip_trailing(b.dictionary) + "\n";
  return out;
}

std::string render_user(const PromptBundle& b) { return strip_trailing(b.preface) + "\n" + strip_trailing(b.user_request); }

std::string render(const PromptBundle& b) { return render_system(b) + "\n" + render_user(b); }

Conversation initial_conversation(const PromptBundle& b) {
  return {{"system", render_system(b)}, {"user", render_user(b)}};
}

}  // namespace cvplan::planner
