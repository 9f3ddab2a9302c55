#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cvplan::planner {

class PromptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The planner's instructions, rendered in this field order with each of the
/// first four sections under its bracketed header.
struct PromptBundle {
  std::string introduction;
  std::string guidelines;
  std::string example;
  std::string dictionary;
  std::string preface;
  std::string user_request;

  bool operator==(const PromptBundle&) const = default;
};

inline constexpr const char* kIntroductionHeader = "[Prompt Introduction]";
inline constexpr const char* kGuidelinesHeader = "[JSON Structure Guidelines for Pipeline Configuration]";
inline constexpr const char* kExampleHeader = "[json example]";
inline constexpr const char* kDictionaryHeader = "[json dictionary]";

/// Throws PromptError naming the first empty section or an empty request.
PromptBundle build_prompt(std::string introduction, std::string guidelines, std::string example,
                          std::string dictionary, std::string preface, std::string user_request);

/// Shipped sections (dictionary = the builtin registry) around `user_request`.
PromptBundle default_prompt(std::string user_request);

std::string default_introduction();
std::string default_guidelines();
std::string default_example();
std::string default_preface();

/// The four headed sections.
std::string render_system(const PromptBundle& bundle);
/// Preface, newline, request.
std::string render_user(const PromptBundle& bundle);
/// Everything, in order: system text, blank line, user text.
std::string render(const PromptBundle& bundle);

struct ChatMessage {
  std::string role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};
using Conversation = std::vector<ChatMessage>;

/// [system: render_system, user: render_user].
Conversation initial_conversation(const PromptBundle& bundle);

}  // namespace cvplan::planner
