#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvplan/planner/backend.hpp"
#include "cvplan/planner/prompt.hpp"
#include "cvplan/registry/tool_registry.hpp"
#include "cvplan/verify/verifier.hpp"

namespace cvplan::planner {

/// Where an attempt stopped. Passed is the only success.
enum class Outcome { Extraction, JsonSyntax, Structure, Verifier, Passed };

/// "EXTRACTION", "JSON-SYNTAX", "STRUCTURE", "VERIFIER", "PASSED".
std::string_view to_string(Outcome outcome);
std::optional<Outcome> outcome_from_string(std::string_view text);

struct AttemptRecord {
  int index = 0;  // 1-based
  std::string completion;
  Outcome outcome = Outcome::Extraction;
  /// Empty when extraction failed.
  std::string extracted_json;
  /// Extraction or parse error text; empty otherwise.
  std::string error;
  /// Converted plan; empty when parsing failed.
  std::string yaml;
  /// Set once the plan reached the verifier.
  std::optional<verify::VerificationReport> report;
  std::string report_text;
  /// Message appended to the conversation; empty for the passing attempt.
  std::string feedback;

  bool operator==(const AttemptRecord&) const = default;
};

enum class SessionStatus { Success, Exhausted };

struct PlanSession {
  PromptBundle bundle;
  std::vector<AttemptRecord> attempts;
  SessionStatus status = SessionStatus::Exhausted;
  int max_retries = 5;
  /// Verified YAML text on success.
  std::string final_yaml;
  /// Where the YAML was written, when a path was configured.
  std::optional<std::filesystem::path> yaml_path;

  bool operator==(const PlanSession&) const = default;
};

struct RefineOptions {
  int max_retries = 5;
  /// The verified plan is written here on success.
  std::optional<std::filesystem::path> output_yaml;
};

/// Per-category one-line repair hint appended to feedback.
std::string_view repair_hint(Outcome outcome);

/// generate -> extract -> parse -> convert -> verify, feeding each failure
/// back into the conversation, until a plan passes or max_retries attempts
/// have been spent. BackendUnreachable propagates; in-band failures do not.
PlanSession refine_loop(const PromptBundle& bundle, GeneratorBackend& backend, const registry::ToolRegistry& registry,
                        const RefineOptions& options = {});

}  // namespace cvplan::planner
