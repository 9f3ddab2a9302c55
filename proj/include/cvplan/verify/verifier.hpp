#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cvplan/kg/model.hpp"
#include "cvplan/registry/tool_registry.hpp"

namespace cvplan::verify {

enum class Code {
  Structure,
  ReservedAsAgent,
  UnknownAgent,
  UnresolvedInput,
  TypeMismatch,
  MissingParam,
  ParamFormat,
  Cycle,
  NoReader,
  OutputFlag,
  UnknownParam,
};

enum class Severity { Error, Warning };

/// Wire name, e.g. "E_PARAM_FORMAT".
std::string_view to_string(Code code);
std::string_view to_string(Severity severity);

struct Diagnostic {
  Code code;
  Severity severity;
  kg::SourcePath path;
  /// Includes the fix, with a literal example where one exists.
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

struct VerificationReport {
  std::vector<Diagnostic> diagnostics;
  bool passed = true;

  std::size_t error_count() const;
  bool has(Code code) const;
  bool operator==(const VerificationReport&) const = default;
};

/// Runs every check and accumulates findings; never stops at the first one.
VerificationReport verify(const kg::KnowledgeGraph& graph, const registry::ToolRegistry& registry);

/// One `SEVERITY CODE path: message` line per diagnostic, then
/// `Checks passed: True|False`.
std::string render_report(const VerificationReport& report);

/// JSON array of {severity, code, path, message}.
std::string report_to_json(const VerificationReport& report);

}  // namespace cvplan::verify
