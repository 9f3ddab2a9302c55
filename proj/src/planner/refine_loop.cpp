#include "cvplan/planner/refine_loop.hpp"

#include <fstream>
#include <stdexcept>

#include "cvplan/kg/errors.hpp"
#include "cvplan/kg/parse.hpp"
#include "cvplan/kg/serialize.hpp"
#include "cvplan/planner/extract.hpp"

namespace cvplan::planner {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Extraction: return "EXTRACTION";
    case Outcome::JsonSyntax: return "JSON-SYNTAX";
    case Outcome::Structure: return "STRUCTURE";
    case Outcome::Verifier: return "VERIFIER";
    case Outcome::Passed: return "PASSED";
  }
  return "?";
}

std::optional<Outcome> outcome_from_string(std::string_view text) {
  for (auto o : {Outcome::Extraction, Outcome::JsonSyntax, Outcome::Structure, Outcome::Verifier, Outcome::Passed})
    if (to_string(o) == text) return o;
  return std::nullopt;
}

std::string_view repair_hint(Outcome outcome) {
  switch (outcome) {
    case Outcome::Extraction:
      return "Reply with the complete configuration in a single ```json fenced block.";
    case Outcome::JsonSyntax:
      return "Fix the JSON syntax at the reported position: balanced braces, quoted keys, no trailing commas.";
    case Outcome::Structure:
      return "Keep the nesting chunks -> supernode -> chunk -> agent, with every agent's parameters in an object.";
    case Outcome::Verifier:
      return "Fix every ERROR line above; write list parameters as quoted strings such as '[512, 512]'.";
    case Outcome::Passed:
      return "";
  }
  return "";
}

namespace {

std::string feedback_text(const AttemptRecord& a) {
  std::string out = "Attempt " + std::to_string(a.index) + " failed [" + std::string(to_string(a.outcome)) + "]:\n";
  out += a.outcome == Outcome::Verifier ? a.report_text : a.error;
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += "Hint: ";
  out += repair_hint(a.outcome);
  return out;
}

AttemptRecord run_attempt(int index, std::string completion, const registry::ToolRegistry& registry) {
  AttemptRecord a;
  a.index = index;
  a.completion = std::move(completion);
  try {
    a.extracted_json = extract_json(a.completion);
  } catch (const ExtractionFailed& e) {
    a.outcome = Outcome::Extraction;
    a.error = e.what();
    return a;
  }
  kg::KnowledgeGraph graph;
  try {
    graph = kg::parse_json_plan(a.extracted_json);
  } catch (const kg::SyntaxError& e) {
    a.outcome = Outcome::JsonSyntax;
    a.error = "JSON syntax error at line " + std::to_string(e.line()) + ", column " + std::to_string(e.column()) +
              ": " + e.what();
    return a;
  } catch (const kg::StructureError& e) {
    a.outcome = Outcome::Structure;
    a.error = e.what();
    return a;
  }
  a.yaml = kg::to_yaml(graph);
  a.report = verify::verify(graph, registry);
  a.report_text = verify::render_report(*a.report);
  a.outcome = a.report->passed ? Outcome::Passed : Outcome::Verifier;
  return a;
}

}  // namespace

PlanSession refine_loop(const PromptBundle& bundle, GeneratorBackend& backend, const registry::ToolRegistry& registry,
                        const RefineOptions& options) {
  if (options.max_retries < 1) throw std::invalid_argument("max_retries must be at least 1");
  PlanSession session;
  session.bundle = bundle;
  session.max_retries = options.max_retries;
  auto conversation = initial_conversation(bundle);

  for (int k = 1; k <= options.max_retries; ++k) {
    auto attempt = run_attempt(k, backend.generate(conversation), registry);
    if (attempt.outcome == Outcome::Passed) {
      session.final_yaml = attempt.yaml;
      session.status = SessionStatus::Success;
      session.attempts.push_back(std::move(attempt));
      if (options.output_yaml) {
        const auto& path = *options.output_yaml;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        out << session.final_yaml;
        session.yaml_path = path;
      }
      return session;
    }
    attempt.feedback = feedback_text(attempt);
    conversation.push_back({"assistant", attempt.completion});
    conversation.push_back({"user", attempt.feedback});
    session.attempts.push_back(std::move(attempt));
  }
  session.status = SessionStatus::Exhausted;
  return session;
}

}  // namespace cvplan::planner
