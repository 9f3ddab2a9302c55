#include "cvplan/planner/session.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cvplan::planner {

namespace {

using json = nlohmann::ordered_json;

constexpr verify::Code kCodes[] = {
    verify::Code::Structure,     verify::Code::ReservedAsAgent, verify::Code::UnknownAgent,
    verify::Code::UnresolvedInput, verify::Code::TypeMismatch,  verify::Code::MissingParam,
    verify::Code::ParamFormat,   verify::Code::Cycle,           verify::Code::NoReader,
    verify::Code::OutputFlag,    verify::Code::UnknownParam,
};

verify::Code code_from_string(const std::string& s) {
  for (auto c : kCodes)
    if (verify::to_string(c) == s) return c;
  throw std::runtime_error("unknown diagnostic code '" + s + "'");
}

verify::Severity severity_from_string(const std::string& s) {
  if (s == verify::to_string(verify::Severity::Error)) return verify::Severity::Error;
  if (s == verify::to_string(verify::Severity::Warning)) return verify::Severity::Warning;
  throw std::runtime_error("unknown severity '" + s + "'");
}

json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

json report_json(const verify::VerificationReport& r) {
  json diags = json::array();
  for (const auto& d : r.diagnostics) {
    diags.push_back({{"severity", std::string(verify::to_string(d.severity))},
                     {"code", std::string(verify::to_string(d.code))},
                     {"path",
                      {{"supernode", d.path.supernode},
                       {"chunk", opt(d.path.chunk)},
                       {"agent", opt(d.path.agent)},
                       {"param", opt(d.path.param)}}},
                     {"message", d.message}});
  }
  return {{"passed", r.passed}, {"diagnostics", diags}};
}

verify::VerificationReport report_from(const json& j) {
  verify::VerificationReport r;
  r.passed = j.at("passed").get<bool>();
  for (const auto& d : j.at("diagnostics")) {
    verify::Diagnostic diag{code_from_string(d.at("code").get<std::string>()),
                            severity_from_string(d.at("severity").get<std::string>()),
                            {},
                            d.at("message").get<std::string>()};
    const auto& p = d.at("path");
    diag.path.supernode = p.at("supernode").get<std::string>();
    diag.path.chunk = opt_from(p.at("chunk"));
    diag.path.agent = opt_from(p.at("agent"));
    diag.path.param = opt_from(p.at("param"));
    r.diagnostics.push_back(std::move(diag));
  }
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void indent_into(std::ostringstream& out, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out << "    " << line << '\n';
}

}  // namespace

std::string session_trace(const PlanSession& s) {
  std::ostringstream out;
  out << "Plan session\n";
  out << "Request: " << s.bundle.user_request << '\n';
  out << "Max retries: " << s.max_retries << "\n\n";
  for (const auto& a : s.attempts) {
    out << "Attempt " << a.index << ": " << to_string(a.outcome) << '\n';
    if (!a.error.empty()) {
      out << "  Error:\n";
      indent_into(out, a.error);
    }
    if (!a.report_text.empty()) {
      out << "  Verifier report:\n";
      indent_into(out, a.report_text);
    }
    if (!a.feedback.empty()) {
      out << "  Feedback sent:\n";
      indent_into(out, a.feedback);
    }
    out << '\n';
  }
  if (s.status == SessionStatus::Success) {
    out << "Result: success on attempt " << s.attempts.size();
    if (s.yaml_path) out << ", YAML saved to " << s.yaml_path->string();
    out << '\n';
  } else {
    out << "Result: exhausted after " << s.attempts.size() << " attempts\n";
  }
  return out.str();
}

std::string session_json(const PlanSession& s) {
  json attempts = json::array();
  for (const auto& a : s.attempts) {
    attempts.push_back({{"index", a.index},
                        {"outcome", std::string(to_string(a.outcome))},
                        {"completion", a.completion},
                        {"extracted_json", a.extracted_json},
                        {"error", a.error},
                        {"yaml", a.yaml},
                        {"report", a.report ? report_json(*a.report) : json(nullptr)},
                        {"report_text", a.report_text},
                        {"feedback", a.feedback}});
  }
  json j = {{"status", s.status == SessionStatus::Success ? "success" : "exhausted"},
            {"max_retries", s.max_retries},
            {"yaml_path", s.yaml_path ? json(s.yaml_path->generic_string()) : json(nullptr)},
            {"final_yaml", s.final_yaml},
            {"prompt",
             {{"introduction", s.bundle.introduction},
              {"guidelines", s.bundle.guidelines},
              {"example", s.bundle.example},
              {"dictionary", s.bundle.dictionary},
              {"preface", s.bundle.preface},
              {"user_request", s.bundle.user_request}}},
            {"attempts", attempts}};
  return j.dump(2) + "\n";
}

PlanSession session_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    PlanSession s;
    const auto status = j.at("status").get<std::string>();
    if (status != "success" && status != "exhausted") throw std::runtime_error("unknown status '" + status + "'");
    s.status = status == "success" ? SessionStatus::Success : SessionStatus::Exhausted;
    s.max_retries = j.at("max_retries").get<int>();
    if (!j.at("yaml_path").is_null()) s.yaml_path = std::filesystem::path(j.at("yaml_path").get<std::string>());
    s.final_yaml = j.at("final_yaml").get<std::string>();
    const auto& p = j.at("prompt");
    s.bundle = {p.at("introduction").get<std::string>(), p.at("guidelines").get<std::string>(),
                p.at("example").get<std::string>(),      p.at("dictionary").get<std::string>(),
                p.at("preface").get<std::string>(),      p.at("user_request").get<std::string>()};
    for (const auto& a : j.at("attempts")) {
      AttemptRecord r;
      r.index = a.at("index").get<int>();
      const auto outcome = outcome_from_string(a.at("outcome").get<std::string>());
      if (!outcome) throw std::runtime_error("unknown outcome in attempt " + std::to_string(r.index));
      r.outcome = *outcome;
      r.completion = a.at("completion").get<std::string>();
      r.extracted_json = a.at("extracted_json").get<std::string>();
      r.error = a.at("error").get<std::string>();
      r.yaml = a.at("yaml").get<std::string>();
      if (!a.at("report").is_null()) r.report = report_from(a.at("report"));
      r.report_text = a.at("report_text").get<std::string>();
      r.feedback = a.at("feedback").get<std::string>();
      s.attempts.push_back(std::move(r));
    }
    return s;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed session trace: ") + e.what());
  }
}

std::pair<std::filesystem::path, std::filesystem::path> trace_paths(const std::filesystem::path& yaml_path) {
  const auto dir = yaml_path.parent_path();
  const auto stem = yaml_path.stem().string();
  return {dir / (stem + ".trace.txt"), dir / (stem + ".trace.json")};
}

std::pair<std::filesystem::path, std::filesystem::path> write_session_trace(const PlanSession& session,
                                                                            const std::filesystem::path& yaml_path) {
  const auto paths = trace_paths(yaml_path);
  if (!yaml_path.parent_path().empty()) std::filesystem::create_directories(yaml_path.parent_path());
  write_text(paths.first, session_trace(session));
  write_text(paths.second, session_json(session));
  return paths;
}

}  // namespace cvplan::planner
