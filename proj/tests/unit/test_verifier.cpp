#include <doctest.h>

#include <sstream>

#include "cvplan/kg/parse.hpp"
#include "cvplan/verify/verifier.hpp"
#include "fixtures.hpp"

using namespace cvplan;
using cvplan::testing::fixture_text;
using verify::Code;

namespace {

verify::VerificationReport check(const std::string& text) {
  return verify::verify(kg::parse_plan(text), registry::builtin_registry());
}

verify::VerificationReport check_fixture(const std::string& name) { return check(fixture_text(name)); }

std::vector<Code> error_codes(const verify::VerificationReport& r) {
  std::vector<Code> out;
  for (const auto& d : r.diagnostics)
    if (d.severity == verify::Severity::Error) out.push_back(d.code);
  return out;
}

std::string last_line(const std::string& text) {
  auto end = text.size();
  if (end > 0 && text[end - 1] == '\n') --end;
  const auto start = text.rfind('\n', end - 1);
  return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1));
}

}  // namespace

TEST_CASE("reference plans pass against the builtin registry") {
  for (const auto* name : {"ribs_plan.yaml", "trachea_plan.json", "faults/base_lungs.yaml"}) {
    const auto r = check_fixture(name);
    CHECK_MESSAGE(r.passed, name);
    CHECK(r.error_count() == 0);
    CHECK_FALSE(r.has(Code::UnknownAgent));
    CHECK(last_line(verify::render_report(r)) == "Checks passed: True");
  }
}

TEST_CASE("fault: reserved flag used as an agent name") {
  const auto r = check_fixture("faults/reserved_as_agent.yaml");
  CHECK_FALSE(r.passed);
  CHECK(error_codes(r) == std::vector<Code>{Code::ReservedAsAgent});
  CHECK(r.diagnostics[0].path.render() == "lungs_chest_xr/neural_net/chunk_output");
}

TEST_CASE("fault: candidate_selector input names no chunk") {
  const auto r = check_fixture("faults/invalid_candidate_input.yaml");
  CHECK(error_codes(r) == std::vector<Code>{Code::UnresolvedInput});
  CHECK(r.diagnostics[0].path.render() == "lungs_chest_xr/candidates/input");
}

TEST_CASE("fault: decision_tree missing for candidate_selector") {
  const auto r = check_fixture("faults/missing_decision_tree.yaml");
  CHECK(error_codes(r) == std::vector<Code>{Code::UnknownAgent});
  CHECK(r.diagnostics[0].message.find("decision_tree") != std::string::npos);
}

TEST_CASE("fault: native list target_shape") {
  const auto r = check_fixture("faults/native_target_shape.yaml");
  CHECK(error_codes(r) == std::vector<Code>{Code::ParamFormat});
  CHECK(r.diagnostics[0].message.find("'[512, 512]'") != std::string::npos);
  CHECK(r.diagnostics[0].path.render() == "lungs_chest_xr/image_processing/resize/target_shape");
}

TEST_CASE("combined faults accumulate in one report") {
  const auto r = check_fixture("faults/attempt3_combined.yaml");
  CHECK(r.has(Code::ReservedAsAgent));
  CHECK(r.has(Code::UnresolvedInput));
  CHECK(r.has(Code::UnknownAgent));
  const auto text = verify::render_report(r);
  CHECK(text.find("E_UNRESOLVED_INPUT lungs_chest_xr/candidates/input") != std::string::npos);
  CHECK(text.find("missing agent 'decision_tree'") != std::string::npos);
}

TEST_CASE("applying the named fix removes the error") {
  const auto base = check_fixture("faults/base_lungs.yaml");
  for (const auto* name : {"faults/reserved_as_agent.yaml", "faults/invalid_candidate_input.yaml",
                           "faults/missing_decision_tree.yaml", "faults/native_target_shape.yaml"}) {
    CHECK_MESSAGE(check_fixture(name).error_count() > base.error_count(), name);
  }
  // The native-list fix quotes exactly the literal the message suggests.
  auto text = fixture_text("faults/native_target_shape.yaml");
  const auto r = check(text);
  const auto& msg = r.diagnostics[0].message;
  const auto lit = msg.substr(msg.find('\''), msg.find('\'', msg.find('\'') + 1) - msg.find('\'') + 1);
  text.replace(text.find("[512, 512]"), 10, lit);
  CHECK(check(text).error_count() < r.error_count());
}

TEST_CASE("missing reader chunk") {
  const auto r = check(
      "chunks:\n  s:\n    c:\n      agents:\n        z_score:\n          channel: 0\n          numpy_only: true\n");
  CHECK(r.has(Code::NoReader));
}

TEST_CASE("unknown agent suggests the nearest name") {
  const auto text = fixture_text("ribs_plan.yaml");
  auto bad = text;
  bad.replace(bad.find("z_score:"), 8, "zscore:");
  const auto r = check(bad);
  CHECK(r.has(Code::UnknownAgent));
  bool suggested = false;
  for (const auto& d : r.diagnostics) suggested |= d.message.find("z_score") != std::string::npos;
  CHECK(suggested);
}

TEST_CASE("missing required parameter") {
  auto text = fixture_text("ribs_plan.yaml");
  text.erase(text.find("          prediction_threshold: 0.5\n"), std::string("          prediction_threshold: 0.5\n").size());
  const auto r = check(text);
  CHECK(error_codes(r) == std::vector<Code>{Code::MissingParam});
  CHECK(r.diagnostics[0].path.render() == "ribs_chest_xr/neural_net/tf2_segmentation/prediction_threshold");
}

TEST_CASE("kind mismatch between producer and consumer") {
  // save_image's mask slot fed from an image-producing chunk.
  auto text = fixture_text("ribs_plan.yaml");
  text.replace(text.find("      input_2: ribs_chest_xr"), 28, "      input_2: from image_processing");
  CHECK(check(text).has(Code::TypeMismatch));
}

TEST_CASE("referenced supernode without a supernode_output agent") {
  auto text = fixture_text("ribs_plan.yaml");
  text.erase(text.find("          supernode_output: true\n"), std::string("          supernode_output: true\n").size());
  CHECK(check(text).has(Code::OutputFlag));
}

TEST_CASE("cycle through from-links") {
  const auto r = check(
      "chunks:\n  img:\n    load:\n      agents:\n        reader:\n          csv_path: a.csv\n"
      "          supernode_output: true\n"
      "  s:\n    a:\n      input_1: from b\n      agents:\n        z_score:\n          numpy_only: true\n"
      "    b:\n      input_1: from a\n      agents:\n        z_score:\n          numpy_only: true\n");
  CHECK(r.has(Code::Cycle));
}

TEST_CASE("unknown parameters are warnings only") {
  auto text = fixture_text("ribs_plan.yaml");
  text.replace(text.find("        z_score:\n"), 17, "        z_score:\n          colour: red\n");
  const auto r = check(text);
  CHECK(r.passed);
  CHECK(r.has(Code::UnknownParam));
  CHECK(verify::render_report(r).rfind("WARNING W_UNKNOWN_PARAM", 0) == 0);
}

TEST_CASE("render_report format") {
  verify::VerificationReport empty;
  CHECK(verify::render_report(empty) == "Checks passed: True\n");

  const auto r = check_fixture("faults/native_target_shape.yaml");
  const auto text = verify::render_report(r);
  std::istringstream in(text);
  std::string first, second, extra;
  std::getline(in, first);
  std::getline(in, second);
  CHECK(first.rfind("ERROR E_PARAM_FORMAT lungs_chest_xr/image_processing/resize/target_shape: ", 0) == 0);
  CHECK(second == "Checks passed: False");
  CHECK_FALSE(std::getline(in, extra));
}

TEST_CASE("verify is pure and report JSON lists every diagnostic") {
  const auto a = check_fixture("faults/attempt3_combined.yaml");
  const auto b = check_fixture("faults/attempt3_combined.yaml");
  CHECK(a == b);
  CHECK(verify::render_report(a) == verify::render_report(b));
  const auto json = verify::report_to_json(a);
  CHECK(json.find("\"E_RESERVED_AS_AGENT\"") != std::string::npos);
  CHECK(json.find("\"E_UNRESOLVED_INPUT\"") != std::string::npos);
}
