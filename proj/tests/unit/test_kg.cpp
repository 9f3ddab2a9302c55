#include <doctest.h>

#include "cvplan/kg/dag.hpp"
#include "cvplan/kg/errors.hpp"
#include "cvplan/kg/parse.hpp"
#include "cvplan/kg/serialize.hpp"
#include "fixtures.hpp"

using namespace cvplan;
using cvplan::testing::fixture_text;

namespace {

std::vector<std::string> keys_of(const auto& map) {
  std::vector<std::string> out;
  for (const auto& [k, v] : map) out.push_back(k);
  return out;
}

}  // namespace

TEST_CASE("json plan: trachea example keeps authoring order") {
  const auto g = kg::parse_json_plan(fixture_text("trachea_plan.json"));
  CHECK(keys_of(g.supernodes) == std::vector<std::string>{"chest_xr_image", "trachea_chest_xr"});
  const auto& chunk = g.supernodes.find("trachea_chest_xr")->chunks.find("image_processing");
  REQUIRE(chunk != nullptr);
  CHECK(keys_of(chunk->agents) == std::vector<std::string>{"resize", "expand_channels", "clahe", "z_score"});
  const auto* shape = chunk->agents.find("resize")->params.find("target_shape");
  REQUIRE(shape != nullptr);
  CHECK(shape->is_stringified_list());
}

TEST_CASE("json plan: empty supernode map is a structure error") {
  CHECK_THROWS_AS(kg::parse_json_plan(R"({"chunks": {}})"), kg::StructureError);
}

TEST_CASE("json plan: minimal document") {
  const auto g = kg::parse_json_plan(R"({"chunks": {"a": {"c": {"agents": {"reader": {}}}}}})");
  REQUIRE(g.supernodes.size() == 1);
  const auto& chunks = g.supernodes[0].second.chunks;
  REQUIRE(chunks.size() == 1);
  REQUIRE(chunks[0].second.agents.size() == 1);
  CHECK(chunks[0].second.agents[0].first == "reader");
  CHECK(chunks[0].second.agents[0].second.params.empty());
}

TEST_CASE("json plan: malformed text reports a position") {
  try {
    kg::parse_json_plan("{\"chunks\": {\"a\": }");
    FAIL("expected SyntaxError");
  } catch (const kg::SyntaxError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("json plan: wrong nesting depth is a structure error with a path") {
  try {
    kg::parse_json_plan(R"({"chunks": {"a": {"c": {"agents": ["reader"]}}}})");
    FAIL("expected StructureError");
  } catch (const kg::StructureError& e) {
    CHECK(e.path().supernode == "a");
    CHECK(e.path().chunk == std::optional<std::string>("c"));
  }
}

TEST_CASE("yaml plan: ribs listing") {
  const auto g = kg::parse_yaml_plan(fixture_text("ribs_plan.yaml"));
  const auto* ribs = g.supernodes.find("ribs_chest_xr");
  REQUIRE(ribs != nullptr);
  CHECK(keys_of(ribs->chunks) == std::vector<std::string>{"image_processing", "neural_net", "save"});
  const auto* nn = ribs->chunks.find("neural_net");
  CHECK(nn->inputs.find("input_2")->kind == kg::InputRef::Kind::Chunk);
  CHECK(nn->inputs.find("input_2")->name == "image_processing");
  CHECK(nn->agents.find("tf2_segmentation")->supernode_output);
}

TEST_CASE("yaml plan: native sequence is a list, quoted one a stringified list") {
  const auto native = kg::parse_yaml_plan(
      "chunks:\n  s:\n    c:\n      agents:\n        resize:\n          target_shape: [512, 512]\n");
  const auto* v = native.supernodes[0].second.chunks[0].second.agents[0].second.params.find("target_shape");
  CHECK(v->kind() == kg::ParamValue::Kind::List);
  CHECK_FALSE(v->is_stringified_list());

  const auto quoted = kg::parse_yaml_plan(
      "chunks:\n  s:\n    c:\n      agents:\n        resize:\n          target_shape: '[512, 512]'\n");
  const auto* q = quoted.supernodes[0].second.chunks[0].second.agents[0].second.params.find("target_shape");
  CHECK(q->is_stringified_list());
  CHECK(kg::parse_stringified_list(q->as_string()) == std::vector<double>{512, 512});
}

TEST_CASE("yaml plan: empty document is a syntax error") {
  CHECK_THROWS_AS(kg::parse_yaml_plan(""), kg::SyntaxError);
}

TEST_CASE("yaml plan: placeholders are plain strings") {
  const auto g = kg::parse_yaml_plan(fixture_text("ribs_plan.yaml"));
  const auto* csv = g.supernodes.find("chest_xr_image")->chunks.find("load_image")->agents.find("reader")->params.find(
      "csv_path");
  REQUIRE(csv != nullptr);
  CHECK(csv->as_string() == "__input_images__");
  CHECK(kg::is_placeholder(csv->as_string()));
  CHECK_FALSE(kg::is_placeholder("input_images"));
}

TEST_CASE("to_yaml: minimal graph") {
  const auto g = kg::parse_json_plan(R"({"chunks": {"a": {"c": {"agents": {"reader": {}}}}}})");
  const auto yaml = kg::to_yaml(g);
  CHECK(yaml.rfind("chunks:\n", 0) == 0);
  CHECK(yaml.find("  a:\n") != std::string::npos);
  CHECK(yaml.find("    c:\n") != std::string::npos);
  CHECK(yaml.find("      agents:\n") != std::string::npos);
  CHECK(yaml.find("        reader:") != std::string::npos);
  CHECK(kg::parse_yaml_plan(yaml) == g);
}

TEST_CASE("to_yaml: trachea round trip and quoted target_shape") {
  const auto g = kg::parse_json_plan(fixture_text("trachea_plan.json"));
  const auto yaml = kg::to_yaml(g);
  CHECK(yaml.find("target_shape: '[512, 512]'") != std::string::npos);
  CHECK(kg::parse_yaml_plan(yaml) == g);
  CHECK(kg::parse_json_plan(kg::to_json(g)) == g);
}

TEST_CASE("to_yaml: ribs listing re-emits and re-parses identically") {
  const auto g = kg::parse_yaml_plan(fixture_text("ribs_plan.yaml"));
  const auto again = kg::parse_yaml_plan(kg::to_yaml(g));
  CHECK(again == g);
  CHECK(kg::to_yaml(again) == kg::to_yaml(g));
}

TEST_CASE("source path rendering omits absent segments") {
  kg::SourcePath p{"ribs", std::nullopt, std::nullopt, std::nullopt};
  CHECK(p.render() == "ribs");
  p.chunk = "nn";
  p.agent = "tf2_segmentation";
  CHECK(p.render() == "ribs/nn/tf2_segmentation");
  p.param = "weights_path";
  CHECK(p.render() == "ribs/nn/tf2_segmentation/weights_path");
}

TEST_CASE("dag: reader chunk comes first in the ribs plan") {
  const auto dag = kg::build_dag(kg::parse_yaml_plan(fixture_text("ribs_plan.yaml")));
  REQUIRE(!dag.order.empty());
  CHECK(dag.nodes[dag.order.front()].render() == "chest_xr_image/load_image");
  std::vector<std::string> order;
  for (auto i : dag.order) order.push_back(dag.nodes[i].render());
  CHECK(order == std::vector<std::string>{"chest_xr_image/load_image", "ribs_chest_xr/image_processing",
                                          "ribs_chest_xr/neural_net", "ribs_chest_xr/save"});
}

TEST_CASE("dag: two chunks reading each other form a cycle") {
  const auto g = kg::parse_yaml_plan(
      "chunks:\n  s:\n    a:\n      input: from b\n      agents:\n        z_score: {}\n"
      "    b:\n      input: from a\n      agents:\n        z_score: {}\n");
  try {
    kg::build_dag(g);
    FAIL("expected CycleError");
  } catch (const kg::CycleError& e) {
    CHECK(e.cycle().size() == 2);
  }
}

TEST_CASE("dag: dangling chunk reference") {
  const auto g = kg::parse_yaml_plan("chunks:\n  s:\n    a:\n      input: from missing_chunk\n      agents:\n"
                                     "        z_score: {}\n");
  CHECK_THROWS_AS(kg::build_dag(g), kg::UnresolvedRef);
}

TEST_CASE("dag: identical input gives identical order") {
  const auto g = kg::parse_yaml_plan(fixture_text("ribs_plan.yaml"));
  CHECK(kg::build_dag(g).order == kg::build_dag(g).order);
}

TEST_CASE("reserved flag authored as an agent still parses") {
  const auto g = kg::parse_yaml_plan(fixture_text("faults/reserved_as_agent.yaml"));
  const auto* nn = g.supernodes.find("lungs_chest_xr")->chunks.find("neural_net");
  REQUIRE(nn->agents.find("chunk_output") != nullptr);
  CHECK(nn->agents.find("chunk_output")->inline_value.has_value());
}
