#include <doctest.h>

#include "cvplan/kg/errors.hpp"
#include "cvplan/registry/tool_registry.hpp"

using namespace cvplan;
using registry::DataKind;

namespace {

// The clahe and histeq entries exactly as the dictionary format writes them.
constexpr const char* kDictionaryExcerpt = R"json({
  "clahe": {
    "info": {
      "agent_input_def": {"input": {"alternate_names": ["image"], "optional": false, "type": "image_compressed_numpy"}},
      "agent_output_def": {"image": {"type": "image_compressed_numpy"}},
      "agent_parameter_def": {
        "channel": {"optional": true},
        "clip_limit": {"optional": false},
        "nbins": {"optional": false},
        "numpy_only": {"optional": false}
      }
    },
    "path": "simplemind/agent/image_processing/clahe.py"
  },
  "histeq": {
    "info": {
      "agent_input_def": {"input": {"alternate_names": ["image"], "type": "image_compressed_numpy"}},
      "agent_output_def": {"image": {"type": "image_compressed_numpy"}},
      "agent_parameter_def": {"channel": {}, "nbins": {}, "numpy_only": {}}
    },
    "path": "simplemind/agent/image_processing/histeq.py"
  }
})json";

}  // namespace

TEST_CASE("load_registry: clahe entry") {
  const auto reg = registry::load_registry(kDictionaryExcerpt);
  const auto* clahe = reg.lookup("clahe");
  REQUIRE(clahe != nullptr);
  REQUIRE(clahe->inputs.size() == 1);
  CHECK(clahe->inputs[0].name == "input");
  CHECK(clahe->inputs[0].kind == DataKind::Image);
  CHECK_FALSE(clahe->inputs[0].optional);
  REQUIRE(clahe->params.size() == 4);
  CHECK(clahe->find_param("channel")->optional);
  CHECK_FALSE(clahe->find_param("clip_limit")->optional);
  CHECK_FALSE(clahe->find_param("nbins")->optional);
  CHECK_FALSE(clahe->find_param("numpy_only")->optional);
}

TEST_CASE("load_registry: missing optional means required") {
  const auto reg = registry::load_registry(kDictionaryExcerpt);
  const auto* histeq = reg.lookup("histeq");
  REQUIRE(histeq != nullptr);
  for (const auto* name : {"channel", "nbins", "numpy_only"}) CHECK_FALSE(histeq->find_param(name)->optional);
  CHECK_FALSE(histeq->inputs[0].optional);
}

TEST_CASE("load_registry: empty document and schema errors") {
  CHECK(registry::load_registry("{}").tools().empty());
  CHECK_THROWS_AS(registry::load_registry(R"({"x": {"path": "p"}})"), registry::SchemaError);
  CHECK_THROWS_AS(registry::load_registry(R"({"x": )"), kg::SyntaxError);
}

TEST_CASE("builtin registry contents") {
  const auto& reg = registry::builtin_registry();
  for (const auto* name : {"reader", "save_image", "resize", "expand_channels", "clahe", "histeq", "z_score",
                           "tf2_segmentation", "decision_tree", "candidate_selector"})
    CHECK_MESSAGE(reg.contains(name), name);
  CHECK(reg.lookup("no_such_tool") == nullptr);

  const auto* resize = reg.lookup("resize");
  REQUIRE(resize->param_format_rules.count("target_shape") == 1);
  CHECK(resize->param_format_rules.at("target_shape").kind == registry::FormatRule::Kind::StringifiedList);

  const auto* seg = reg.lookup("tf2_segmentation");
  CHECK(seg->trainable);
  for (const auto* p : {"prediction_threshold", "settings_yaml", "working_dir", "weights_path", "weights_url"})
    CHECK_MESSAGE(seg->find_param(p) != nullptr, p);
}

TEST_CASE("registry serialization round trip") {
  const auto& reg = registry::builtin_registry();
  CHECK(registry::load_registry(registry::serialize_registry(reg)) == reg);
  const auto excerpt = registry::load_registry(kDictionaryExcerpt);
  CHECK(registry::load_registry(registry::serialize_registry(excerpt)) == excerpt);
}

TEST_CASE("check_param: stringified list rule") {
  const auto* resize = registry::builtin_registry().lookup("resize");
  const auto& rule = resize->param_format_rules.at("target_shape");
  const auto* spec = resize->find_param("target_shape");

  const auto native = registry::check_param(
      kg::ParamValue::list({kg::ParamValue::integer(512), kg::ParamValue::integer(512)}), *spec, &rule);
  CHECK_FALSE(native.ok);
  CHECK(native.violation.find("expected stringified list like '[512, 512]'") != std::string::npos);

  CHECK(registry::check_param(kg::ParamValue::string("[512, 512]"), *spec, &rule).ok);
  CHECK(registry::check_param(kg::ParamValue::list({}), *spec, nullptr).ok);
  CHECK_FALSE(registry::check_param(kg::ParamValue::string("[512, -1]"), *spec, &rule).ok);
  CHECK_FALSE(registry::check_param(kg::ParamValue::string("[512]"), *spec, &rule).ok);
}
