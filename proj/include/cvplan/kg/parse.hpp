#pragma once

#include <string_view>

#include "cvplan/kg/errors.hpp"
#include "cvplan/kg/model.hpp"

namespace cvplan::kg {

/// Parses a plan in the JSON form the planner asks the model for.
/// Throws SyntaxError for malformed JSON and StructureError when the nesting
/// is not chunks -> supernode -> chunk -> agents. Semantic problems (unknown
/// agents, dangling links) parse fine and are left to the verifier.
KnowledgeGraph parse_json_plan(std::string_view text);

/// Same graph semantics as parse_json_plan for the YAML form. Quoted scalars
/// stay strings, so '[512, 512]' is a stringified list while [512, 512] is a
/// native list.
KnowledgeGraph parse_yaml_plan(std::string_view text);

/// Picks the parser from the first non-blank character ('{' means JSON).
KnowledgeGraph parse_plan(std::string_view text);

/// Generic tree loaders shared with the registry and bindings readers.
/// Maps become ParamValue::Map (order kept), sequences ParamValue::List.
ParamValue load_json_tree(std::string_view text);
ParamValue load_yaml_tree(std::string_view text);

}  // namespace cvplan::kg
