#pragma once

#include <string>

#include "cvplan/kg/model.hpp"

namespace cvplan::kg {

/// Emits the plan as YAML: `chunks:` root, 2-space indent, stringified
/// lists single-quoted. parse_yaml_plan(to_yaml(g)) == g for every graph.
std::string to_yaml(const KnowledgeGraph& graph);

/// Emits the plan as pretty-printed JSON with the same key order.
std::string to_json(const KnowledgeGraph& graph);

/// YAML scalar for a plain string, quoted only when a plain scalar would be
/// read back as something else.
std::string yaml_string(const std::string& s);

}  // namespace cvplan::kg
