#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>

#include "cvplan/planner/refine_loop.hpp"

namespace cvplan::planner {

/// Human-readable, chronological: one block per attempt with its outcome and
/// the feedback forwarded, then the result line.
std::string session_trace(const PlanSession& session);

/// Machine-readable sidecar carrying the same content as session_trace.
std::string session_json(const PlanSession& session);

/// Inverse of session_json. Throws std::runtime_error on malformed input.
PlanSession session_from_json(std::string_view text);

/// <yaml stem>.trace.txt and <yaml stem>.trace.json beside `yaml_path`.
std::pair<std::filesystem::path, std::filesystem::path> trace_paths(const std::filesystem::path& yaml_path);

/// Writes both trace files; returns their paths.
std::pair<std::filesystem::path, std::filesystem::path> write_session_trace(const PlanSession& session,
                                                                            const std::filesystem::path& yaml_path);

}  // namespace cvplan::planner
