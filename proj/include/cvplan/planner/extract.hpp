#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvplan::planner {

class ExtractionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Candidate JSON text in a model completion: the first fenced block tagged
/// json, else the longest balanced top-level {...} span (first on ties).
/// Braces inside string literals do not count.
std::string extract_json(std::string_view completion);

}  // namespace cvplan::planner
