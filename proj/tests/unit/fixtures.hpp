#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef CVPLAN_FIXTURES
#error "CVPLAN_FIXTURES must point at tests/fixtures"
#endif

namespace cvplan::testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(CVPLAN_FIXTURES) / name; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture_text(const std::string& name) { return read_file(fixture(name)); }

}  // namespace cvplan::testing
