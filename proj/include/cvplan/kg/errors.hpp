#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvplan/kg/model.hpp"

namespace cvplan::kg {

/// Malformed JSON/YAML text. Line and column are 1-based; 0 when unknown.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& what, std::size_t position, std::size_t line, std::size_t column)
      : std::runtime_error(what), position_(position), line_(line), column_(column) {}

  std::size_t position() const { return position_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t position_;
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed text whose nesting is not chunks -> supernode -> chunk -> agents.
class StructureError : public std::runtime_error {
 public:
  StructureError(const std::string& what, SourcePath path)
      : std::runtime_error(path.render() + ": " + what), path_(std::move(path)) {}
  const SourcePath& path() const { return path_; }

 private:
  SourcePath path_;
};

class UnresolvedRef : public std::runtime_error {
 public:
  UnresolvedRef(const std::string& what, SourcePath path)
      : std::runtime_error(path.render() + ": " + what), path_(std::move(path)) {}
  const SourcePath& path() const { return path_; }

 private:
  SourcePath path_;
};

class CycleError : public std::runtime_error {
 public:
  CycleError(const std::string& what, std::vector<NodeId> cycle)
      : std::runtime_error(what), cycle_(std::move(cycle)) {}
  const std::vector<NodeId>& cycle() const { return cycle_; }

 private:
  std::vector<NodeId> cycle_;
};

}  // namespace cvplan::kg
