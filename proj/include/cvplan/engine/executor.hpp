#pragma once

// Runs a verified plan over the blackboard. Chunks fire in waves: a chunk is
// ready once every chunk it reads from has fired for all cases. Inside a chunk
// the agents run in authored order, each one over every case before the next
// starts, so a trainable agent sees the whole training set before it fits.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvplan/engine/bindings.hpp"
#include "cvplan/engine/blackboard.hpp"
#include "cvplan/engine/weights.hpp"
#include "cvplan/kg/model.hpp"
#include "cvplan/registry/tool_registry.hpp"
#include "cvplan/verify/verifier.hpp"
#include "cvplan/vision/tools.hpp"

namespace cvplan::engine {

using vision::EmptyTrainingSet;

class ToolRuntimeError : public std::runtime_error {
 public:
  ToolRuntimeError(const kg::SourcePath& path, const std::string& cause)
      : std::runtime_error(path.render() + ": " + cause), path_(path), cause_(cause) {}
  const kg::SourcePath& path() const { return path_; }
  const std::string& cause() const { return cause_; }

 private:
  kg::SourcePath path_;
  std::string cause_;
};

/// The plan did not pass verification; execution never started.
class InvalidPlan : public std::runtime_error {
 public:
  explicit InvalidPlan(verify::VerificationReport report)
      : std::runtime_error("plan failed verification:\n" + verify::render_report(report)), report_(std::move(report)) {}
  const verify::VerificationReport& report() const { return report_; }

 private:
  verify::VerificationReport report_;
};

/// Order in which ready chunks of a wave (and the cases inside a chunk) are
/// processed. Every schedule yields the same dump and files.
enum class Schedule { Forward, Reverse, Parallel };

struct ExecuteOptions {
  Schedule schedule = Schedule::Forward;
  /// Receives progress lines in a schedule-independent order.
  std::function<void(const std::string&)> log;
};

/// One chunk firing for one case. Ticks come from a single counter shared by
/// all firings, so start/end order reflects real execution order.
struct FireRecord {
  kg::NodeId node;
  int case_index = 0;
  std::uint64_t start_tick = 0;
  std::uint64_t end_tick = 0;
};

struct TrainedAgent {
  kg::SourcePath agent;
  std::filesystem::path file;
  SegmenterWeights weights;
};

struct CaseMask {
  std::string supernode;
  int case_index = 0;
  std::filesystem::path file;
  /// Against the reference mask, when the manifest provides one.
  std::optional<double> dice;
};

struct ExecutionResult {
  std::unique_ptr<Blackboard> board;
  std::size_t cases = 0;
  /// Chunks that ran, in topological order.
  std::vector<kg::NodeId> executed;
  std::vector<FireRecord> fires;
  std::vector<TrainedAgent> trained;
  /// Think mode: one entry per mask-exporting supernode and case.
  std::vector<CaseMask> masks;
  /// Every file written (overlays, masks, weights, blackboard.json), sorted.
  std::vector<std::filesystem::path> artifacts;
  std::filesystem::path blackboard_file;

  /// Mean Dice over masks that have a reference; nullopt when none do.
  std::optional<double> mean_dice() const;
  std::optional<double> mean_dice(const std::string& supernode) const;
};

/// Verifies, binds placeholders, then runs every chunk (think) or only the
/// trainable chunks and their ancestors (learn). Writes blackboard.json into
/// bindings.out_dir. Throws InvalidPlan, PlaceholderUnbound, MissingWeights,
/// EmptyTrainingSet or ToolRuntimeError.
ExecutionResult execute(const kg::KnowledgeGraph& graph, const registry::ToolRegistry& registry,
                        const RunBindings& bindings, const ExecuteOptions& options = {});

/// execute() in learn mode.
ExecutionResult sm_learn(const kg::KnowledgeGraph& graph, const registry::ToolRegistry& registry,
                         RunBindings bindings, const ExecuteOptions& options = {});

/// execute() in think mode.
ExecutionResult sm_think(const kg::KnowledgeGraph& graph, const registry::ToolRegistry& registry,
                         RunBindings bindings, const ExecuteOptions& options = {});

}  // namespace cvplan::engine
