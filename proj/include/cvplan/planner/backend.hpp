#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvplan/planner/prompt.hpp"

namespace cvplan::planner {

/// Transport-level failure: nothing usable came back from the generator.
class BackendUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The backend could not be set up (bad config file, missing fields).
class BackendConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  /// One completion for the conversation so far.
  virtual std::string generate(const Conversation& conversation) = 0;
  virtual std::string describe() const = 0;
};

/// Replays canned completions in order; running past the end is a transport
/// failure. Keeps every conversation it was shown.
class ScriptedBackend : public GeneratorBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> completions);
  /// A JSON array of strings.
  static ScriptedBackend from_file(const std::filesystem::path& path);

  std::string generate(const Conversation& conversation) override;
  std::string describe() const override;

  const std::vector<Conversation>& calls() const { return calls_; }

 private:
  std::vector<std::string> completions_;
  std::size_t next_ = 0;
  std::vector<Conversation> calls_;
};

struct RemoteConfig {
  /// e.g. http://localhost:8000/v1; requests go to <base_url>/chat/completions.
  std::string base_url;
  std::string model;
  /// Environment variable holding the bearer token; empty for none.
  std::string api_key_env_var;
  double temperature = 0.0;
  int timeout_seconds = 120;
};

/// JSON or YAML with keys base_url, model, api_key_env_var, temperature,
/// timeout_seconds. Throws BackendConfigError.
RemoteConfig load_remote_config(const std::filesystem::path& path);
RemoteConfig parse_remote_config(std::string_view text);

/// Chat-completions client (OpenAI-compatible servers such as vLLM).
class RemoteBackend : public GeneratorBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  std::string generate(const Conversation& conversation) override;
  std::string describe() const override;

 private:
  RemoteConfig config_;
};

}  // namespace cvplan::planner
