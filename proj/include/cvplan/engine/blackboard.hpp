#pragma once

// Append-only shared working memory. Agents post tagged messages; each message
// names the messages it was computed from, so any result can be traced back to
// the images it came from.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cvplan/kg/model.hpp"
#include "cvplan/registry/tool_registry.hpp"
#include "cvplan/vision/image.hpp"

namespace cvplan::engine {

using MessageId = std::uint64_t;

/// Image, mask, file path (weights or artifact, relative to the run directory)
/// or scalar.
using Payload = std::variant<vision::ImageBuffer, vision::MaskBuffer, std::string, double>;

struct BlackboardMessage {
  MessageId id = 0;
  /// `supernode/chunk/agent` unless the poster chose otherwise.
  std::string tag;
  /// Extra tags this message answers to (chunk and supernode exports).
  std::vector<std::string> aliases;
  registry::DataKind kind = registry::DataKind::Image;
  std::shared_ptr<const Payload> payload;
  kg::SourcePath producer;
  std::vector<MessageId> parents;
  /// Input case the message belongs to; -1 for case-independent results.
  int case_index = -1;
  /// Schedule-independent position used to order the persisted dump.
  std::vector<std::int64_t> order_key;

  bool answers_to(const std::string& t) const;
};

class UnknownTag : public std::runtime_error {
 public:
  explicit UnknownTag(const std::string& tag) : std::runtime_error("unknown tag '" + tag + "'"), tag_(tag) {}
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
};

class Blackboard {
 public:
  /// Assigns the next id. Parents must already be on the board. Thread-safe.
  MessageId post(BlackboardMessage message);

  std::size_t size() const;
  /// Copy of the message with this id (payload shared, never mutated).
  BlackboardMessage get(MessageId id) const;
  std::vector<BlackboardMessage> messages() const;

  /// Latest message answering to `tag` (optionally for one case) plus all of
  /// its ancestors, in id order. Throws UnknownTag.
  std::vector<BlackboardMessage> query_chain(const std::string& tag, std::optional<int> case_index = {}) const;

  /// Persisted form: payloads replaced by FNV-1a hashes, messages sorted by
  /// order_key and renumbered 1..N so concurrent schedules dump identically.
  std::string dump_json() const;

 private:
  mutable std::mutex mutex_;
  std::vector<BlackboardMessage> messages_;
};

/// 64-bit FNV-1a over the payload's kind, shape and sample bits, as hex.
std::string payload_hash(const Payload& payload);

}  // namespace cvplan::engine
