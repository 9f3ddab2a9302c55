#pragma once

// Knowledge-graph configuration model: supernodes -> chunks -> agent pipelines.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cvplan::kg {

inline constexpr std::string_view kSupernodeOutput = "supernode_output";
inline constexpr std::string_view kChunkOutput = "chunk_output";

bool is_reserved_flag(std::string_view name);

/// Insertion-ordered string-keyed map. Plans are small; linear lookup is fine.
template <typename V>
class OrderedMap {
 public:
  using value_type = std::pair<std::string, V>;
  using const_iterator = typename std::vector<value_type>::const_iterator;
  using iterator = typename std::vector<value_type>::iterator;

  const V* find(std::string_view key) const {
    for (const auto& [k, v] : items_)
      if (k == key) return &v;
    return nullptr;
  }
  V* find(std::string_view key) {
    for (auto& [k, v] : items_)
      if (k == key) return &v;
    return nullptr;
  }
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  /// Returns false (and leaves the map unchanged) when the key already exists.
  bool insert(std::string key, V value) {
    if (contains(key)) return false;
    items_.emplace_back(std::move(key), std::move(value));
    return true;
  }
  std::size_t index_of(std::string_view key) const {
    for (std::size_t i = 0; i < items_.size(); ++i)
      if (items_[i].first == key) return i;
    return items_.size();
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const_iterator begin() const { return items_.begin(); }
  const_iterator end() const { return items_.end(); }
  iterator begin() { return items_.begin(); }
  iterator end() { return items_.end(); }
  const value_type& operator[](std::size_t i) const { return items_[i]; }
  value_type& operator[](std::size_t i) { return items_[i]; }

  bool operator==(const OrderedMap&) const = default;

 private:
  std::vector<value_type> items_;
};

/// A parameter value as authored. Lists and maps only arise from native
/// YAML/JSON structure; the verifier decides whether they are acceptable.
class ParamValue {
 public:
  enum class Kind { Null, String, Integer, Float, Boolean, List, Map };

  ParamValue() = default;
  static ParamValue null() { return {}; }
  static ParamValue string(std::string s);
  static ParamValue integer(std::int64_t v);
  static ParamValue floating(double v);
  static ParamValue boolean(bool v);
  static ParamValue list(std::vector<ParamValue> items);
  static ParamValue map(std::vector<std::pair<std::string, ParamValue>> fields);

  Kind kind() const { return kind_; }
  bool is_string() const { return kind_ == Kind::String; }
  bool is_number() const { return kind_ == Kind::Integer || kind_ == Kind::Float; }
  bool is_scalar() const { return kind_ != Kind::List && kind_ != Kind::Map; }

  /// A string whose trimmed text starts with '[' and ends with ']'.
  bool is_stringified_list() const;

  const std::string& as_string() const { return text_; }
  std::int64_t as_integer() const { return int_; }
  bool as_bool() const { return bool_; }
  /// Integer or float widened to double.
  double as_number() const;
  const std::vector<ParamValue>& items() const { return items_; }
  const std::vector<std::pair<std::string, ParamValue>>& fields() const { return fields_; }

  /// Compact display form used in diagnostics ("[512, 512]", "'abc'", "true").
  std::string display() const;

  bool operator==(const ParamValue&) const = default;

 private:
  Kind kind_ = Kind::Null;
  std::string text_;
  std::int64_t int_ = 0;
  double float_ = 0.0;
  bool bool_ = false;
  std::vector<ParamValue> items_;
  std::vector<std::pair<std::string, ParamValue>> fields_;
};

/// Numbers of a stringified list such as "[512, 512]"; nullopt when any
/// element is not numeric or the text is not bracketed.
std::optional<std::vector<double>> parse_stringified_list(std::string_view text);

/// Placeholder of the form __name__ (the whole string).
bool is_placeholder(std::string_view text);

/// Where a finding or error points: supernode[/chunk[/agent]][/param].
struct SourcePath {
  std::string supernode;
  std::optional<std::string> chunk;
  std::optional<std::string> agent;
  std::optional<std::string> param;

  std::string render() const;
  bool operator==(const SourcePath&) const = default;
};

struct InputRef {
  enum class Kind { Supernode, Chunk };
  Kind kind = Kind::Supernode;
  std::string name;

  /// Parses "from <chunk>" into a chunk ref, anything else into a supernode ref.
  static InputRef parse(std::string_view text);
  /// Wire form, e.g. "from image_processing".
  std::string text() const;
  bool operator==(const InputRef&) const = default;
};

struct AgentInstance {
  OrderedMap<ParamValue> params;
  bool supernode_output = false;
  bool chunk_output = false;
  /// Set when the agent was authored as a bare scalar ("chunk_output: true"
  /// inside `agents`) instead of an object. Kept so the verifier can point at it.
  std::optional<ParamValue> inline_value;

  bool operator==(const AgentInstance&) const = default;
};

struct Chunk {
  OrderedMap<InputRef> inputs;
  OrderedMap<AgentInstance> agents;

  bool operator==(const Chunk&) const = default;
};

struct Supernode {
  OrderedMap<Chunk> chunks;

  bool operator==(const Supernode&) const = default;
};

struct KnowledgeGraph {
  OrderedMap<Supernode> supernodes;

  bool operator==(const KnowledgeGraph&) const = default;
};

/// 1 for "input", N for "input_N"; nullopt for anything else.
std::optional<int> input_slot_index(std::string_view key);

/// Chunk inputs ordered by slot index (authoring order breaks ties).
std::vector<std::pair<std::string, InputRef>> ordered_inputs(const Chunk& chunk);

/// A (supernode, chunk) vertex of the dataflow graph.
struct NodeId {
  std::string supernode;
  std::string chunk;

  std::string render() const { return supernode + "/" + chunk; }
  bool operator==(const NodeId&) const = default;
  auto operator<=>(const NodeId&) const = default;
};

}  // namespace cvplan::kg
