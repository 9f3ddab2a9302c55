#include "cvplan/engine/blackboard.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

namespace cvplan::engine {

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(T v) {
    bytes(&v, sizeof v);
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

bool BlackboardMessage::answers_to(const std::string& t) const {
  return tag == t || std::find(aliases.begin(), aliases.end(), t) != aliases.end();
}

std::string payload_hash(const Payload& payload) {
  Fnv1a h;
  h.value<std::uint8_t>(static_cast<std::uint8_t>(payload.index()));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, vision::ImageBuffer>) {
          h.value<std::int32_t>(p.width);
          h.value<std::int32_t>(p.height);
          h.value<std::int32_t>(p.channels);
          for (double v : p.samples) h.value<std::uint64_t>(std::bit_cast<std::uint64_t>(v));
        } else if constexpr (std::is_same_v<T, vision::MaskBuffer>) {
          h.value<std::int32_t>(p.width);
          h.value<std::int32_t>(p.height);
          h.bytes(p.bits.data(), p.bits.size());
        } else if constexpr (std::is_same_v<T, std::string>) {
          h.bytes(p.data(), p.size());
        } else {
          h.value<std::uint64_t>(std::bit_cast<std::uint64_t>(p));
        }
      },
      payload);
  return h.hex();
}

MessageId Blackboard::post(BlackboardMessage message) {
  std::lock_guard lock(mutex_);
  const auto next = static_cast<MessageId>(messages_.size() + 1);
  for (const auto parent : message.parents)
    if (parent == 0 || parent >= next) throw std::invalid_argument("post: parent id " + std::to_string(parent) + " is not on the board");
  message.id = next;
  messages_.push_back(std::move(message));
  return next;
}

std::size_t Blackboard::size() const {
  std::lock_guard lock(mutex_);
  return messages_.size();
}

BlackboardMessage Blackboard::get(MessageId id) const {
  std::lock_guard lock(mutex_);
  if (id == 0 || id > messages_.size()) throw std::out_of_range("no message with id " + std::to_string(id));
  return messages_[id - 1];
}

std::vector<BlackboardMessage> Blackboard::messages() const {
  std::lock_guard lock(mutex_);
  return messages_;
}

std::vector<BlackboardMessage> Blackboard::query_chain(const std::string& tag, std::optional<int> case_index) const {
  std::lock_guard lock(mutex_);
  auto it = std::find_if(messages_.rbegin(), messages_.rend(), [&](const BlackboardMessage& m) {
    return m.answers_to(tag) && (!case_index || m.case_index == *case_index);
  });
  if (it == messages_.rend()) throw UnknownTag(tag);
  std::set<MessageId> seen;
  std::vector<MessageId> stack{it->id};
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    for (const auto p : messages_[id - 1].parents) stack.push_back(p);
  }
  std::vector<BlackboardMessage> chain;
  for (const auto id : seen) chain.push_back(messages_[id - 1]);
  return chain;
}

std::string Blackboard::dump_json() const {
  auto snapshot = messages();
  std::stable_sort(snapshot.begin(), snapshot.end(), [](const BlackboardMessage& a, const BlackboardMessage& b) {
    if (a.order_key != b.order_key) return a.order_key < b.order_key;
    return a.tag < b.tag;
  });
  std::map<MessageId, MessageId> renumber;
  for (std::size_t i = 0; i < snapshot.size(); ++i) renumber[snapshot[i].id] = i + 1;

  auto out = nlohmann::ordered_json::array();
  for (const auto& m : snapshot) {
    std::vector<MessageId> parents;
    for (const auto p : m.parents) parents.push_back(renumber.at(p));
    std::sort(parents.begin(), parents.end());
    nlohmann::ordered_json j;
    j["id"] = renumber.at(m.id);
    j["tag"] = m.tag;
    j["aliases"] = m.aliases;
    j["kind"] = std::string(registry::to_string(m.kind));
    j["case"] = m.case_index;
    j["producer"] = m.producer.render();
    j["parents"] = parents;
    j["payload_hash"] = m.payload ? payload_hash(*m.payload) : std::string();
    if (m.payload && std::holds_alternative<std::string>(*m.payload)) j["file"] = std::get<std::string>(*m.payload);
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

}  // namespace cvplan::engine
