#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cvplan/kg/errors.hpp"
#include "cvplan/kg/model.hpp"

namespace cvplan::kg {

/// Where an input link points once resolved.
struct LinkTarget {
  NodeId producer;
  /// Agent whose message is consumed (the chunk or supernode export).
  std::string agent;
};

/// An input link found in the graph, resolved or not.
struct Link {
  NodeId consumer;
  /// Chunk slot ("input_2") or, for agent-level links, the agent's port key.
  std::string slot;
  /// Set for agent-level links.
  std::optional<std::string> consumer_agent;
  InputRef ref;
  std::optional<LinkTarget> target;

  SourcePath path() const;
};

/// Name of the agent a chunk exports: the chunk_output agent, else the
/// chunk's supernode_output agent, else the last agent. nullopt for an
/// agent-less chunk.
std::optional<std::string> chunk_export_agent(const Chunk& chunk);

/// The single chunk holding the supernode's supernode_output agent; nullopt
/// when there are zero or several.
std::optional<NodeId> supernode_export_chunk(const KnowledgeGraph& graph, const std::string& supernode);

/// Agent-level input keys are matched by this predicate: `input`/`input_N`
/// or a port name the tool declares (supplied by the caller).
using AgentPortPredicate = std::function<bool(const std::string& agent_name, const std::string& key)>;

/// Every input link in authoring order. Unresolvable links have no target.
/// `agent_port` classifies agent params as input links; pass nullptr to
/// consider chunk-level links only.
std::vector<Link> collect_links(const KnowledgeGraph& graph, const AgentPortPredicate& agent_port = {});

struct Dag {
  /// All chunks in authoring order.
  std::vector<NodeId> nodes;
  /// Edges as indices into `nodes`: producer -> consumer (deduplicated).
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  /// Topological order (indices into `nodes`), ties broken by authoring order.
  std::vector<std::size_t> order;

  std::size_t index_of(const NodeId& id) const;
  std::vector<std::size_t> predecessors(std::size_t node) const;
};

/// Topological order over the given edges or the nodes of one cycle.
struct TopoResult {
  std::vector<std::size_t> order;
  std::vector<std::size_t> cycle;
};
TopoResult topological_sort(std::size_t node_count,
                            const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Builds the chunk dependency graph. Throws UnresolvedRef for a dangling
/// link and CycleError when no topological order exists.
Dag build_dag(const KnowledgeGraph& graph, const AgentPortPredicate& agent_port = {});

}  // namespace cvplan::kg
