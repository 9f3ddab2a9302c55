#include "cvplan/kg/dag.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace cvplan::kg {

SourcePath Link::path() const {
  if (consumer_agent) return {consumer.supernode, consumer.chunk, *consumer_agent, slot};
  return {consumer.supernode, consumer.chunk, std::nullopt, slot};
}

std::optional<std::string> chunk_export_agent(const Chunk& chunk) {
  if (chunk.agents.empty()) return std::nullopt;
  for (const auto& [name, agent] : chunk.agents)
    if (agent.chunk_output) return name;
  for (const auto& [name, agent] : chunk.agents)
    if (agent.supernode_output) return name;
  return chunk.agents[chunk.agents.size() - 1].first;
}

std::optional<NodeId> supernode_export_chunk(const KnowledgeGraph& graph, const std::string& supernode) {
  const auto* sn = graph.supernodes.find(supernode);
  if (sn == nullptr) return std::nullopt;
  std::optional<NodeId> found;
  for (const auto& [cn, chunk] : sn->chunks) {
    for (const auto& [an, agent] : chunk.agents) {
      if (!agent.supernode_output) continue;
      if (found) return std::nullopt;
      found = NodeId{supernode, cn};
    }
  }
  return found;
}

namespace {

std::optional<LinkTarget> resolve(const KnowledgeGraph& graph, const std::string& supernode,
                                  const InputRef& ref) {
  if (ref.kind == InputRef::Kind::Chunk) {
    const auto* chunk = graph.supernodes.find(supernode)->chunks.find(ref.name);
    if (chunk == nullptr) return std::nullopt;
    const auto agent = chunk_export_agent(*chunk);
    if (!agent) return std::nullopt;
    return LinkTarget{{supernode, ref.name}, *agent};
  }
  const auto producer = supernode_export_chunk(graph, ref.name);
  if (!producer) return std::nullopt;
  const auto& chunk = *graph.supernodes.find(producer->supernode)->chunks.find(producer->chunk);
  for (const auto& [an, agent] : chunk.agents)
    if (agent.supernode_output) return LinkTarget{*producer, an};
  return std::nullopt;
}

}  // namespace

std::vector<Link> collect_links(const KnowledgeGraph& graph, const AgentPortPredicate& agent_port) {
  std::vector<Link> links;
  for (const auto& [sn, supernode] : graph.supernodes) {
    for (const auto& [cn, chunk] : supernode.chunks) {
      const NodeId consumer{sn, cn};
      for (const auto& [slot, ref] : chunk.inputs) {
        if (!input_slot_index(slot)) continue;
        links.push_back({consumer, slot, std::nullopt, ref, resolve(graph, sn, ref)});
      }
      if (!agent_port) continue;
      for (const auto& [an, agent] : chunk.agents) {
        for (const auto& [pn, pv] : agent.params) {
          if (!pv.is_string() || !agent_port(an, pn)) continue;
          const auto ref = InputRef::parse(pv.as_string());
          links.push_back({consumer, pn, an, ref, resolve(graph, sn, ref)});
        }
      }
    }
  }
  return links;
}

std::size_t Dag::index_of(const NodeId& id) const {
  const auto it = std::find(nodes.begin(), nodes.end(), id);
  return static_cast<std::size_t>(it - nodes.begin());
}

std::vector<std::size_t> Dag::predecessors(std::size_t node) const {
  std::vector<std::size_t> out;
  for (const auto& [from, to] : edges)
    if (to == node) out.push_back(from);
  return out;
}

TopoResult topological_sort(std::size_t node_count,
                            const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> succ(node_count);
  std::vector<std::size_t> indegree(node_count, 0);
  for (const auto& [from, to] : edges) {
    succ[from].push_back(to);
    ++indegree[to];
  }
  // Min-heap on authoring index keeps the order deterministic.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < node_count; ++i)
    if (indegree[i] == 0) ready.push(i);

  TopoResult result;
  while (!ready.empty()) {
    const auto n = ready.top();
    ready.pop();
    result.order.push_back(n);
    for (const auto s : succ[n])
      if (--indegree[s] == 0) ready.push(s);
  }
  if (result.order.size() == node_count) return result;

  // Walk predecessors among the stuck nodes until one repeats: that loop is a cycle.
  std::vector<std::vector<std::size_t>> pred(node_count);
  for (const auto& [from, to] : edges)
    if (indegree[from] > 0 && indegree[to] > 0) pred[to].push_back(from);
  std::size_t start = 0;
  while (indegree[start] == 0) ++start;
  std::vector<std::size_t> walk;
  std::vector<std::size_t> seen_at(node_count, node_count);
  auto cur = start;
  while (seen_at[cur] == node_count) {
    seen_at[cur] = walk.size();
    walk.push_back(cur);
    cur = *std::min_element(pred[cur].begin(), pred[cur].end());
  }
  result.cycle.assign(walk.begin() + static_cast<std::ptrdiff_t>(seen_at[cur]), walk.end());
  std::reverse(result.cycle.begin(), result.cycle.end());
  result.order.clear();
  return result;
}

Dag build_dag(const KnowledgeGraph& graph, const AgentPortPredicate& agent_port) {
  Dag dag;
  for (const auto& [sn, supernode] : graph.supernodes)
    for (const auto& [cn, chunk] : supernode.chunks) dag.nodes.push_back({sn, cn});

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& link : collect_links(graph, agent_port)) {
    if (!link.target) {
      throw UnresolvedRef("input '" + link.ref.text() + "' does not resolve to a producing chunk",
                          link.path());
    }
    const auto edge = std::make_pair(dag.index_of(link.target->producer), dag.index_of(link.consumer));
    if (seen.insert(edge).second) dag.edges.push_back(edge);
  }

  auto topo = topological_sort(dag.nodes.size(), dag.edges);
  if (!topo.cycle.empty()) {
    std::vector<NodeId> cycle;
    std::string text;
    for (const auto i : topo.cycle) {
      cycle.push_back(dag.nodes[i]);
      text += dag.nodes[i].render() + " -> ";
    }
    text += dag.nodes[topo.cycle.front()].render();
    throw CycleError("dependency cycle: " + text, std::move(cycle));
  }
  dag.order = std::move(topo.order);
  return dag;
}

}  // namespace cvplan::kg
