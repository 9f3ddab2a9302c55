#include "cvplan/verify/verifier.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <nlohmann/json.hpp>

#include "cvplan/kg/dag.hpp"

namespace cvplan::verify {

using kg::Chunk;
using kg::InputRef;
using kg::KnowledgeGraph;
using kg::SourcePath;
using registry::DataKind;
using registry::ToolRegistry;
using registry::ToolSpec;

std::string_view to_string(Code code) {
  switch (code) {
    case Code::Structure: return "E_STRUCTURE";
    case Code::ReservedAsAgent: return "E_RESERVED_AS_AGENT";
    case Code::UnknownAgent: return "E_UNKNOWN_AGENT";
    case Code::UnresolvedInput: return "E_UNRESOLVED_INPUT";
    case Code::TypeMismatch: return "E_TYPE_MISMATCH";
    case Code::MissingParam: return "E_MISSING_PARAM";
    case Code::ParamFormat: return "E_PARAM_FORMAT";
    case Code::Cycle: return "E_CYCLE";
    case Code::NoReader: return "E_NO_READER";
    case Code::OutputFlag: return "E_OUTPUT_FLAG";
    case Code::UnknownParam: return "W_UNKNOWN_PARAM";
  }
  return "?";
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "ERROR" : "WARNING";
}

std::size_t VerificationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(),
                                                [](const Diagnostic& d) { return d.severity == Severity::Error; }));
}

bool VerificationReport::has(Code code) const {
  return std::any_of(diagnostics.begin(), diagnostics.end(), [code](const Diagnostic& d) { return d.code == code; });
}

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const auto up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string closest(std::string_view name, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::max<std::size_t>(3, name.size() / 3) + 1;
  for (const auto& c : candidates) {
    const auto d = edit_distance(name, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

std::string example_value(std::string_view param) {
  static const std::map<std::string, std::string, std::less<>> examples{
      {"target_shape", "'[512, 512]'"},
      {"clip_limit", "0.03"},
      {"nbins", "256"},
      {"numpy_only", "true"},
      {"channel", "0"},
      {"number_of_channels", "1"},
      {"prediction_threshold", "0.5"},
      {"output_filename", "chest_xr_output"},
      {"csv_path", "__input_images__"},
      {"header_params", "__header_params__"},
      {"order", "3"},
      {"mask_alpha", "0.5"},
  };
  const auto it = examples.find(param);
  return it == examples.end() ? "<value>" : it->second;
}

class Checker {
 public:
  Checker(const KnowledgeGraph& graph, const ToolRegistry& registry)
      : graph_(graph), registry_(registry), links_(kg::collect_links(graph, registry.agent_port_predicate())) {}

  VerificationReport run() {
    check_structure();
    check_reserved_names();
    check_agents_known();
    check_inputs_resolve();
    check_output_flags();
    check_types();
    check_params();
    check_acyclic();
    check_reader();
    VerificationReport report;
    report.diagnostics = std::move(diags_);
    report.passed = report.error_count() == 0;
    return report;
  }

 private:
  void error(Code code, SourcePath path, std::string message) {
    diags_.push_back({code, Severity::Error, std::move(path), std::move(message)});
  }
  void warning(Code code, SourcePath path, std::string message) {
    diags_.push_back({code, Severity::Warning, std::move(path), std::move(message)});
  }

  static SourcePath at(const std::string& sn, const std::string& cn) { return {sn, cn, {}, {}}; }
  static SourcePath at(const std::string& sn, const std::string& cn, const std::string& an) {
    return {sn, cn, an, {}};
  }

  const ToolSpec* tool_for(const std::string& agent_name, const kg::AgentInstance& agent) const {
    if (agent.inline_value || kg::is_reserved_flag(agent_name)) return nullptr;
    return registry_.lookup(agent_name);
  }

  // V1
  void check_structure() {
    for (const auto& [sn, supernode] : graph_.supernodes) {
      if (supernode.chunks.empty()) {
        error(Code::Structure, {sn, {}, {}, {}},
              "supernode has no chunks; each supernode holds chunks, each chunk an \"agents\" object");
      }
      for (const auto& [cn, chunk] : supernode.chunks) {
        for (const auto& [slot, ref] : chunk.inputs) {
          if (!kg::input_slot_index(slot)) {
            error(Code::Structure, {sn, cn, {}, slot},
                  "'" + slot + "' is not an input slot; chunk keys are \"agents\" and `input` or `input_<n>` (e.g. input_1: " +
                      ref.text() + ")");
          }
        }
        if (chunk.agents.empty()) {
          error(Code::Structure, at(sn, cn), "chunk has no agents; add an \"agents\" object with at least one agent");
        }
        for (const auto& [an, agent] : chunk.agents) {
          if (agent.inline_value && !kg::is_reserved_flag(an)) {
            error(Code::Structure, at(sn, cn, an),
                  "agent must be an object of parameters, found " + agent.inline_value->display() + "; write `" + an +
                      ": {}` for an agent without parameters");
          }
        }
      }
    }
  }

  // V2
  void check_reserved_names() {
    for (const auto& [sn, supernode] : graph_.supernodes) {
      for (const auto& [cn, chunk] : supernode.chunks) {
        for (const auto& [an, agent] : chunk.agents) {
          if (!kg::is_reserved_flag(an)) continue;
          error(Code::ReservedAsAgent, at(sn, cn, an),
                "`" + an + "` is a flag, not an agent; remove this entry and set `" + an +
                    ": true` inside the agent whose result should be exported");
        }
      }
    }
  }

  // V3
  void check_agents_known() {
    const auto known = registry_.names();
    for (const auto& [sn, supernode] : graph_.supernodes) {
      std::set<std::string> present;
      for (const auto& [cn, chunk] : supernode.chunks)
        for (const auto& [an, agent] : chunk.agents) present.insert(an);

      for (const auto& [cn, chunk] : supernode.chunks) {
        for (const auto& [an, agent] : chunk.agents) {
          if (kg::is_reserved_flag(an)) continue;
          const auto* spec = registry_.lookup(an);
          if (spec == nullptr) {
            auto msg = "unknown agent '" + an + "'";
            if (const auto guess = closest(an, known); !guess.empty()) msg += "; did you mean '" + guess + "'?";
            msg += " Available agents: " + join(known);
            error(Code::UnknownAgent, at(sn, cn, an), msg);
            continue;
          }
          for (const auto& needed : spec->requires_agents) {
            if (present.contains(needed)) continue;
            error(Code::UnknownAgent, at(sn, cn, an),
                  "missing agent '" + needed + "': " + an + " needs a " + needed + " agent upstream in supernode '" + sn +
                      "'; add a " + needed + " agent to a chunk that feeds this one");
          }
        }
      }
    }
  }

  // V4
  void check_inputs_resolve() {
    for (const auto& link : links_) {
      const auto& sn = link.consumer.supernode;
      const auto* supernode = graph_.supernodes.find(sn);
      if (link.ref.kind == InputRef::Kind::Chunk) {
        const auto* target = supernode->chunks.find(link.ref.name);
        if (target == nullptr || link.ref.name.empty()) {
          std::vector<std::string> names;
          for (const auto& [cn, c] : supernode->chunks)
            if (cn != link.consumer.chunk) names.push_back("from " + cn);
          auto msg = "input '" + link.ref.text() + "' names no chunk in supernode '" + sn + "'";
          msg += names.empty() ? std::string("; this supernode has no other chunks")
                               : "; use one of: " + join(names);
          if (graph_.supernodes.contains(link.ref.name))
            msg += " (to read supernode '" + link.ref.name + "' drop the `from ` prefix)";
          error(Code::UnresolvedInput, link.path(), msg);
        }
        continue;
      }
      if (!graph_.supernodes.contains(link.ref.name)) {
        auto msg = "input '" + link.ref.text() + "' names no supernode";
        if (supernode->chunks.contains(link.ref.name))
          msg += "; '" + link.ref.name + "' is a chunk here, write `from " + link.ref.name + "`";
        else
          msg += "; supernodes are: " + join(supernode_names());
        error(Code::UnresolvedInput, link.path(), msg);
      }
    }
  }

  // V5
  void check_output_flags() {
    std::set<std::string> referenced;
    for (const auto& link : links_)
      if (link.ref.kind == InputRef::Kind::Supernode) referenced.insert(link.ref.name);

    for (const auto& [sn, supernode] : graph_.supernodes) {
      std::vector<std::string> flagged;
      for (const auto& [cn, chunk] : supernode.chunks) {
        std::vector<std::string> chunk_flagged;
        for (const auto& [an, agent] : chunk.agents) {
          if (agent.supernode_output) flagged.push_back(cn + "/" + an);
          if (agent.chunk_output) chunk_flagged.push_back(an);
          for (const auto& [pn, pv] : agent.params) {
            if (!kg::is_reserved_flag(pn)) continue;
            error(Code::OutputFlag, {sn, cn, an, pn},
                  "`" + pn + "` must be the boolean true, found " + pv.display() + "; write `" + pn + ": true`");
          }
        }
        if (chunk_flagged.size() > 1) {
          error(Code::OutputFlag, at(sn, cn),
                "several agents set chunk_output (" + join(chunk_flagged) + "); keep it on exactly one");
        }
      }
      if (flagged.size() > 1) {
        error(Code::OutputFlag, {sn, {}, {}, {}},
              "several agents set supernode_output (" + join(flagged) + "); keep it on exactly one");
      } else if (flagged.empty() && referenced.contains(sn)) {
        error(Code::OutputFlag, {sn, {}, {}, {}},
              "supernode '" + sn + "' is used as an input but no agent sets `supernode_output: true`; add it to the agent "
              "whose result other supernodes should receive");
      }
    }
  }

  std::optional<DataKind> produced_kind(const kg::Link& link) const {
    if (!link.target) return std::nullopt;
    const auto& chunk = *graph_.supernodes.find(link.target->producer.supernode)->chunks.find(link.target->producer.chunk);
    const auto* agent = chunk.agents.find(link.target->agent);
    const auto* spec = tool_for(link.target->agent, *agent);
    return spec ? spec->output_kind() : std::nullopt;
  }

  // V6, plus required ports that nothing feeds (reported as unresolved inputs).
  void check_types() {
    for (const auto& [sn, supernode] : graph_.supernodes) {
      for (const auto& [cn, chunk] : supernode.chunks) {
        std::vector<const kg::Link*> slot_links;
        for (const auto& [slot, ref] : kg::ordered_inputs(chunk)) {
          for (const auto& l : links_)
            if (!l.consumer_agent && l.consumer.supernode == sn && l.consumer.chunk == cn && l.slot == slot)
              slot_links.push_back(&l);
        }

        std::optional<DataKind> previous;
        bool previous_known = false;
        std::size_t position = 0;
        for (const auto& [an, agent] : chunk.agents) {
          const auto* spec = tool_for(an, agent);
          const bool first = position++ == 0;
          if (spec == nullptr) {
            previous_known = false;
            continue;
          }
          std::vector<bool> bound(spec->inputs.size(), false);
          auto expect = [&](std::size_t port, std::optional<DataKind> got, const std::string& from) {
            bound[port] = true;
            if (!got || *got == spec->inputs[port].kind) return;
            error(Code::TypeMismatch, {sn, cn, an, spec->inputs[port].name},
                  an + " input '" + spec->inputs[port].name + "' expects " +
                      std::string(registry::to_string(spec->inputs[port].kind)) + " but " + from + " provides " +
                      std::string(registry::to_string(*got)) + "; link a producer of " +
                      std::string(registry::to_string(spec->inputs[port].kind)));
          };

          for (const auto& l : links_) {
            if (l.consumer_agent != an || l.consumer.supernode != sn || l.consumer.chunk != cn) continue;
            auto port = spec->find_input(l.slot);
            if (!port) {
              if (const auto idx = kg::input_slot_index(l.slot); idx && *idx <= static_cast<int>(spec->inputs.size()))
                port = static_cast<std::size_t>(*idx - 1);
            }
            if (port) expect(*port, produced_kind(l), "'" + l.ref.text() + "'");
          }

          if (first) {
            for (std::size_t j = 0; j < slot_links.size() && j < spec->inputs.size(); ++j)
              if (!bound[j]) expect(j, produced_kind(*slot_links[j]), "'" + slot_links[j]->ref.text() + "'");
          } else {
            if (!spec->inputs.empty() && !bound[0]) {
              bound[0] = true;
              if (previous_known) expect(0, previous, "the previous agent in the chunk");
            }
            for (std::size_t j = 1; j < slot_links.size() && j < spec->inputs.size(); ++j)
              if (!bound[j]) expect(j, produced_kind(*slot_links[j]), "'" + slot_links[j]->ref.text() + "'");
          }

          for (std::size_t p = 0; p < spec->inputs.size(); ++p) {
            if (bound[p] || spec->inputs[p].optional) continue;
            const auto& port = spec->inputs[p];
            error(Code::UnresolvedInput, {sn, cn, an, port.name},
                  an + " requires input '" + port.name + "' (" + std::string(registry::to_string(port.kind)) +
                      ") but the chunk provides none; add `input_" + std::to_string(p + 1) +
                      ": <supernode>` or `input_" + std::to_string(p + 1) + ": from <chunk>` to chunk '" + cn + "'");
          }
          previous = spec->output_kind();
          previous_known = true;
        }
      }
    }
  }

  // V7
  void check_params() {
    const auto is_link = registry_.agent_port_predicate();
    for (const auto& [sn, supernode] : graph_.supernodes) {
      for (const auto& [cn, chunk] : supernode.chunks) {
        for (const auto& [an, agent] : chunk.agents) {
          const auto* spec = tool_for(an, agent);
          if (spec == nullptr) continue;
          for (const auto& p : spec->params) {
            if (p.optional || agent.params.contains(p.name)) continue;
            error(Code::MissingParam, {sn, cn, an, p.name},
                  an + " requires parameter '" + p.name + "'; add e.g. `" + p.name + ": " + example_value(p.name) + "`");
          }
          for (const auto& [pn, pv] : agent.params) {
            if (kg::is_reserved_flag(pn)) continue;
            const auto* ps = spec->find_param(pn);
            if (ps == nullptr) {
              if (pv.is_string() && is_link(an, pn)) continue;
              warning(Code::UnknownParam, {sn, cn, an, pn},
                      an + " does not declare parameter '" + pn + "'; it is passed through unchecked");
              continue;
            }
            const auto rule = spec->param_format_rules.find(pn);
            const auto check = registry::check_param(pv, *ps, rule == spec->param_format_rules.end() ? nullptr : &rule->second);
            if (!check.ok) error(Code::ParamFormat, {sn, cn, an, pn}, check.violation);
          }
        }
      }
    }
  }

  // V8
  void check_acyclic() {
    std::vector<kg::NodeId> nodes;
    for (const auto& [sn, supernode] : graph_.supernodes)
      for (const auto& [cn, chunk] : supernode.chunks) nodes.push_back({sn, cn});
    auto index = [&](const kg::NodeId& id) {
      return static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), id) - nodes.begin());
    };
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& l : links_)
      if (l.target) edges.emplace_back(index(l.target->producer), index(l.consumer));
    const auto topo = kg::topological_sort(nodes.size(), edges);
    if (topo.cycle.empty()) return;
    std::string text;
    for (const auto i : topo.cycle) text += nodes[i].render() + " -> ";
    text += nodes[topo.cycle.front()].render();
    const auto& head = nodes[topo.cycle.front()];
    error(Code::Cycle, at(head.supernode, head.chunk),
          "chunks depend on each other in a cycle (" + text + "); every input must come from an earlier stage");
  }

  // V9
  void check_reader() {
    for (const auto& [sn, supernode] : graph_.supernodes)
      for (const auto& [cn, chunk] : supernode.chunks)
        if (chunk.inputs.empty() && chunk.agents.contains("reader")) return;
    error(Code::NoReader, {graph_.supernodes[0].first, {}, {}, {}},
          "no chunk loads images; put a chunk without inputs whose agents start with `reader` (csv_path: "
          "__input_images__) at the beginning of the pipeline");
  }

  std::vector<std::string> supernode_names() const {
    std::vector<std::string> out;
    for (const auto& [sn, s] : graph_.supernodes) out.push_back(sn);
    return out;
  }

  const KnowledgeGraph& graph_;
  const ToolRegistry& registry_;
  std::vector<kg::Link> links_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

VerificationReport verify(const KnowledgeGraph& graph, const ToolRegistry& registry) {
  return Checker(graph, registry).run();
}

std::string render_report(const VerificationReport& report) {
  std::ostringstream out;
  for (const auto& d : report.diagnostics)
    out << to_string(d.severity) << ' ' << to_string(d.code) << ' ' << d.path.render() << ": " << d.message << '\n';
  out << "Checks passed: " << (report.passed ? "True" : "False") << '\n';
  return out.str();
}

std::string report_to_json(const VerificationReport& report) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& d : report.diagnostics) {
    arr.push_back({{"severity", std::string(to_string(d.severity))},
                   {"code", std::string(to_string(d.code))},
                   {"path", d.path.render()},
                   {"message", d.message}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace cvplan::verify
