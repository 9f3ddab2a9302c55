#include "cvplan/engine/executor.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "cvplan/kg/dag.hpp"
#include "cvplan/vision/image_io.hpp"
#include "cvplan/vision/manifest.hpp"

namespace cvplan::engine {

namespace {

using kg::SourcePath;
using registry::DataKind;
using vision::ImageBuffer;
using vision::MaskBuffer;

struct PortSource {
  enum class Kind { None, PreviousAgent, Link };
  Kind kind = Kind::None;
  /// Producer node index and agent index for links.
  std::size_t node = 0;
  std::size_t agent = 0;
};

struct AgentPlan {
  std::string name;
  const kg::AgentInstance* agent = nullptr;
  const registry::ToolSpec* spec = nullptr;
  std::vector<PortSource> ports;
  /// Chunk and supernode export tags this agent's messages answer to.
  std::vector<std::string> aliases;
};

struct NodePlan {
  kg::NodeId id;
  const kg::Chunk* chunk = nullptr;
  std::vector<AgentPlan> agents;
  std::size_t topo_position = 0;
  bool trainable = false;
};

struct Reader {
  vision::CsvManifest manifest;
};

/// What a fitted or loaded segmenter needs at inference time.
struct SegmenterState {
  SegmenterWeights weights;
  MessageId weights_message = 0;
};

const kg::ParamValue* find_param(const AgentPlan& a, std::string_view name) { return a.agent->params.find(name); }

class Engine {
 public:
  Engine(const kg::KnowledgeGraph& graph, const registry::ToolRegistry& registry, const RunBindings& bindings,
         const ExecuteOptions& options, ExecutionResult& result)
      : graph_(graph), registry_(registry), bindings_(bindings), options_(options), result_(result) {}

  void run() {
    plan_nodes();
    load_readers();
    select_nodes();
    allocate_outputs();
    run_waves();
    if (bindings_.mode == Mode::Think) write_masks();
    finish();
  }

 private:
  // ---- planning -----------------------------------------------------------

  void plan_nodes() {
    const auto predicate = registry_.agent_port_predicate();
    dag_ = kg::build_dag(graph_, predicate);
    links_ = kg::collect_links(graph_, predicate);
    nodes_.resize(dag_.nodes.size());
    for (std::size_t pos = 0; pos < dag_.order.size(); ++pos) nodes_[dag_.order[pos]].topo_position = pos;

    for (std::size_t n = 0; n < dag_.nodes.size(); ++n) {
      auto& np = nodes_[n];
      np.id = dag_.nodes[n];
      np.chunk = graph_.supernodes.find(np.id.supernode)->chunks.find(np.id.chunk);
      const auto chunk_export = kg::chunk_export_agent(*np.chunk);
      const auto sn_export = kg::supernode_export_chunk(graph_, np.id.supernode);
      for (const auto& [an, agent] : np.chunk->agents) {
        AgentPlan ap;
        ap.name = an;
        ap.agent = &agent;
        ap.spec = registry_.lookup(an);
        if (ap.spec == nullptr) throw ToolRuntimeError(path(n, an), "agent is not in the registry");
        if (ap.spec->trainable) np.trainable = true;
        if (chunk_export == an) ap.aliases.push_back(np.id.render());
        if (agent.supernode_output && sn_export == np.id) ap.aliases.push_back(np.id.supernode);
        np.agents.push_back(std::move(ap));
      }
      bind_ports(n);
    }
  }

  std::optional<std::size_t> link_source(const kg::Link& link, std::size_t& agent_index) const {
    if (!link.target) return std::nullopt;
    const auto producer = dag_.index_of(link.target->producer);
    agent_index = nodes_[producer].chunk->agents.index_of(link.target->agent);
    return producer;
  }

  // Same binding rules as the verifier: agent-level links first, then the
  // first agent takes the chunk slots in slot order; later agents take the
  // previous agent on port 0 and chunk slot j on port j.
  void bind_ports(std::size_t n) {
    auto& np = nodes_[n];
    std::vector<const kg::Link*> slot_links;
    for (const auto& [slot, ref] : kg::ordered_inputs(*np.chunk))
      for (const auto& l : links_)
        if (!l.consumer_agent && l.consumer == np.id && l.slot == slot) slot_links.push_back(&l);

    for (std::size_t ai = 0; ai < np.agents.size(); ++ai) {
      auto& ap = np.agents[ai];
      ap.ports.assign(ap.spec->inputs.size(), {});
      const auto from_link = [&](const kg::Link& l) {
        PortSource src;
        std::size_t agent_index = 0;
        const auto producer = link_source(l, agent_index);
        if (!producer) throw ToolRuntimeError(l.path(), "input '" + l.ref.text() + "' does not resolve");
        src.kind = PortSource::Kind::Link;
        src.node = *producer;
        src.agent = agent_index;
        return src;
      };
      for (const auto& l : links_) {
        if (l.consumer_agent != ap.name || !(l.consumer == np.id)) continue;
        auto port = ap.spec->find_input(l.slot);
        if (!port) {
          if (const auto idx = kg::input_slot_index(l.slot); idx && *idx <= static_cast<int>(ap.ports.size()))
            port = static_cast<std::size_t>(*idx - 1);
        }
        if (port) ap.ports[*port] = from_link(l);
      }
      for (std::size_t j = 0; j < ap.ports.size(); ++j) {
        if (ap.ports[j].kind != PortSource::Kind::None) continue;
        if (ai > 0 && j == 0) {
          ap.ports[0] = {PortSource::Kind::PreviousAgent, n, ai - 1};
        } else if (j < slot_links.size()) {
          ap.ports[j] = from_link(*slot_links[j]);
        }
      }
    }
  }

  void load_readers() {
    std::optional<std::size_t> cases;
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      for (const auto& ap : nodes_[n].agents) {
        if (ap.name != "reader") continue;
        const auto* csv = find_param(ap, "csv_path");
        if (csv == nullptr || !csv->is_string()) throw ToolRuntimeError(path(n, ap.name), "csv_path must be a string");
        std::vector<std::string> columns;
        if (const auto* hp = find_param(ap, "header_params"); hp != nullptr && hp->is_string())
          columns = vision::parse_header_params(hp->as_string());
        std::filesystem::path file(csv->as_string());
        if (file.is_relative()) file = bindings_.base_dir / file;
        Reader reader;
        try {
          reader.manifest = vision::load_manifest(file, columns);
        } catch (const std::exception& e) {
          throw ToolRuntimeError(path(n, ap.name), e.what());
        }
        const auto rows = reader.manifest.rows.size();
        if (cases && *cases != rows) {
          throw ToolRuntimeError(path(n, ap.name), "manifest has " + std::to_string(rows) +
                                                       " rows but another reader has " + std::to_string(*cases));
        }
        cases = rows;
        readers_[{n, ap.name}] = std::move(reader);
      }
    }
    result_.cases = cases.value_or(0);
  }

  void select_nodes() {
    selected_.assign(nodes_.size(), bindings_.mode == Mode::Think);
    if (bindings_.mode == Mode::Learn) {
      std::vector<std::size_t> stack;
      for (std::size_t n = 0; n < nodes_.size(); ++n)
        if (nodes_[n].trainable) stack.push_back(n);
      while (!stack.empty()) {
        const auto n = stack.back();
        stack.pop_back();
        if (selected_[n]) continue;
        selected_[n] = true;
        for (const auto p : dag_.predecessors(n)) stack.push_back(p);
      }
    }
    for (const auto n : dag_.order)
      if (selected_[n]) result_.executed.push_back(nodes_[n].id);
  }

  void allocate_outputs() {
    outputs_.resize(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n)
      outputs_[n].assign(nodes_[n].agents.size(), std::vector<MessageId>(result_.cases, 0));
  }

  // ---- scheduling ---------------------------------------------------------

  void run_waves() {
    std::vector<int> level(nodes_.size(), 0);
    int max_level = -1;
    for (const auto n : dag_.order) {
      if (!selected_[n]) continue;
      for (const auto p : dag_.predecessors(n)) level[n] = std::max(level[n], level[p] + 1);
      max_level = std::max(max_level, level[n]);
    }
    for (int w = 0; w <= max_level; ++w) {
      std::vector<std::size_t> wave;
      for (const auto n : dag_.order)
        if (selected_[n] && level[n] == w) wave.push_back(n);
      run_wave(w, wave);
    }
  }

  void run_wave(int w, const std::vector<std::size_t>& wave) {
    const auto count = static_cast<std::ptrdiff_t>(wave.size());
    std::vector<std::exception_ptr> errors(wave.size());
    std::vector<std::vector<std::string>> logs(wave.size());
    const auto task = [&](std::ptrdiff_t i) {
      try {
        fire_chunk(wave[i], logs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    };
    switch (options_.schedule) {
      case Schedule::Forward:
        for (std::ptrdiff_t i = 0; i < count; ++i) task(i);
        break;
      case Schedule::Reverse:
        for (std::ptrdiff_t i = count - 1; i >= 0; --i) task(i);
        break;
      case Schedule::Parallel:
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < count; ++i) task(i);
        break;
    }
    std::string names;
    for (const auto n : wave) names += (names.empty() ? "" : ", ") + nodes_[n].id.render();
    log("wave " + std::to_string(w) + ": " + names);
    for (std::size_t i = 0; i < wave.size(); ++i) {
      for (const auto& line : logs[i]) log(line);
      if (errors[i]) std::rethrow_exception(errors[i]);
    }
  }

  std::vector<int> case_order() const {
    std::vector<int> order(result_.cases);
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = static_cast<int>(c);
    if (options_.schedule == Schedule::Reverse) std::reverse(order.begin(), order.end());
    return order;
  }

  void fire_chunk(std::size_t n, std::vector<std::string>& log_lines) {
    auto& np = nodes_[n];
    std::vector<FireRecord> records;
    for (const int c : case_order()) records.push_back({np.id, c, ++tick_, 0});
    for (std::size_t ai = 0; ai < np.agents.size(); ++ai) {
      const auto& ap = np.agents[ai];
      std::optional<SegmenterState> segmenter;
      if (ap.spec->trainable) segmenter = prepare_segmenter(n, ai, log_lines);
      for (const int c : case_order()) {
        try {
          outputs_[n][ai][c] = run_agent(n, ai, c, segmenter ? &*segmenter : nullptr);
        } catch (const ToolRuntimeError&) {
          throw;
        } catch (const MissingWeights&) {
          throw;
        } catch (const std::exception& e) {
          throw ToolRuntimeError(path(n, ap.name), e.what());
        }
      }
    }
    for (auto& r : records) r.end_tick = ++tick_;
    std::lock_guard lock(result_mutex_);
    result_.fires.insert(result_.fires.end(), records.begin(), records.end());
  }

  // ---- messages -----------------------------------------------------------

  SourcePath path(std::size_t n, const std::string& agent) const {
    return {nodes_[n].id.supernode, nodes_[n].id.chunk, agent, {}};
  }

  std::vector<std::int64_t> order_key(std::size_t n, std::size_t ai, int c, int sub) const {
    return {static_cast<std::int64_t>(nodes_[n].topo_position), static_cast<std::int64_t>(ai), c, sub};
  }

  MessageId post(std::size_t n, std::size_t ai, int c, DataKind kind, Payload payload, std::vector<MessageId> parents,
                 int sub = 0, std::string suffix = {}) {
    const auto& ap = nodes_[n].agents[ai];
    BlackboardMessage m;
    m.tag = nodes_[n].id.render() + "/" + ap.name + suffix;
    if (suffix.empty()) m.aliases = ap.aliases;
    m.kind = kind;
    m.payload = std::make_shared<const Payload>(std::move(payload));
    m.producer = path(n, ap.name);
    std::sort(parents.begin(), parents.end());
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    m.parents = std::move(parents);
    m.case_index = c;
    m.order_key = order_key(n, ai, c, sub);
    return board().post(std::move(m));
  }

  Blackboard& board() { return *result_.board; }

  MessageId input_id(std::size_t n, std::size_t ai, std::size_t port, int c) const {
    const auto& src = nodes_[n].agents[ai].ports[port];
    switch (src.kind) {
      case PortSource::Kind::None: return 0;
      case PortSource::Kind::PreviousAgent:
      case PortSource::Kind::Link: return outputs_[src.node][src.agent][c];
    }
    return 0;
  }

  template <typename T>
  std::pair<std::shared_ptr<const Payload>, MessageId> input(std::size_t n, std::size_t ai, std::size_t port, int c,
                                                             bool required = true) {
    const auto& ap = nodes_[n].agents[ai];
    const auto id = input_id(n, ai, port, c);
    if (id == 0) {
      if (!required) return {nullptr, 0};
      throw ToolRuntimeError(path(n, ap.name), "input '" + ap.spec->inputs[port].name + "' has no posted message");
    }
    auto msg = board().get(id);
    if (!std::holds_alternative<T>(*msg.payload)) {
      throw ToolRuntimeError(path(n, ap.name), "input '" + ap.spec->inputs[port].name + "' received a " +
                                                   std::string(registry::to_string(msg.kind)) + " message");
    }
    return {msg.payload, id};
  }

  // ---- parameters ---------------------------------------------------------

  double number(std::size_t n, std::size_t ai, std::string_view name, std::optional<double> fallback) const {
    const auto& ap = nodes_[n].agents[ai];
    const auto* v = find_param(ap, name);
    if (v == nullptr || v->kind() == kg::ParamValue::Kind::Null) {
      if (fallback) return *fallback;
      throw ToolRuntimeError(path(n, ap.name), "missing parameter '" + std::string(name) + "'");
    }
    if (!v->is_number())
      throw ToolRuntimeError(path(n, ap.name), "parameter '" + std::string(name) + "' must be a number, found " + v->display());
    return v->as_number();
  }

  int integer(std::size_t n, std::size_t ai, std::string_view name, std::optional<int> fallback) const {
    const double v = number(n, ai, name, fallback ? std::optional<double>(*fallback) : std::nullopt);
    if (v != static_cast<double>(static_cast<long long>(v)))
      throw ToolRuntimeError(path(n, nodes_[n].agents[ai].name), "parameter '" + std::string(name) + "' must be an integer");
    return static_cast<int>(v);
  }

  std::optional<int> channel(std::size_t n, std::size_t ai) const {
    const auto* v = find_param(nodes_[n].agents[ai], "channel");
    if (v == nullptr || v->kind() == kg::ParamValue::Kind::Null) return std::nullopt;
    return integer(n, ai, "channel", std::nullopt);
  }

  bool boolean(std::size_t n, std::size_t ai, std::string_view name, bool fallback) const {
    const auto& ap = nodes_[n].agents[ai];
    const auto* v = find_param(ap, name);
    if (v == nullptr || v->kind() == kg::ParamValue::Kind::Null) return fallback;
    if (v->kind() != kg::ParamValue::Kind::Boolean)
      throw ToolRuntimeError(path(n, ap.name), "parameter '" + std::string(name) + "' must be true or false");
    return v->as_bool();
  }

  std::optional<std::string> text(std::size_t n, std::size_t ai, std::string_view name) const {
    const auto* v = find_param(nodes_[n].agents[ai], name);
    if (v == nullptr || !v->is_string()) return std::nullopt;
    return v->as_string();
  }

  // ---- provenance ---------------------------------------------------------

  /// Reader image message among the ancestors of `id` (smallest order key).
  std::optional<MessageId> reader_ancestor(MessageId id) {
    std::optional<BlackboardMessage> best;
    std::set<MessageId> seen;
    std::vector<MessageId> stack{id};
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) continue;
      auto m = board().get(cur);
      bool is_reader;
      {
        std::lock_guard lock(refs_mutex_);
        is_reader = references_.contains(cur);
      }
      if (is_reader && (!best || m.order_key < best->order_key)) best = m;
      for (const auto p : m.parents) stack.push_back(p);
    }
    if (!best) return std::nullopt;
    return best->id;
  }

  /// Reference mask message for `supernode`: the column named after it, else
  /// `mask`, else the only column.
  std::optional<MessageId> reference_for(MessageId reader_image, const std::string& supernode) {
    std::lock_guard lock(refs_mutex_);
    const auto it = references_.find(reader_image);
    if (it == references_.end() || it->second.columns.empty()) return std::nullopt;
    const auto& cols = it->second.columns;
    const auto pick = [&](const std::string& name) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i] == name) return i;
      return std::nullopt;
    };
    auto idx = pick(supernode);
    if (!idx) idx = pick("mask");
    if (!idx && cols.size() == 1) idx = 0;
    if (!idx) return std::nullopt;
    const auto id = it->second.ids[*idx];
    if (id == 0) return std::nullopt;
    return id;
  }

  // ---- agents -------------------------------------------------------------

  MessageId run_agent(std::size_t n, std::size_t ai, int c, const SegmenterState* segmenter) {
    const auto& name = nodes_[n].agents[ai].name;
    if (name == "reader") return run_reader(n, ai, c);
    if (name == "resize") {
      auto [img, id] = input<ImageBuffer>(n, ai, 0, c);
      const auto shape_text = text(n, ai, "target_shape");
      const auto shape = shape_text ? kg::parse_stringified_list(*shape_text) : std::nullopt;
      if (!shape || shape->size() != 2)
        throw ToolRuntimeError(path(n, name), "target_shape must be a stringified list like '[512, 512]'");
      vision::ResizeOptions opt;
      opt.rows = static_cast<int>((*shape)[0]);
      opt.cols = static_cast<int>((*shape)[1]);
      opt.order = integer(n, ai, "order", 1);
      opt.preserve_range = boolean(n, ai, "preserve_range", false);
      return post(n, ai, c, DataKind::Image, vision::resize(std::get<ImageBuffer>(*img), opt), {id});
    }
    if (name == "expand_channels") {
      auto [img, id] = input<ImageBuffer>(n, ai, 0, c);
      return post(n, ai, c, DataKind::Image,
                  vision::expand_channels(std::get<ImageBuffer>(*img), integer(n, ai, "number_of_channels", std::nullopt)),
                  {id});
    }
    if (name == "clahe") {
      auto [img, id] = input<ImageBuffer>(n, ai, 0, c);
      return post(n, ai, c, DataKind::Image,
                  vision::clahe(std::get<ImageBuffer>(*img), integer(n, ai, "nbins", std::nullopt),
                                number(n, ai, "clip_limit", std::nullopt), channel(n, ai)),
                  {id});
    }
    if (name == "histeq") {
      auto [img, id] = input<ImageBuffer>(n, ai, 0, c);
      return post(n, ai, c, DataKind::Image,
                  vision::histeq(std::get<ImageBuffer>(*img), integer(n, ai, "nbins", std::nullopt), channel(n, ai)),
                  {id});
    }
    if (name == "z_score") {
      auto [img, id] = input<ImageBuffer>(n, ai, 0, c);
      return post(n, ai, c, DataKind::Image, vision::z_score(std::get<ImageBuffer>(*img), channel(n, ai)), {id});
    }
    if (name == "tf2_segmentation") return run_segmenter_infer(n, ai, c, *segmenter);
    if (name == "save_image") return run_save(n, ai, c);
    if (name == "decision_tree" || name == "candidate_selector") {
      // Registered for planning; executes as a pass-through of its mask.
      auto [mask, id] = input<MaskBuffer>(n, ai, 0, c);
      return post(n, ai, c, DataKind::Mask, std::get<MaskBuffer>(*mask), {id});
    }
    throw ToolRuntimeError(path(n, name), "no implementation for agent '" + name + "'");
  }

  MessageId run_reader(std::size_t n, std::size_t ai, int c) {
    const auto& reader = readers_.at({n, nodes_[n].agents[ai].name});
    const auto& row = reader.manifest.rows[static_cast<std::size_t>(c)];
    auto image = vision::from_gray(vision::read_gray(row.image));
    const auto image_id = post(n, ai, c, DataKind::Image, std::move(image), {});
    ReferenceSet refs;
    refs.columns = reader.manifest.mask_columns;
    for (std::size_t k = 0; k < row.masks.size(); ++k) {
      MessageId id = 0;
      if (row.masks[k]) {
        auto mask = vision::mask_from_gray(vision::read_gray(*row.masks[k]));
        id = post(n, ai, c, DataKind::Mask, std::move(mask), {image_id}, static_cast<int>(k + 1),
                  "/reference/" + reader.manifest.mask_columns[k]);
      }
      refs.ids.push_back(id);
    }
    std::lock_guard lock(refs_mutex_);
    references_[image_id] = std::move(refs);
    return image_id;
  }

  std::filesystem::path weights_location(std::size_t n, std::size_t ai) const {
    return weights_file(bindings_.weights_dir, nodes_[n].id.supernode, text(n, ai, "weights_path"));
  }

  SegmenterState prepare_segmenter(std::size_t n, std::size_t ai, std::vector<std::string>& log_lines) {
    const auto& ap = nodes_[n].agents[ai];
    const auto file = weights_location(n, ai);
    const auto agent_path = path(n, ap.name);
    SegmenterState state;
    if (bindings_.mode == Mode::Think) {
      if (!std::filesystem::exists(file)) {
        const auto url = text(n, ai, "weights_url");
        throw MissingWeights(agent_path.render(), file,
                             url ? "weights_url is not fetched; run learn to create the local weights" : "");
      }
      state.weights = load_weights(file, agent_path.render());
    } else {
      std::vector<vision::TrainingCase> cases;
      std::vector<MessageId> used;
      for (int c = 0; c < static_cast<int>(result_.cases); ++c) {
        auto [pre, pre_id] = input<ImageBuffer>(n, ai, 1, c);
        const auto& image = std::get<ImageBuffer>(*pre);
        const auto reader_id = reader_ancestor(pre_id);
        const auto ref_id = reader_id ? reference_for(*reader_id, nodes_[n].id.supernode) : std::nullopt;
        if (!ref_id) continue;
        const auto ref = board().get(*ref_id);
        vision::TrainingCase tc;
        tc.levels = vision::normalized_levels(image, 0);
        tc.mask = vision::resize_mask_nearest(std::get<MaskBuffer>(*ref.payload), image.width, image.height);
        cases.push_back(std::move(tc));
        used.push_back(pre_id);
        used.push_back(*ref_id);
      }
      if (cases.empty()) throw EmptyTrainingSet();
      const auto model = vision::threshold_segmentation_learn(cases);
      state.weights.threshold = model.threshold;
      state.weights.train_cases = cases.size();
      state.weights.train_mean_dice = model.score;
      try {
        save_weights(file, state.weights);
      } catch (const std::exception& e) {
        throw ToolRuntimeError(agent_path, e.what());
      }
      {
        std::lock_guard lock(result_mutex_);
        result_.trained.push_back({agent_path, file, state.weights});
        result_.artifacts.push_back(file);
      }
      std::ostringstream line;
      line << "trained " << agent_path.render() << ": threshold " << model.threshold << " on " << cases.size()
           << " cases, mean dice " << model.score;
      log_lines.push_back(line.str());
      state.weights_message =
          post(n, ai, -1, DataKind::WeightsFile, relative(file), std::move(used), 0, "/weights");
      return state;
    }
    state.weights_message = post(n, ai, -1, DataKind::WeightsFile, relative(file), {}, 0, "/weights");
    return state;
  }

  MessageId run_segmenter_infer(std::size_t n, std::size_t ai, int c, const SegmenterState& state) {
    auto [orig, orig_id] = input<ImageBuffer>(n, ai, 0, c);
    auto [pre, pre_id] = input<ImageBuffer>(n, ai, 1, c);
    const auto& image = std::get<ImageBuffer>(*pre);
    const auto& original = std::get<ImageBuffer>(*orig);
    const auto levels = vision::normalized_levels(image, 0);
    auto mask = vision::threshold_segmentation_infer(levels, image.width, image.height, state.weights.threshold,
                                                     number(n, ai, "prediction_threshold", std::nullopt));
    mask = vision::resize_mask_nearest(mask, original.width, original.height);
    return post(n, ai, c, DataKind::Mask, std::move(mask), {orig_id, pre_id, state.weights_message});
  }

  MessageId run_save(std::size_t n, std::size_t ai, int c) {
    auto [img, img_id] = input<ImageBuffer>(n, ai, 0, c);
    const auto& image = std::get<ImageBuffer>(*img);
    std::vector<MessageId> parents{img_id};
    std::optional<MaskBuffer> mask;
    if (nodes_[n].agents[ai].ports.size() > 1) {
      auto [m, mask_id] = input<MaskBuffer>(n, ai, 1, c, false);
      if (m) {
        mask = vision::resize_mask_nearest(std::get<MaskBuffer>(*m), image.width, image.height);
        parents.push_back(mask_id);
      }
    }
    const auto name = text(n, ai, "output_filename");
    if (!name || name->empty()) throw ToolRuntimeError(path(n, "save_image"), "output_filename must be a string");
    const auto overlay = vision::render_overlay(image, mask ? &*mask : nullptr, number(n, ai, "mask_alpha", 0.5));
    const auto file = bindings_.out_dir / (*name + "_" + std::to_string(c) + ".png");
    vision::write_png(file, overlay);
    {
      std::lock_guard lock(result_mutex_);
      result_.artifacts.push_back(file);
    }
    return post(n, ai, c, DataKind::FilePath, relative(file), std::move(parents));
  }

  std::string relative(const std::filesystem::path& file) const {
    return std::filesystem::relative(file, bindings_.out_dir).generic_string();
  }

  // ---- think outputs ------------------------------------------------------

  void write_masks() {
    for (const auto& [sn, supernode] : graph_.supernodes) {
      const auto node_id = kg::supernode_export_chunk(graph_, sn);
      if (!node_id) continue;
      const auto n = dag_.index_of(*node_id);
      std::optional<std::size_t> ai;
      for (std::size_t i = 0; i < nodes_[n].agents.size(); ++i)
        if (nodes_[n].agents[i].agent->supernode_output) ai = i;
      if (!ai || nodes_[n].agents[*ai].spec->output_kind() != DataKind::Mask) continue;
      for (int c = 0; c < static_cast<int>(result_.cases); ++c) {
        const auto id = outputs_[n][*ai][c];
        if (id == 0) continue;
        const auto& mask = std::get<MaskBuffer>(*board().get(id).payload);
        CaseMask cm;
        cm.supernode = sn;
        cm.case_index = c;
        cm.file = bindings_.out_dir / "masks" / (sn + "_" + std::to_string(c) + ".png");
        vision::write_png(cm.file, vision::mask_to_gray(mask));
        result_.artifacts.push_back(cm.file);
        if (const auto reader = reader_ancestor(id)) {
          if (const auto ref = reference_for(*reader, sn)) {
            const auto& ref_mask = std::get<MaskBuffer>(*board().get(*ref).payload);
            cm.dice = vision::dice(mask, vision::resize_mask_nearest(ref_mask, mask.width, mask.height));
          }
        }
        std::ostringstream line;
        line << "mask " << sn << " case " << c;
        if (cm.dice) line << ": dice " << *cm.dice;
        log(line.str());
        result_.masks.push_back(std::move(cm));
      }
    }
  }

  void finish() {
    result_.blackboard_file = bindings_.out_dir / "blackboard.json";
    log("saving blackboard to blackboard.json");
    std::error_code ec;
    std::filesystem::create_directories(bindings_.out_dir, ec);
    std::ofstream out(result_.blackboard_file, std::ios::binary | std::ios::trunc);
    out << board().dump_json();
    if (!out) throw std::runtime_error("cannot write '" + result_.blackboard_file.string() + "'");
    result_.artifacts.push_back(result_.blackboard_file);
    std::sort(result_.artifacts.begin(), result_.artifacts.end());
    const auto position = [&](const TrainedAgent& t) {
      return nodes_[dag_.index_of(kg::NodeId{t.agent.supernode, *t.agent.chunk})].topo_position;
    };
    std::stable_sort(result_.trained.begin(), result_.trained.end(),
                     [&](const TrainedAgent& a, const TrainedAgent& b) { return position(a) < position(b); });
    std::sort(result_.fires.begin(), result_.fires.end(),
              [](const FireRecord& a, const FireRecord& b) { return a.start_tick < b.start_tick; });
  }

  void log(const std::string& line) const {
    if (options_.log) options_.log(line);
  }

  struct ReferenceSet {
    std::vector<std::string> columns;
    std::vector<MessageId> ids;
  };

  const kg::KnowledgeGraph& graph_;
  const registry::ToolRegistry& registry_;
  const RunBindings& bindings_;
  const ExecuteOptions& options_;
  ExecutionResult& result_;

  kg::Dag dag_;
  std::vector<kg::Link> links_;
  std::vector<NodePlan> nodes_;
  std::vector<bool> selected_;
  std::map<std::pair<std::size_t, std::string>, Reader> readers_;
  /// [node][agent][case] -> message id (0 = not posted).
  std::vector<std::vector<std::vector<MessageId>>> outputs_;
  std::map<MessageId, ReferenceSet> references_;
  std::mutex refs_mutex_;
  std::mutex result_mutex_;
  std::atomic<std::uint64_t> tick_{0};
};

}  // namespace

std::optional<double> ExecutionResult::mean_dice() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& m : masks)
    if (m.dice) sum += *m.dice, ++n;
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> ExecutionResult::mean_dice(const std::string& supernode) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& m : masks)
    if (m.supernode == supernode && m.dice) sum += *m.dice, ++n;
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

ExecutionResult execute(const kg::KnowledgeGraph& graph, const registry::ToolRegistry& registry,
                        const RunBindings& bindings, const ExecuteOptions& options) {
  auto report = verify::verify(graph, registry);
  if (!report.passed) throw InvalidPlan(std::move(report));
  const auto bound = bind_placeholders(graph, bindings);
  ExecutionResult result;
  result.board = std::make_unique<Blackboard>();
  Engine(bound, registry, bindings, options, result).run();
  return result;
}

ExecutionResult sm_learn(const kg::KnowledgeGraph& graph, const registry::ToolRegistry& registry, RunBindings bindings,
                         const ExecuteOptions& options) {
  bindings.mode = Mode::Learn;
  return execute(graph, registry, bindings, options);
}

ExecutionResult sm_think(const kg::KnowledgeGraph& graph, const registry::ToolRegistry& registry, RunBindings bindings,
                         const ExecuteOptions& options) {
  bindings.mode = Mode::Think;
  return execute(graph, registry, bindings, options);
}

}  // namespace cvplan::engine
