#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "cvplan/engine/bindings.hpp"
#include "cvplan/engine/executor.hpp"
#include "cvplan/kg/dag.hpp"
#include "cvplan/kg/parse.hpp"
#include "cvplan/kg/serialize.hpp"
#include "cvplan/verify/verifier.hpp"
#include "cvplan/vision/kernels.hpp"
#include "cvplan/vision/tools.hpp"
#include "synthetic.hpp"

using namespace cvplan;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kGraphs = 200;

template <class T>
const T& pick(std::mt19937& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

bool chance(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

json random_tool(std::mt19937& rng, std::string& name) {
  name = pick<std::string>(rng, {"resize", "expand_channels", "clahe", "histeq", "z_score"});
  if (name == "resize") {
    const int s = pick<int>(rng, {8, 12, 16, 20});
    return {{"target_shape", "[" + std::to_string(s) + ", " + std::to_string(pick<int>(rng, {8, 16})) + "]"},
            {"order", pick<int>(rng, {0, 1, 3})},
            {"preserve_range", chance(rng, 0.5)},
            {"numpy_only", true}};
  }
  if (name == "expand_channels") return {{"number_of_channels", pick<int>(rng, {1, 2, 3})}, {"numpy_only", true}};
  if (name == "clahe")
    return {{"nbins", pick<int>(rng, {16, 64, 256})}, {"clip_limit", pick<double>(rng, {0.01, 0.03, 0.5})},
            {"channel", 0}, {"numpy_only", true}};
  if (name == "histeq") return {{"channel", 0}, {"nbins", pick<int>(rng, {8, 256})}, {"numpy_only", true}};
  json z = {{"numpy_only", true}};
  if (chance(rng, 0.5)) z["channel"] = 0;
  return z;
}

/// A reader plus 1-3 segmentation targets with random preprocessing; some
/// targets get a save chunk. With probability `fault_rate` one structural
/// fault is injected.
json random_plan(std::mt19937& rng, double fault_rate) {
  json chunks;
  chunks["img"]["load"]["agents"]["reader"] = {
      {"csv_path", "__input_images__"}, {"header_params", "__header_params__"}, {"supernode_output", true}};
  const int targets = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<std::string> names;
  for (int t = 0; t < targets; ++t) {
    const auto sn = "target_" + std::to_string(t);
    names.push_back(sn);
    json agents = json::object();
    const int steps = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int k = 0; k < steps; ++k) {
      std::string tool;
      auto params = random_tool(rng, tool);
      if (!agents.contains(tool)) agents[tool] = params;
    }
    chunks[sn]["prep"] = {{"input", "img"}, {"agents", agents}};
    chunks[sn]["net"] = {{"input_1", "img"},
                         {"input_2", "from prep"},
                         {"agents", {{"tf2_segmentation", {{"prediction_threshold", 0.5}, {"supernode_output", true}}}}}};
    if (chance(rng, 0.5))
      chunks[sn]["save"] = {{"input_1", "img"},
                            {"input_2", sn},
                            {"agents", {{"save_image", {{"mask_alpha", 0.5}, {"output_filename", "out_" + sn}}}}}};
  }
  if (chance(rng, fault_rate)) {
    const auto& sn = pick(rng, names);
    switch (std::uniform_int_distribution<int>(0, 6)(rng)) {
      case 0: chunks[sn]["net"]["agents"]["chunk_output"] = true; break;
      case 1: chunks[sn]["prep"]["input"] = "nowhere"; break;
      case 2: chunks[sn]["prep"]["agents"]["sharpen_more"] = {{"numpy_only", true}}; break;
      case 3: chunks[sn]["prep"]["input"] = "from net"; break;
      case 4: chunks[sn]["net"]["agents"]["tf2_segmentation"].erase("prediction_threshold"); break;
      case 5: chunks[sn]["net"]["input_2"] = "from save_missing"; break;
      default: chunks.erase("img"); break;
    }
  }
  return {{"chunks", chunks}};
}

}  // namespace

TEST_CASE("property: yaml and json forms round trip") {
  std::mt19937 rng(11);
  for (int i = 0; i < kGraphs; ++i) {
    const auto g = kg::parse_json_plan(random_plan(rng, 0.3).dump(2));
    CHECK(kg::parse_yaml_plan(kg::to_yaml(g)) == g);
    CHECK(kg::parse_json_plan(kg::to_json(g)) == g);
    CHECK(kg::to_yaml(kg::parse_yaml_plan(kg::to_yaml(g))) == kg::to_yaml(g));
  }
}

TEST_CASE("property: verifier is deterministic and passed iff no errors") {
  std::mt19937 rng(12);
  for (int i = 0; i < kGraphs; ++i) {
    const auto g = kg::parse_json_plan(random_plan(rng, 0.7).dump());
    const auto a = verify::verify(g, registry::builtin_registry());
    CHECK(a == verify::verify(g, registry::builtin_registry()));
    CHECK(a.passed == (a.error_count() == 0));
    for (const auto& d : a.diagnostics) CHECK(!d.path.supernode.empty());
  }
}

TEST_CASE("property: every passing graph executes every chunk") {
  const auto d = testing::make_synthetic_dataset(testing::scratch_dir("soundness"), {2, 1, 16});
  const auto bindings = engine::load_bindings(d.bindings);
  std::mt19937 rng(13);
  int executed = 0, rejected = 0;
  while (executed < kGraphs) {
    const auto g = kg::parse_json_plan(random_plan(rng, 0.25).dump());
    if (!verify::verify(g, registry::builtin_registry()).passed) {
      ++rejected;
      continue;
    }
    const auto out = d.root / ("g" + std::to_string(executed));
    CHECK_NOTHROW(kg::build_dag(g));
    try {
      engine::sm_learn(g, registry::builtin_registry(), bindings.for_mode(engine::Mode::Learn, out / "learn", out / "w"));
      const auto r =
          engine::sm_think(g, registry::builtin_registry(), bindings.for_mode(engine::Mode::Think, out / "think", out / "w"));
      std::size_t chunks = 0;
      for (const auto& [sn, s] : g.supernodes) chunks += s.chunks.size();
      CHECK(r.executed.size() == chunks);
    } catch (const std::exception& e) {
      FAIL_CHECK("graph " << executed << " passed verification but failed: " << e.what() << "\n" << kg::to_yaml(g));
    }
    fs::remove_all(out);
    ++executed;
  }
  CHECK(rejected > 0);
}

TEST_CASE("property: blackboard is append-only and ids strictly increase") {
  std::mt19937 rng(14);
  for (int round = 0; round < 50; ++round) {
    engine::Blackboard board;
    std::vector<engine::BlackboardMessage> seen;
    const int n = std::uniform_int_distribution<int>(1, 40)(rng);
    for (int k = 0; k < n; ++k) {
      engine::BlackboardMessage m;
      m.tag = "s/c/a" + std::to_string(std::uniform_int_distribution<int>(0, 4)(rng));
      m.kind = registry::DataKind::Scalar;
      m.payload = std::make_shared<const engine::Payload>(static_cast<double>(k));
      if (!seen.empty() && chance(rng, 0.7))
        m.parents.push_back(seen[std::uniform_int_distribution<std::size_t>(0, seen.size() - 1)(rng)].id);
      const auto id = board.post(m);
      CHECK(id == seen.size() + 1);
      CHECK(board.size() == seen.size() + 1);
      seen.push_back(board.get(id));
      // Earlier messages are untouched by later posts.
      for (const auto& old : seen) {
        const auto now = board.get(old.id);
        CHECK(now.tag == old.tag);
        CHECK(now.parents == old.parents);
        CHECK(now.payload == old.payload);
      }
    }
    // A chain is closed under parents and ordered by id.
    const auto chain = board.query_chain(seen.back().tag);
    std::set<engine::MessageId> ids;
    for (const auto& m : chain) ids.insert(m.id);
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (i > 0) CHECK(chain[i - 1].id < chain[i].id);
      for (auto p : chain[i].parents) CHECK(ids.count(p) == 1);
    }
  }
}

TEST_CASE("property: histeq and clahe transfer functions are non-decreasing") {
  std::mt19937 rng(15);
  for (int round = 0; round < 100; ++round) {
    const int w = std::uniform_int_distribution<int>(2, 40)(rng), h = std::uniform_int_distribution<int>(2, 40)(rng);
    const int nbins = pick<int>(rng, {2, 16, 256});
    const bool integral = chance(rng, 0.5);
    std::vector<double> plane(static_cast<std::size_t>(w) * h);
    std::uniform_real_distribution<double> u(-3.0, 300.0);
    for (auto& v : plane) v = integral ? std::floor(std::clamp(u(rng), 0.0, 255.0)) : u(rng);

    // Global equalization preserves pixel order everywhere.
    const auto eq = vision::parallel::equalize(plane, nbins);
    std::vector<std::size_t> idx(plane.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return plane[a] < plane[b]; });
    for (std::size_t k = 1; k < idx.size(); ++k) CHECK(eq[idx[k - 1]] <= eq[idx[k]]);

    // Each tile mapping of clahe is non-decreasing.
    const double clip = pick<double>(rng, {0.01, 0.03, 0.5, 1.0});
    const int ty = std::uniform_int_distribution<int>(1, std::min(h, 8))(rng);
    const int tx = std::uniform_int_distribution<int>(1, std::min(w, 8))(rng);
    for (const auto& map : vision::parallel::clahe_tile_maps(plane, w, h, nbins, clip, ty, tx))
      for (std::size_t k = 1; k < map.size(); ++k) CHECK(map[k - 1] <= map[k]);

    // With one tile the blended output is a single monotone map.
    const auto one = vision::parallel::clahe(plane, w, h, nbins, clip, 1, 1);
    for (std::size_t k = 1; k < idx.size(); ++k) CHECK(one[idx[k - 1]] <= one[idx[k]]);
  }
}
