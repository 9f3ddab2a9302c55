#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cvplan/cli/cli.hpp"
#include "cvplan/cli/run_log.hpp"
#include "cvplan/kg/parse.hpp"
#include "fixtures.hpp"
#include "synthetic.hpp"

using cvplan::testing::fixture;
using cvplan::testing::fixture_text;
using cvplan::testing::read_file;
using cvplan::testing::scratch_dir;

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cvplan::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

}  // namespace

TEST_CASE("log line format") {
  CHECK(cvplan::cli::format_log_line("INFO", "gpu_num 0", true, 3) == "INFO[0003] gpu_num 0");
  CHECK(cvplan::cli::format_log_line("WARN", "x", false, 0) == "WARN x");
}

TEST_CASE("verify: 0 valid, 1 invalid, 2 unparsable") {
  const auto ok = cli({"verify", fixture("ribs_plan.yaml").string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("Checks passed: True") != std::string::npos);

  const auto bad = cli({"verify", fixture("faults/attempt3_combined.yaml").string()});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("Checks passed: False") != std::string::npos);

  const auto dir = scratch_dir("cli_verify");
  write(dir / "broken.json", "{\"chunks\": ");
  CHECK(cli({"verify", (dir / "broken.json").string()}).code == 2);
  CHECK(cli({"verify", (dir / "absent.yaml").string()}).code == 2);
}

TEST_CASE("convert: json to yaml keeps the graph") {
  const auto dir = scratch_dir("cli_convert");
  const auto r = cli({"convert", fixture("trachea_plan.json").string(), "-o", (dir / "t.yaml").string()});
  CHECK(r.code == 0);
  CHECK(cvplan::kg::parse_yaml_plan(read_file(dir / "t.yaml")) ==
        cvplan::kg::parse_json_plan(fixture_text("trachea_plan.json")));
}

TEST_CASE("plan: scripted success, exhaustion, unreachable endpoint, bad config") {
  const auto d = cvplan::testing::make_synthetic_dataset(scratch_dir("cli_plan"), {1, 1});
  const auto out = d.root / "out";
  const auto ok = cli({"--out-dir", out.string(), "--backend", "scripted:" + d.completions.string(), "plan",
                       "segment", "synthetic", "targets"});
  CHECK(ok.code == 0);
  CHECK(fs::exists(out / "example.yaml"));
  CHECK(fs::exists(out / "example.trace.txt"));
  CHECK(fs::exists(out / "example.trace.json"));
  CHECK(ok.out.find("Attempt 1: PASSED") != std::string::npos);
  CHECK(ok.out.find("Final YAML was saved to") != std::string::npos);

  const auto trace = cli({"trace", (out / "example.trace.json").string()});
  CHECK(trace.code == 0);
  CHECK(trace.out == read_file(out / "example.trace.txt"));

  write(d.root / "bad.json", R"(["no plan", "still no plan"])");
  const auto ex = cli({"--out-dir", (d.root / "ex").string(), "--max-retries", "2", "--backend",
                       "scripted:" + (d.root / "bad.json").string(), "plan", "x"});
  CHECK(ex.code == 2);
  CHECK(fs::exists(d.root / "ex" / "example.trace.txt"));

  write(d.root / "remote.yaml", "base_url: http://127.0.0.1:9/v1\nmodel: m\ntimeout_seconds: 2\n");
  const auto down = cli({"--out-dir", (d.root / "down").string(), "--config", (d.root / "remote.yaml").string(), "plan", "x"});
  CHECK(down.code == 3);

  write(d.root / "broken.yaml", "model: m\n");
  CHECK(cli({"--config", (d.root / "broken.yaml").string(), "plan", "x"}).code == 3);
  CHECK(cli({"plan", "x"}).code == 3);
}

TEST_CASE("think before learn fails with a hint; learn then think succeeds") {
  const auto d = cvplan::testing::make_synthetic_dataset(scratch_dir("cli_order"), {3, 2});
  const auto out = (d.root / "out").string();
  const auto early = cli({"--out-dir", out, "--bindings", d.bindings.string(), "think", d.plan_json.string()});
  CHECK(early.code == 2);
  CHECK(early.err.find("run learn first") != std::string::npos);

  CHECK(cli({"--out-dir", out, "--bindings", d.bindings.string(), "learn", d.plan_json.string()}).code == 0);
  const auto think = cli({"--out-dir", out, "--no-timestamps", "--bindings", d.bindings.string(), "think",
                          d.plan_json.string()});
  CHECK(think.code == 0);
  const auto log = read_file(d.root / "out" / "think_output.txt");
  CHECK(log.rfind("INFO gpu_num", 0) == 0);
  CHECK(log.find("INFO mean dice: 1.0000") != std::string::npos);
}

TEST_CASE("run with a plan file, emit-shell, usage errors") {
  const auto d = cvplan::testing::make_synthetic_dataset(scratch_dir("cli_run"), {3, 2});
  const auto r = cli({"--out-dir", (d.root / "out").string(), "--bindings", d.bindings.string(), "run",
                      d.plan_json.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(d.root / "out" / "learn_output.txt"));
  CHECK(fs::exists(d.root / "out" / "think" / "blackboard.json"));

  const auto sh = cli({"--emit-shell", "--bindings", d.bindings.string(), "run", d.plan_json.string()});
  CHECK(sh.code == 0);
  CHECK(sh.out.rfind("#!/bin/sh\n", 0) == 0);
  CHECK(sh.out.find("export gpu_num=") != std::string::npos);

  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"verify"}).code == 2);
  CHECK(cli({"--schedule", "sideways", "verify", fixture("ribs_plan.yaml").string()}).code == 2);
}
