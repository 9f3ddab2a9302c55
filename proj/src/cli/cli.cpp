#include "cvplan/cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "cvplan/cli/run_log.hpp"
#include "cvplan/engine/bindings.hpp"
#include "cvplan/engine/executor.hpp"
#include "cvplan/kg/errors.hpp"
#include "cvplan/kg/parse.hpp"
#include "cvplan/kg/serialize.hpp"
#include "cvplan/planner/backend.hpp"
#include "cvplan/planner/refine_loop.hpp"
#include "cvplan/planner/session.hpp"
#include "cvplan/registry/tool_registry.hpp"
#include "cvplan/verify/verifier.hpp"

namespace cvplan::cli {

namespace fs = std::filesystem;

namespace {

/// A file the command needs (registry, bindings, backend config) is unusable.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The session ran out of retries; the trace has already been written.
class SessionExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string registry;
  std::string bindings;
  std::string out_dir = "out";
  std::string weights_dir;
  std::string output;
  std::string backend = "remote";
  std::string schedule = "forward";
  int max_retries = 5;
  bool no_timestamps = false;
  bool emit_shell = false;
  std::vector<std::string> request;
  std::string input;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

class Runner {
 public:
  Runner(Options opts, std::ostream& out, std::ostream& err) : o_(std::move(opts)), out_(out), err_(err) {}

  int guarded(const std::function<int()>& body) {
    try {
      return body();
    } catch (const engine::InvalidPlan& e) {
      err_ << e.what();
      return kVerifyFailed;
    } catch (const planner::BackendUnreachable& e) {
      err_ << "error: backend unreachable: " << e.what() << '\n';
      return kTransportOrConfig;
    } catch (const planner::BackendConfigError& e) {
      err_ << "error: " << e.what() << '\n';
      return kTransportOrConfig;
    } catch (const ConfigError& e) {
      err_ << "error: " << e.what() << '\n';
      return kTransportOrConfig;
    } catch (const SessionExhausted& e) {
      err_ << "error: " << e.what() << '\n';
      return kExecutionFailed;
    } catch (const kg::SyntaxError& e) {
      err_ << "error: syntax error at line " << e.line() << ", column " << e.column() << ": " << e.what() << '\n';
      return kExecutionFailed;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kExecutionFailed;
    }
  }

  int plan() {
    const auto request = join(o_.request);
    if (o_.emit_shell) return emit_shell({plan_command(request)});
    plan_request(request);
    return kOk;
  }

  int verify_cmd() {
    const auto graph = kg::parse_plan(read_text(o_.input));
    const auto report = verify::verify(graph, registry());
    out_ << verify::render_report(report);
    return report.passed ? kOk : kVerifyFailed;
  }

  int convert() {
    const auto yaml = kg::to_yaml(kg::parse_plan(read_text(o_.input)));
    if (o_.output.empty()) {
      out_ << yaml;
    } else {
      write_text(o_.output, yaml);
      out_ << "wrote " << o_.output << '\n';
    }
    return kOk;
  }

  int learn() {
    if (o_.emit_shell) return emit_shell({stage_command("learn", o_.input)});
    run_stage(engine::Mode::Learn, load_plan(o_.input));
    return kOk;
  }

  int think() {
    if (o_.emit_shell) return emit_shell({stage_command("think", o_.input)});
    run_stage(engine::Mode::Think, load_plan(o_.input));
    return kOk;
  }

  int run() {
    const bool is_file = is_plan_file(o_.input);
    const auto plan_path = is_file ? fs::path(o_.input) : default_yaml_path();
    if (o_.emit_shell) {
      std::vector<std::string> lines;
      if (!is_file) lines.push_back(plan_command(o_.input));
      lines.push_back(stage_command("learn", plan_path.string()));
      lines.push_back(stage_command("think", plan_path.string()));
      return emit_shell(lines);
    }
    kg::KnowledgeGraph graph;
    if (is_file) {
      graph = load_plan(plan_path);
    } else {
      graph = kg::parse_yaml_plan(plan_request(o_.input));
    }
    run_stage(engine::Mode::Learn, graph);
    run_stage(engine::Mode::Think, graph);
    return kOk;
  }

  int trace() {
    out_ << planner::session_trace(planner::session_from_json(read_text(o_.input)));
    return kOk;
  }

 private:
  const registry::ToolRegistry& registry() {
    if (o_.registry.empty()) return registry::builtin_registry();
    if (!custom_registry_) {
      try {
        custom_registry_ = registry::load_registry(read_text(o_.registry));
      } catch (const std::exception& e) {
        throw ConfigError("registry '" + o_.registry + "': " + e.what());
      }
    }
    return *custom_registry_;
  }

  fs::path out_dir() const { return fs::path(o_.out_dir); }
  fs::path default_yaml_path() const { return o_.output.empty() ? out_dir() / "example.yaml" : fs::path(o_.output); }

  static bool is_plan_file(const std::string& input) {
    const auto ext = fs::path(input).extension().string();
    return (ext == ".yaml" || ext == ".yml" || ext == ".json") && fs::is_regular_file(input);
  }

  kg::KnowledgeGraph load_plan(const fs::path& path) { return kg::parse_plan(read_text(path)); }

  std::unique_ptr<planner::GeneratorBackend> make_backend() {
    const std::string scripted = "scripted:";
    if (o_.backend.rfind(scripted, 0) == 0) {
      return std::make_unique<planner::ScriptedBackend>(
          planner::ScriptedBackend::from_file(o_.backend.substr(scripted.size())));
    }
    if (o_.backend != "remote")
      throw ConfigError("--backend must be 'remote' or 'scripted:<path>', got '" + o_.backend + "'");
    if (o_.config.empty()) throw ConfigError("the remote backend needs --config <backend config file>");
    return std::make_unique<planner::RemoteBackend>(planner::load_remote_config(o_.config));
  }

  /// Runs the refinement loop; returns the verified YAML.
  std::string plan_request(const std::string& request) {
    auto backend = make_backend();
    const auto yaml_path = default_yaml_path();
    planner::RefineOptions ro;
    ro.max_retries = o_.max_retries;
    ro.output_yaml = yaml_path;
    const auto session = planner::refine_loop(planner::default_prompt(request), *backend, registry(), ro);
    const auto traces = planner::write_session_trace(session, yaml_path);
    for (const auto& a : session.attempts) out_ << "Attempt " << a.index << ": " << planner::to_string(a.outcome) << '\n';
    out_ << "Trace written to " << traces.first.string() << " and " << traces.second.string() << '\n';
    if (session.status == planner::SessionStatus::Exhausted) {
      const auto& last = session.attempts.back();
      out_ << (last.report_text.empty() ? last.error + "\n" : last.report_text);
      throw SessionExhausted("plan session exhausted after " + std::to_string(session.attempts.size()) + " attempts");
    }
    out_ << "Final YAML was saved to " << yaml_path.string() << '\n';
    out_ << session.attempts.back().report_text;
    return session.final_yaml;
  }

  engine::Schedule schedule() const {
    if (o_.schedule == "forward") return engine::Schedule::Forward;
    if (o_.schedule == "reverse") return engine::Schedule::Reverse;
    if (o_.schedule == "parallel") return engine::Schedule::Parallel;
    throw ConfigError("--schedule must be forward, reverse or parallel");
  }

  engine::RunBindings bindings_for(engine::Mode mode) {
    if (o_.bindings.empty()) throw ConfigError("--bindings <file> is required to execute a plan");
    engine::BindingsFile file;
    try {
      file = engine::load_bindings(o_.bindings);
    } catch (const std::exception& e) {
      throw ConfigError("bindings '" + o_.bindings + "': " + e.what());
    }
    const auto weights = o_.weights_dir.empty() ? out_dir() / "weights" : fs::path(o_.weights_dir);
    return file.for_mode(mode, out_dir() / std::string(engine::to_string(mode)), weights);
  }

  void run_stage(engine::Mode mode, const kg::KnowledgeGraph& graph) {
    auto bindings = bindings_for(mode);
    const auto sched = schedule();
    const auto name = std::string(engine::to_string(mode));
    RunLog log(out_dir() / (name + "_output.txt"), !o_.no_timestamps, &out_);
    const char* gpu = std::getenv("gpu_num");
    log.info(gpu != nullptr ? "gpu_num=" + std::string(gpu) + " (accepted, not used)" : "gpu_num not set");
    log.info("sm " + name + " -> " + bindings.out_dir.generic_string());
    engine::ExecuteOptions eo;
    eo.schedule = sched;
    eo.log = [&log](const std::string& line) { log.info(line); };
    try {
      const auto result = engine::execute(graph, registry(), bindings, eo);
      for (const auto& t : result.trained) {
        log.info("weights " + t.agent.render() + " -> " + t.file.generic_string());
      }
      if (mode == engine::Mode::Think) {
        std::vector<std::string> supernodes;
        for (const auto& m : result.masks)
          if (std::find(supernodes.begin(), supernodes.end(), m.supernode) == supernodes.end())
            supernodes.push_back(m.supernode);
        for (const auto& sn : supernodes)
          if (const auto d = result.mean_dice(sn)) log.info("mean dice " + sn + ": " + format_dice(*d));
        if (const auto d = result.mean_dice()) log.info("mean dice: " + format_dice(*d));
      }
      log.info("sm " + name + " finished: " + std::to_string(result.cases) + " cases, " +
               std::to_string(result.artifacts.size()) + " files");
    } catch (const std::exception& e) {
      log.error(e.what());
      throw;
    }
  }

  static std::string format_dice(double d) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << d;
    return s.str();
  }

  std::string common_flags(bool with_bindings) const {
    std::string s = " --out-dir " + shell_quote(o_.out_dir);
    if (!o_.registry.empty()) s += " --registry " + shell_quote(o_.registry);
    if (with_bindings && !o_.bindings.empty()) s += " --bindings " + shell_quote(o_.bindings);
    if (with_bindings && !o_.weights_dir.empty()) s += " --weights-dir " + shell_quote(o_.weights_dir);
    if (with_bindings && o_.schedule != "forward") s += " --schedule " + o_.schedule;
    if (o_.no_timestamps) s += " --no-timestamps";
    return s;
  }

  std::string plan_command(const std::string& request) const {
    std::string s = "cvplan plan " + shell_quote(request) + common_flags(false) + " --backend " + shell_quote(o_.backend);
    if (!o_.config.empty()) s += " --config " + shell_quote(o_.config);
    s += " --max-retries " + std::to_string(o_.max_retries);
    s += " --output " + shell_quote(default_yaml_path().string());
    return s;
  }

  std::string stage_command(const std::string& stage, const std::string& plan) const {
    return "cvplan " + stage + " " + shell_quote(plan) + common_flags(true);
  }

  int emit_shell(const std::vector<std::string>& commands) {
    const char* gpu = std::getenv("gpu_num");
    out_ << "#!/bin/sh\nset -e\n";
    out_ << "export gpu_num=" << shell_quote(gpu != nullptr ? gpu : "0") << '\n';
    for (const auto& c : commands) out_ << c << '\n';
    return kOk;
  }

  Options o_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<registry::ToolRegistry> custom_registry_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Plan, verify and run image-processing knowledge graphs", "cvplan"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--config", o.config, "Remote backend config (JSON or YAML)");
  app.add_option("--registry", o.registry, "Tool dictionary (default: built-in)");
  app.add_option("--bindings", o.bindings, "Placeholder bindings file");
  app.add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  app.add_option("--weights-dir", o.weights_dir, "Weights directory (default: <out-dir>/weights)");
  app.add_option("--max-retries", o.max_retries, "Planner attempts")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--backend", o.backend, "remote or scripted:<completions.json>")->capture_default_str();
  app.add_option("--schedule", o.schedule, "forward, reverse or parallel")
      ->capture_default_str()
      ->check(CLI::IsMember({"forward", "reverse", "parallel"}));
  app.add_flag("--no-timestamps", o.no_timestamps, "Drop timestamps from run logs");
  app.add_flag("--emit-shell", o.emit_shell, "Print equivalent shell commands instead of running");

  auto* plan = app.add_subcommand("plan", "Generate a verified plan from a request");
  plan->add_option("request", o.request, "What to segment")->required();
  plan->add_option("-o,--output", o.output, "YAML path (default: <out-dir>/example.yaml)");

  auto* verify = app.add_subcommand("verify", "Check a plan against the tool registry");
  verify->add_option("plan", o.input, "YAML or JSON plan")->required();

  auto* convert = app.add_subcommand("convert", "Convert a JSON plan to YAML");
  convert->add_option("plan", o.input, "JSON or YAML plan")->required();
  convert->add_option("-o,--output", o.output, "Write here instead of stdout");

  auto* learn = app.add_subcommand("learn", "Fit trainable agents");
  learn->add_option("plan", o.input, "YAML or JSON plan")->required();

  auto* think = app.add_subcommand("think", "Run inference with stored weights");
  think->add_option("plan", o.input, "YAML or JSON plan")->required();

  auto* run = app.add_subcommand("run", "plan (unless given a plan file), then learn, then think");
  run->add_option("input", o.input, "Request text or plan file")->required();
  run->add_option("-o,--output", o.output, "Plan YAML path (default: <out-dir>/example.yaml)");

  auto* trace = app.add_subcommand("trace", "Print a session trace from its JSON sidecar");
  trace->add_option("trace", o.input, "<name>.trace.json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExecutionFailed;
  }

  Runner runner(o, out, err);
  if (plan->parsed()) return runner.guarded([&] { return runner.plan(); });
  if (verify->parsed()) return runner.guarded([&] { return runner.verify_cmd(); });
  if (convert->parsed()) return runner.guarded([&] { return runner.convert(); });
  if (learn->parsed()) return runner.guarded([&] { return runner.learn(); });
  if (think->parsed()) return runner.guarded([&] { return runner.think(); });
  if (run->parsed()) return runner.guarded([&] { return runner.run(); });
  return runner.guarded([&] { return runner.trace(); });
}

}  // namespace cvplan::cli
