// Copyright 2026 The TinyForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "tinyforge/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tinyforge/error.hpp"
#include "tinyforge/metrics.hpp"
#include "tinyforge/pipeline.hpp"
#include "tinyforge/trace.hpp"

namespace tinyforge {

namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigEnv = "TINYFORGE_CONFIG";
constexpr const char* kTraceEnv = "TINYFORGE_TRACE";

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

bool is_usage_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::UnknownFormat:
    case ErrorKind::InvalidPolicy:
    case ErrorKind::LintFailure:
    case ErrorKind::TemplateParse:
    case ErrorKind::TemplateNotFound:
    case ErrorKind::MissingField:
    case ErrorKind::PathNotFound:
    case ErrorKind::WrongStageFields:
    case ErrorKind::MissingStageInput:
    case ErrorKind::BoardUnknown:
      return true;
    default:
      return false;
  }
}

std::string seconds(Millis d) { return format_ratio(d.count(), 1000, 2); }

// Last non-blank line; for tracebacks and compiler output that is the
// most telling one.
std::string headline(std::string_view text) {
  std::string_view best;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = std::min(text.find('\n', pos), text.size());
    const auto line = text.substr(pos, nl - pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) best = line;
    pos = nl + 1;
  }
  while (!best.empty() && (best.back() == '\r' || best.back() == ' ')) best.remove_suffix(1);
  return std::string(best);
}

// Flags > environment > ./tinyforge.yaml.
std::optional<fs::path> config_path(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (auto e = env(kConfigEnv)) return fs::path(*e);
  if (fs::exists(kDefaultConfigName)) return fs::path(kDefaultConfigName);
  return std::nullopt;
}

Config require_config(const std::string& flag) {
  auto path = config_path(flag);
  if (!path) {
    throw Error(ErrorKind::ConfigError, fmt::format("no config file; pass --config or create ./{}", kDefaultConfigName));
  }
  return load_config(*path);
}

fs::path trace_path(const std::string& flag, const std::optional<Config>& cfg) {
  if (!flag.empty()) return flag;
  if (auto e = env(kTraceEnv)) return *e;
  if (cfg) return cfg->trace;
  return fs::path(kDefaultTracePath);
}

std::optional<LifecycleStage> parse_stage_arg(const std::string& text) {
  if (text == "all") return std::nullopt;
  auto s = parse_stage(text);
  if (!s) throw Error(ErrorKind::ConfigError, "unknown stage '" + text + "' (expected dp, mc, sg or all)");
  return s;
}

/// Objects shared by every run of one invocation.
struct Runtime {
  Config cfg;
  TemplateRegistry templates;
  std::shared_ptr<ToolchainAdapter> toolchain;
  WorkspaceExecutorOptions exec_options;

  explicit Runtime(Config c) : cfg(std::move(c)) {
    load_templates(cfg, templates);
    toolchain = make_toolchain(cfg.toolchain);
    exec_options.runner.interpreter = cfg.executor.interpreter;
    exec_options.runner.env_whitelist = cfg.executor.env_whitelist;
    exec_options.script_name = cfg.executor.script_name;
    exec_options.upload = cfg.toolchain.upload;
    exec_options.port = cfg.toolchain.port;
  }
};

/// Providers for one run, created lazily per stage.
class RunProviders {
 public:
  RunProviders(const ProviderConfig& config, std::optional<std::uint64_t> seed, std::optional<std::uint64_t> index)
      : config_(config), seed_(seed), index_(index) {}

  LLMProvider& operator()(LifecycleStage stage) {
    auto& slot = providers_[static_cast<int>(stage)];
    if (!slot) {
      std::optional<std::uint64_t> seed = seed_;
      if (index_) seed = bench_seed(seed_.value_or(config_.seed), stage, *index_);
      slot = make_provider(config_, stage, seed);
    }
    return *slot;
  }

 private:
  const ProviderConfig& config_;
  std::optional<std::uint64_t> seed_;
  std::optional<std::uint64_t> index_;
  std::array<std::unique_ptr<LLMProvider>, 3> providers_;
};

std::vector<StageResult> execute_run(const Runtime& rt, const Orchestrator& orch, const RunContext& ctx,
                                     std::optional<LifecycleStage> stage, RunProviders& providers) {
  if (!stage) return orch.run_pipeline(ctx, rt.cfg.stages, rt.cfg.retry, std::ref(providers)).stage_results;
  const auto& input = rt.cfg.stages[*stage];
  if (!input) throw Error(ErrorKind::MissingStageInput, std::string(stage_key(*stage)));
  return {orch.run_stage(ctx, *input, rt.cfg.retry, providers(*stage))};
}

struct RunArgs {
  std::string config;
  std::string stage = "all";
  std::string trace;
  std::string workspace;
  std::optional<int> max_attempts;
  std::optional<double> timeout_s;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(Config& cfg, const RunArgs& a) {
  if (!a.workspace.empty()) cfg.workspace = a.workspace;
  cfg.trace = trace_path(a.trace, cfg);
  if (a.max_attempts) cfg.retry.max_attempts = *a.max_attempts;
  if (a.timeout_s) {
    if (!(*a.timeout_s > 0)) throw Error(ErrorKind::InvalidPolicy, "timeout must be positive");
    cfg.retry.per_execution_timeout = Millis{static_cast<std::int64_t>(*a.timeout_s * 1000.0 + 0.5)};
  }
  if (a.seed) cfg.provider.seed = *a.seed;
  cfg.retry.validate();
}

std::unique_ptr<Clock> make_clock(const Config& cfg, Timestamp origin) {
  if (cfg.uses_simulated_clock()) return std::make_unique<SimulatedClock>(origin);
  return std::make_unique<WallClock>();
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  Config cfg = require_config(a.config);
  apply_overrides(cfg, a);
  const auto stage = parse_stage_arg(a.stage);
  Runtime rt(std::move(cfg));

  TraceStore store(rt.cfg.trace);
  WorkspaceExecutor executor(rt.exec_options, rt.toolchain);
  Orchestrator orch(rt.templates, executor, store, rt.cfg.provider.request);
  auto clock = make_clock(rt.cfg, wall_now());
  RunContext ctx{make_run_id(), rt.cfg.workspace, *clock};
  RunProviders providers(rt.cfg.provider, a.seed, std::nullopt);

  err << "run " << ctx.run_id << '\n';
  const auto results = execute_run(rt, orch, ctx, stage, providers);

  bool ok = true;
  for (const auto& r : results) {
    out << fmt::format("{} {} attempts={} time={}s tokens={}\n", stage_label(r.stage), to_string(r.outcome),
                       r.attempts.size(), seconds(r.total_duration), r.total_tokens());
    if (r.outcome == StageOutcome::Failure) {
      ok = false;
      err << fmt::format("review requested: {} failed after {} attempts; last error: {}\n", stage_label(r.stage),
                         r.attempts.size(), headline(r.attempts.back().error_excerpt.value_or("none")));
    }
  }
  if (!stage && results.size() < kAllStages.size()) {
    err << fmt::format("pipeline halted at {}\n", stage_label(results.back().stage));
  }
  return ok ? kExitOk : kExitFailure;
}

struct BenchArgs {
  RunArgs run;
  int runs = 0;
  int parallel = 1;
  std::string format = "table";
};

int cmd_bench(const BenchArgs& b, std::ostream& out, std::ostream& err) {
  const ReportFormat format = parse_report_format(b.format);
  Config cfg = require_config(b.run.config);
  apply_overrides(cfg, b.run);
  const auto stage = parse_stage_arg(b.run.stage);
  const Runtime rt(std::move(cfg));

  TraceStore store(rt.cfg.trace);
  const std::string batch = make_run_id();
  const Timestamp origin = wall_now();
  const auto n = static_cast<std::size_t>(b.runs);
  std::vector<std::vector<StageResult>> results(n);
  std::vector<std::string> failures;
  std::mutex failures_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    WorkspaceExecutor executor(rt.exec_options, rt.toolchain);
    Orchestrator orch(rt.templates, executor, store, rt.cfg.provider.request);
    for (std::size_t i = next++; i < n; i = next++) {
      auto clock = make_clock(rt.cfg, origin);
      RunContext ctx{fmt::format("{}-{:03}", batch, i + 1), rt.cfg.workspace, *clock};
      RunProviders providers(rt.cfg.provider, b.run.seed, i);
      try {
        results[i] = execute_run(rt, orch, ctx, stage, providers);
      } catch (const std::exception& e) {
        std::lock_guard lock(failures_mutex);
        failures.push_back(ctx.run_id + ": " + e.what());
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(b.parallel), n);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::sort(failures.begin(), failures.end());
  for (const auto& f : failures) err << "run failed: " << f << '\n';
  if (!failures.empty()) return kExitFailure;

  std::vector<RunSample> samples;
  for (std::size_t i = 0; i < n; ++i) {
    const auto run_id = fmt::format("{}-{:03}", batch, i + 1);
    for (const auto& r : results[i]) samples.push_back(to_sample(run_id, r));
  }
  err << fmt::format("batch {}: {} runs, trace {}\n", batch, n, rt.cfg.trace.string());
  const auto stats = aggregate_by_stage(samples);
  out << render_report(stats, format);
  return kExitOk;
}

struct ReportArgs {
  std::string config;
  std::string trace;
  std::string view = "stats";
  std::string format = "table";
  std::optional<double> input_price;
  std::optional<double> output_price;
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  const ReportFormat format = parse_report_format(a.format);
  if (a.view != "stats" && a.view != "scatter" && a.view != "tradeoff") {
    err << "unknown view '" << a.view << "' (expected stats, scatter or tradeoff)\n";
    return kExitUsage;
  }
  if (a.input_price.has_value() != a.output_price.has_value()) {
    err << "--input-price and --output-price go together\n";
    return kExitUsage;
  }
  std::optional<Config> cfg;
  if (auto p = config_path(a.config)) cfg = load_config(*p);
  std::optional<CostModel> cost = cfg ? cfg->cost : std::nullopt;
  if (a.input_price) {
    if (*a.input_price < 0 || *a.output_price < 0) {
      err << "prices must be non-negative\n";
      return kExitUsage;
    }
    cost = CostModel::per_token(*a.input_price, *a.output_price);
  }
  if (a.view == "tradeoff" && !cost) {
    err << "the tradeoff view needs token prices (--input-price/--output-price or cost: in the config)\n";
    return kExitUsage;
  }

  const fs::path path = trace_path(a.trace, cfg);
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    err << "cannot read trace " << path.string() << '\n';
    return kExitFailure;
  }
  std::vector<RunSample> samples = samples_from_events(load_events(path));
  if (cost) samples = attach_costs(samples, *cost);

  if (a.view == "stats") {
    out << render_report(aggregate_by_stage(samples), format);
  } else if (a.view == "scatter") {
    out << render_scatter(scatter_rows(samples), format);
  } else {
    out << render_tradeoff(tradeoff_rows(samples, *cost), format);
  }
  return kExitOk;
}

struct ReplayArgs {
  std::string config;
  std::string trace;
  std::string run;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<Config> cfg;
  if (a.trace.empty() && !env(kTraceEnv)) {
    if (auto p = config_path(a.config)) cfg = load_config(*p);
  }
  const fs::path path = trace_path(a.trace, cfg);
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    err << "cannot read trace " << path.string() << '\n';
    return kExitFailure;
  }

  const auto issues = verify_trace(path);
  for (const auto& i : issues) out << fmt::format("line {}: {}\n", i.line, i.message);

  std::vector<TraceEvent> events;
  try {
    events = load_events(path);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitFailure;
  }
  std::string run_id = a.run;
  if (run_id.empty()) {
    if (events.empty()) {
      err << "trace is empty\n";
      return issues.empty() ? kExitOk : kExitFailure;
    }
    run_id = events.back().run_id;
  }
  std::vector<TraceEvent> run;
  std::copy_if(events.begin(), events.end(), std::back_inserter(run),
               [&](const TraceEvent& e) { return e.run_id == run_id; });
  if (run.empty()) {
    err << "run not found: " << run_id << '\n';
    return kExitFailure;
  }

  out << "run " << run_id << '\n';
  for (const auto& e : run) {
    std::string line = fmt::format("{} {} {} #{} {} tokens={}+{}", format_rfc3339(e.ts_start), stage_label(e.stage),
                                   to_string(e.kind), e.attempt_index, e.outcome, e.prompt_tokens,
                                   e.completion_tokens);
    if (e.artifact_locator) line += " artifact=" + *e.artifact_locator;
    if (e.error_excerpt) line += " error=\"" + headline(*e.error_excerpt) + "\"";
    out << line << '\n';
  }
  if (!issues.empty()) {
    err << fmt::format("{} integrity issue(s) in {}\n", issues.size(), path.string());
    return kExitFailure;
  }
  return kExitOk;
}

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "Config file (default ./tinyforge.yaml)");
  cmd->add_option("--trace", a.trace, "Trace file");
  cmd->add_option("--workspace", a.workspace, "Workspace root for run directories");
  cmd->add_option("--max-attempts", a.max_attempts, "LLM invocations per stage, first one included")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--timeout", a.timeout_s, "Per-execution timeout in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "Seed for the stochastic provider");
}

}  // namespace

std::uint64_t bench_seed(std::uint64_t seed, LifecycleStage stage, std::uint64_t index) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(stage)), index);
}

std::unique_ptr<LLMProvider> make_provider(const ProviderConfig& config, LifecycleStage stage,
                                           std::optional<std::uint64_t> seed) {
  switch (config.kind) {
    case ProviderKind::Live: {
      LiveOptions o;
      o.endpoint = config.endpoint;
      o.api_key = config.api_key;
      o.request_timeout = config.request_timeout;
      o.transport_tries = config.transport_tries;
      o.initial_backoff = config.initial_backoff;
      return std::make_unique<LiveProvider>(std::move(o));
    }
    case ProviderKind::Scripted: {
      const auto it = config.fixtures.find(stage);
      if (it == config.fixtures.end()) {
        throw Error(ErrorKind::ConfigError,
                    fmt::format("provider.fixtures.{} is required for the scripted provider", stage_key(stage)));
      }
      return std::make_unique<ScriptedProvider>(load_fixture_file(it->second));
    }
    case ProviderKind::Stochastic: {
      StochasticOptions o = default_stochastic_contents(stage);
      o.seed = seed.value_or(config.seed);
      if (auto it = config.success_probability.find(stage); it != config.success_probability.end()) {
        o.success_probability = it->second;
      }
      if (auto it = config.success_content.find(stage); it != config.success_content.end()) {
        o.success_content = it->second;
      }
      if (auto it = config.failure_content.find(stage); it != config.failure_content.end()) {
        o.failure_content = it->second;
      }
      o.min_latency = config.min_latency;
      o.max_latency = config.max_latency;
      return std::make_unique<StochasticProvider>(std::move(o));
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown provider kind");
}

std::shared_ptr<ToolchainAdapter> make_toolchain(const ToolchainConfig& config) {
  if (config.adapter == "arduino-cli") {
    return std::make_shared<ArduinoCliToolchain>(config.binary, config.known_boards);
  }
  if (config.known_boards.empty()) return std::make_shared<MockToolchain>();
  return std::make_shared<MockToolchain>(config.known_boards);
}

void load_templates(const Config& config, TemplateRegistry& registry) {
  const fs::path shipped = default_template_dir();
  for (LifecycleStage stage : kAllStages) {
    const auto it = config.templates.find(stage);
    const fs::path file = it != config.templates.end() ? it->second : shipped / (std::string(stage_key(stage)) + ".txt");
    registry.register_template(load_template_file(stage, file));
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drive LLM-generated code through data processing, model conversion and sketch generation."};
  app.name("tinyforge");
  app.set_version_flag("--version", std::string(TINYFORGE_VERSION));
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one stage or the whole pipeline");
  add_run_options(run, run_args);
  run->add_option("--stage", run_args.stage, "dp, mc, sg or all");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Repeat a stage N times and print its statistics");
  add_run_options(bench, bench_args.run);
  bench->add_option("--stage", bench_args.run.stage, "dp, mc, sg or all")->required();
  bench->add_option("--runs", bench_args.runs, "Number of runs")->required()->check(CLI::PositiveNumber);
  bench->add_option("--parallel", bench_args.parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  bench->add_option("--format", bench_args.format, "table or csv");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Summarize a trace");
  report->add_option("--config", report_args.config, "Config file");
  report->add_option("--trace", report_args.trace, "Trace file");
  report->add_option("--view", report_args.view, "stats, scatter or tradeoff");
  report->add_option("--format", report_args.format, "table or csv");
  report->add_option("--input-price", report_args.input_price, "USD per prompt token");
  report->add_option("--output-price", report_args.output_price, "USD per completion token");

  ReplayArgs replay_args;
  auto* replay = app.add_subcommand("replay", "Verify a trace and print a run's timeline");
  replay->add_option("--config", replay_args.config, "Config file");
  replay->add_option("--trace", replay_args.trace, "Trace file");
  replay->add_option("--run", replay_args.run, "Run id (default: the last run in the trace)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_args, out, err);
    if (bench->parsed()) return cmd_bench(bench_args, out, err);
    if (report->parsed()) return cmd_report(report_args, out, err);
    if (replay->parsed()) return cmd_replay(replay_args, out, err);
  } catch (const LintError& e) {
    for (const auto& issue : e.issues()) err << "template: " << issue << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_usage_error(e.kind()) ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace tinyforge
