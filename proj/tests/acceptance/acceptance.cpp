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
// Runs each acceptance criterion at its stated tolerance and time budget and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cli_fixture.hpp"
#include "pipeline_fakes.hpp"
#include "stage_fixture.hpp"
#include "test_util.hpp"
#include "tinyforge/error.hpp"
#include "tinyforge/metrics.hpp"
#include "tinyforge/pipeline.hpp"
#include "tinyforge/trace.hpp"

using namespace tinyforge;
using tinyforge::testing::TempDir;
using tinyforge::testing::cli;
using tinyforge::testing::read_file;

namespace {

/// Collects failed expectations for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += "\n      - " + f;
    if (count_ > failures_.size()) s += fmt::format("\n      ... {} more", count_ - failures_.size());
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

/// Records every request before delegating.
class RecordingProvider final : public LLMProvider {
 public:
  explicit RecordingProvider(LLMProvider& inner) : inner_(inner) {}
  LLMResponse complete(const LLMRequest& request) override {
    requests.push_back(request.messages.back().content);
    return inner_.complete(request);
  }
  std::vector<std::string> requests;

 private:
  LLMProvider& inner_;
};

/// Records the stage inputs the orchestrator hands to the executor.
class RecordingExecutor final : public Executor {
 public:
  explicit RecordingExecutor(Executor& inner) : inner_(inner) {}
  StageExecution execute(LifecycleStage stage, const CodeArtifact& code, const std::filesystem::path& attempt_dir,
                         const StageInput& input, Millis timeout) override {
    inputs[stage] = input;
    return inner_.execute(stage, code, attempt_dir, input, timeout);
  }
  std::map<LifecycleStage, StageInput> inputs;

 private:
  Executor& inner_;
};

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

std::size_t count_kind(const std::vector<TraceEvent>& events, EventKind kind) {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [kind](const TraceEvent& e) { return e.kind == kind; }));
}

// Scripts used by the end-to-end criteria. Python keeps tracebacks realistic.
const std::string kDpOk =
    "```python\nimport os\nos.makedirs('artifacts', exist_ok=True)\n"
    "open('artifacts/processed.csv', 'w').write('label,x\\n0,1.0\\n')\n```\n";
const std::string kDpFail = "```python\nrows = {'label': 0}\nprint(rows['Label'])\n```\n";
const std::string kMcOk =
    "```python\nimport os\nos.makedirs('artifacts', exist_ok=True)\n"
    "open('artifacts/model_int8.tflite', 'wb').write(b'TFL3' + bytes(28))\n```\n";
const std::string kMcFail = "```python\nraise ValueError('representative dataset has the wrong shape')\n```\n";
const std::string kSgOk = "```cpp\n#include \"model_data.h\"\nvoid setup() {}\nvoid loop() {}\n```\n";
const std::string kSgFail = "```cpp\n// FORCE_COMPILE_ERROR: sketch.ino:4:3: error: 'tflite' has not been declared\n```\n";

std::vector<FixtureEntry> entries(const std::vector<std::string>& contents) {
  std::vector<FixtureEntry> out;
  for (const auto& c : contents) out.push_back({c, 400, 120, Millis{2000}});
  return out;
}

struct Env {
  TempDir dir;
  TemplateRegistry templates;
  WorkspaceExecutor executor{{}, std::make_shared<MockToolchain>()};

  Env() { templates.load_directory(default_template_dir()); }

  PipelineInputs inputs() {
    PipelineInputs in;
    in[LifecycleStage::DataProcessing] = testing::dp_input(dir.path());
    in[LifecycleStage::ModelConversion] = testing::mc_input(dir.path(), false);
    in[LifecycleStage::SketchGeneration] = testing::sg_input(dir.path(), false);
    return in;
  }
};

// ---------------------------------------------------------------------------

void stage_statistics_table(Check& c) {
  TempDir dir;
  const auto trace = dir / "reference.log";
  std::vector<RunSample> all;
  {
    TraceStore store(trace);
    for (const auto& t : testing::reference_targets()) {
      const auto samples = testing::synthesize(t);
      for (const auto& e : testing::as_stage_results(samples, Timestamp{Millis{1'790'000'000'000}})) {
        store.append_event(e);
      }
      all.insert(all.end(), samples.begin(), samples.end());
    }
  }

  // Independent oracle over the fixture itself.
  struct Expect {
    const char* label;
    const char* rate;
    double time_mean, time_min, time_max, tok_mean, tok_min, tok_max;
  };
  const Expect targets[] = {{"DP", "90.0", 47.76, 32.58, 155.93, 10832, 8560, 25086},
                            {"MC", "100.0", 6.09, 3.65, 10.21, 689, 545, 3949},
                            {"SG", "36.7", 60.55, 7.73, 87.92, 13321, 1840, 17181}};
  for (const auto& t : targets) {
    double tsum = 0, ksum = 0, tmin = 1e18, tmax = -1, kmin = 1e18, kmax = -1;
    int n = 0, ok = 0;
    for (const auto& s : all) {
      if (stage_label(s.stage) != std::string_view(t.label)) continue;
      const double sec = static_cast<double>(s.duration.count()) / 1000.0;
      const double tok = static_cast<double>(s.usage.prompt_tokens + s.usage.completion_tokens);
      tsum += sec;
      ksum += tok;
      tmin = std::min(tmin, sec);
      tmax = std::max(tmax, sec);
      kmin = std::min(kmin, tok);
      kmax = std::max(kmax, tok);
      ++n;
      ok += s.outcome == StageOutcome::Success ? 1 : 0;
    }
    c.expect(n == 30, fmt::format("{} fixture has {} samples", t.label, n));
    c.expect(std::fabs(tsum / n - t.time_mean) < 1e-9, fmt::format("{} fixture time mean {}", t.label, tsum / n));
    c.expect(std::fabs(ksum / n - t.tok_mean) < 1e-9, fmt::format("{} fixture token mean {}", t.label, ksum / n));
    c.expect(tmin == t.time_min && tmax == t.time_max, fmt::format("{} fixture time range", t.label));
    c.expect(kmin == t.tok_min && kmax == t.tok_max, fmt::format("{} fixture token range", t.label));
    c.expect(fmt::format("{:.1f}", 100.0 * ok / n) == t.rate, fmt::format("{} fixture success count", t.label));
  }

  const auto csv = cli({"report", "--view", "stats", "--format", "csv", "--trace", trace.string()});
  c.expect(csv.code == 0, "report --format csv exit " + std::to_string(csv.code) + ": " + csv.err);
  const auto lines = split(csv.out, '\n');
  c.expect(!lines.empty() && lines[0] == kStatsCsvHeader, "csv header");
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& t = targets[i];
    if (lines.size() <= i + 1) {
      c.expect(false, "missing csv row for " + std::string(t.label));
      continue;
    }
    const auto f = split(lines[i + 1], ',');
    if (f.size() != 9) {
      c.expect(false, "csv row shape: " + lines[i + 1]);
      continue;
    }
    c.expect(f[0] == t.label, "row label " + f[0]);
    c.expect(f[2] == t.rate, fmt::format("{} success rate {} != {}", t.label, f[2], t.rate));
    c.expect(std::fabs(std::stod(f[3]) - t.time_mean) <= 0.01 + 1e-9, t.label + std::string(" time mean ") + f[3]);
    c.expect(std::stod(f[4]) == t.time_min && std::stod(f[5]) == t.time_max, t.label + std::string(" time range"));
    c.expect(std::fabs(std::stod(f[6]) - t.tok_mean) <= 0.01 + 1e-9, t.label + std::string(" token mean ") + f[6]);
    c.expect(std::stod(f[7]) == t.tok_min && std::stod(f[8]) == t.tok_max, t.label + std::string(" token range"));
  }

  const auto table = cli({"report", "--view", "stats", "--trace", trace.string()});
  c.expect(table.code == 0, "report table exit");
  for (const char* needle : {"90.0%", "100.0%", "36.7%", "47.76 [32.58-155.93]", "6.09 [3.65-10.21]",
                             "60.55 [7.73-87.92]", "10,832.00 [8,560-25,086]", "689.00 [545-3,949]",
                             "13,321.00 [1,840-17,181]"}) {
    c.expect(table.out.find(needle) != std::string::npos, std::string("table lacks ") + needle);
  }
}

void retry_cap(Check& c) {
  for (int cap : {5, 1, 2, 3}) {
    Env env;
    TraceStore store(env.dir / "events.log");
    Orchestrator orch(env.templates, env.executor, store);
    std::vector<std::string> failing(10, kSgFail);
    ScriptedProvider provider(entries(failing));
    SimulatedClock clock{Timestamp{Millis{1'790'000'000'000}}};
    const RunContext run{"cap-" + std::to_string(cap), env.dir / "runs", clock};
    const auto r = orch.run_stage(run, testing::sg_input(env.dir.path()), {cap, Millis{10000}}, provider);
    const auto events = load_run(store.path(), run.run_id);
    c.expect(count_kind(events, EventKind::Attempt) == static_cast<std::size_t>(cap),
             fmt::format("cap {}: {} attempt events", cap, count_kind(events, EventKind::Attempt)));
    c.expect(r.outcome == StageOutcome::Failure, fmt::format("cap {}: stage not failed", cap));
    c.expect(provider.calls() == static_cast<std::size_t>(cap), fmt::format("cap {}: {} calls", cap, provider.calls()));
    c.expect(count_kind(events, EventKind::StageResult) == 1, fmt::format("cap {}: stage_result count", cap));
    c.expect(count_kind(events, EventKind::ReviewRequested) == 1, fmt::format("cap {}: review request", cap));
  }
}

std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char ch : s) {
    if (ch == '\'') {
      q += "'\\''";
    } else {
      q += ch;
    }
  }
  return q + "'";
}

void error_feedback(Check& c) {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> pieces = {"a", "Z", "0", " ", "\t", "\n", "{", "}", "{{", "%s", "\"", "'", "\\",
                                           "$", "#", "é", "→", "日本", "KeyError", ":", "  File \"main.py\""};
  std::vector<std::string> errors;
  for (int i = 0; i < 100; ++i) {
    std::string e = fmt::format("E{:03}-{:016x}:", i, rng());
    const int len = 1 + static_cast<int>(rng() % 60);
    for (int j = 0; j < len; ++j) e += pieces[rng() % pieces.size()];
    errors.push_back(e);
  }

  Env env;
  ScriptRunner sh;
  sh.interpreter = "sh";
  WorkspaceExecutor executor({sh, "main.sh"}, std::make_shared<MockToolchain>());
  testing::MemorySink sink;
  Orchestrator orch(env.templates, executor, sink);
  const auto input = testing::dp_input(env.dir.path());

  // Four failing attempts and a success per run: 25 runs cover 100 excerpts.
  for (int run_index = 0; run_index < 25; ++run_index) {
    std::vector<std::string> contents;
    for (int k = 0; k < 4; ++k) {
      const auto& e = errors[static_cast<std::size_t>(run_index * 4 + k)];
      contents.push_back("```sh\nprintf '%s' " + shell_quote(e) + " >&2\nexit 1\n```\n");
    }
    contents.push_back("```sh\nmkdir -p artifacts && echo ok > artifacts/out.txt\n```\n");
    ScriptedProvider scripted(entries(contents));
    RecordingProvider provider(scripted);
    SimulatedClock clock{Timestamp{Millis{1'790'000'000'000}}};
    const RunContext run{"feedback-" + std::to_string(run_index), env.dir / "runs", clock};
    const auto r = orch.run_stage(run, input, {}, provider);
    c.expect(r.attempts.size() == 5 && provider.requests.size() == 5, "run " + std::to_string(run_index) + " shape");
    for (std::size_t k = 1; k < provider.requests.size(); ++k) {
      const auto& e = errors[static_cast<std::size_t>(run_index * 4) + k - 1];
      const auto& body = provider.requests[k];
      const auto section = body.find("# Error Handling Protocol");
      const auto next = body.find("# Output Format", section);
      const auto at = body.find(e);
      c.expect(count_of(body, e) == 1, fmt::format("excerpt {} appears {} times", e.substr(0, 21), count_of(body, e)));
      c.expect(section != std::string::npos && at > section && at + e.size() <= next,
               "excerpt outside the error handling section: " + e.substr(0, 21));
      c.expect(r.attempts[k - 1].error_excerpt == e, "captured excerpt differs: " + e.substr(0, 21));
    }
  }
}

void pipeline_chaining(Check& c) {
  {
    Env env;
    testing::MemorySink sink;
    RecordingExecutor executor(env.executor);
    Orchestrator orch(env.templates, executor, sink);
    ScriptedProvider dp(entries({kDpOk})), mc(entries({kMcOk})), sg(entries({kSgOk}));
    RecordingProvider mc_rec(mc);
    SimulatedClock clock{Timestamp{Millis{1'790'000'000'000}}};
    const RunContext run{"chain", env.dir / "runs", clock};
    const auto result = orch.run_pipeline(run, env.inputs(), {}, [&](LifecycleStage s) -> LLMProvider& {
      if (s == LifecycleStage::DataProcessing) return dp;
      if (s == LifecycleStage::ModelConversion) return mc_rec;
      return sg;
    });
    c.expect(result.stage_results.size() == 3 && !result.halted_at, "pipeline did not complete");
    if (result.stage_results.size() == 3) {
      for (const auto& r : result.stage_results) {
        c.expect(r.artifact_locator && std::filesystem::exists(*r.artifact_locator),
                 std::string(stage_label(r.stage)) + " artifact missing");
      }
      const auto& dp_art = result.stage_results[0].artifact_locator;
      const auto& mc_art = result.stage_results[1].artifact_locator;
      c.expect(executor.inputs[LifecycleStage::ModelConversion].representative_data_locator == dp_art,
               "MC input does not reference the DP artifact");
      c.expect(executor.inputs[LifecycleStage::SketchGeneration].converted_model_locator == mc_art,
               "SG input does not reference the MC artifact");
      c.expect(!mc_rec.requests.empty() && mc_rec.requests[0].find("../../dp/attempt_1/artifacts") != std::string::npos,
               "MC prompt does not name the DP artifact");
      const auto header = read_file(run.run_dir() / "sg" / "attempt_1" / "sketch" / "model_data.h");
      c.expect(header.find("g_model_len = 32;") != std::string::npos, "sketch header not built from the MC model");
    }
  }
  {
    Env env;
    testing::MemorySink sink;
    Orchestrator orch(env.templates, env.executor, sink);
    std::vector<std::string> failing(10, kDpFail);
    ScriptedProvider dp(entries(failing)), mc(entries({kMcOk})), sg(entries({kSgOk}));
    SimulatedClock clock{Timestamp{Millis{1'790'000'000'000}}};
    const RunContext run{"halt", env.dir / "runs", clock};
    const auto result = orch.run_pipeline(run, env.inputs(), {}, [&](LifecycleStage s) -> LLMProvider& {
      if (s == LifecycleStage::DataProcessing) return dp;
      if (s == LifecycleStage::ModelConversion) return mc;
      return sg;
    });
    c.expect(result.halted_at == LifecycleStage::DataProcessing, "pipeline did not halt at DP");
    c.expect(!result.stage_results.empty() && dp.calls() == result.stage_results[0].attempts.size(),
             "DP provider calls differ from DP attempts");
    c.expect(mc.calls() == 0 && sg.calls() == 0, "a later stage was invoked after DP failed");
  }
}

void replay_determinism(Check& c) {
  Env env;
  const auto trace = env.dir / "traces" / "events.log";
  TraceStore store(trace);
  Orchestrator orch(env.templates, env.executor, store);
  const auto inputs = env.inputs();
  std::vector<std::string> ids;
  for (int i = 0; i < 2; ++i) {
    ScriptedProvider dp(entries({kDpFail, kDpOk})), mc(entries({kMcFail, kMcOk})), sg(entries({kSgFail, kSgOk}));
    WallClock clock;
    const RunContext run{make_run_id(), env.dir / "runs", clock};
    orch.run_pipeline(run, inputs, {}, [&](LifecycleStage s) -> LLMProvider& {
      if (s == LifecycleStage::DataProcessing) return dp;
      if (s == LifecycleStage::ModelConversion) return mc;
      return sg;
    });
    ids.push_back(run.run_id);
  }
  auto erased = [&](const std::string& id) {
    auto events = load_run(trace, id);
    for (auto& e : events) {
      e.run_id.clear();
      e.ts_start = e.ts_end = Timestamp{};
    }
    return events;
  };
  const auto a = erased(ids[0]);
  const auto b = erased(ids[1]);
  c.expect(a.size() == 9, fmt::format("expected 9 events per run, got {}", a.size()));
  c.expect(a == b, "traces differ after erasing run_id and timestamps");
  c.expect(!a.empty() && a[0].error_excerpt && a[0].error_excerpt->find("KeyError: 'Label'") != std::string::npos,
           "first DP attempt should carry the traceback");
  for (const auto& id : ids) {
    const auto r = cli({"replay", "--trace", trace.string(), "--run", id});
    c.expect(r.code == 0, "replay exit " + std::to_string(r.code) + " for " + id + ": " + r.err);
  }
}

void cost_accounting(Check& c) {
  const auto model = CostModel::per_token(2.5e-6, 1.0e-5);
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::int64_t> tokens(0, 5'000'000);
  int broken = 0;
  for (int i = 0; i < 1000; ++i) {
    const TokenUsage a{tokens(rng), tokens(rng)}, b{tokens(rng), tokens(rng)};
    if (price(a + b, model) != price(a, model) + price(b, model)) ++broken;
  }
  c.expect(broken == 0, fmt::format("{} of 1000 pairs not additive", broken));
  const auto worked = price({1000, 500}, model);
  c.expect(worked.to_string() == "0.007500", "worked example gives " + worked.to_string());
  c.expect(worked.pico == 7'500'000'000, "worked example is not exact");
  c.expect(price({0, 0}, model).pico == 0, "zero usage is not free");
}

void aggregation_properties(Check& c) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 500; ++round) {
    const auto stage = kAllStages[rng() % 3];
    const int n = 1 + static_cast<int>(rng() % 60);
    std::vector<RunSample> samples;
    for (int i = 0; i < n; ++i) {
      RunSample s;
      s.run_id = std::to_string(i);
      s.stage = stage;
      s.outcome = rng() % 2 ? StageOutcome::Success : StageOutcome::Failure;
      s.duration = Millis{static_cast<std::int64_t>(rng() % 300'000)};
      s.usage = {static_cast<std::int64_t>(rng() % 30'000), static_cast<std::int64_t>(rng() % 8'000)};
      samples.push_back(s);
    }
    const auto st = aggregate_stage_stats(samples);
    auto shuffled = samples;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    c.expect(aggregate_stage_stats(shuffled) == st, fmt::format("round {}: permutation changed stats", round));

    if (n > 1) {
      const auto cut = 1 + static_cast<std::ptrdiff_t>(rng() % static_cast<std::uint64_t>(n - 1));
      const std::vector<RunSample> left(samples.begin(), samples.begin() + cut);
      const std::vector<RunSample> right(samples.begin() + cut, samples.end());
      c.expect(merge_stats(aggregate_stage_stats(left), aggregate_stage_stats(right)) == st,
               fmt::format("round {}: merge differs from concatenation", round));
    }

    const double tmin = static_cast<double>(st.time_min.count()) / 1000.0;
    const double tmax = static_cast<double>(st.time_max.count()) / 1000.0;
    c.expect(tmin <= st.time_mean_s() + 1e-9 && st.time_mean_s() <= tmax + 1e-9,
             fmt::format("round {}: time mean outside [min, max]", round));
    c.expect(static_cast<double>(st.tokens_min) <= st.tokens_mean() + 1e-9 &&
                 st.tokens_mean() <= static_cast<double>(st.tokens_max) + 1e-9,
             fmt::format("round {}: token mean outside [min, max]", round));
    const bool min_member = std::any_of(samples.begin(), samples.end(), [&](const RunSample& s) {
      return s.duration == st.time_min;
    });
    const bool max_member = std::any_of(samples.begin(), samples.end(), [&](const RunSample& s) {
      return s.total_tokens() == st.tokens_max;
    });
    c.expect(min_member && max_member, fmt::format("round {}: extremes are not sample values", round));
  }
}

void concurrent_trace_integrity(Check& c) {
  TempDir dir;
  const auto cfg = testing::write_stochastic_config(dir.path(), 1234, "{sg: 0.367}").string();
  const auto serial_trace = (dir / "serial.log").string();
  const auto parallel_trace = (dir / "parallel.log").string();
  const auto serial = cli({"bench", "--config", cfg, "--stage", "sg", "--runs", "30", "--parallel", "1",
                           "--format", "csv", "--trace", serial_trace});
  const auto parallel = cli({"bench", "--config", cfg, "--stage", "sg", "--runs", "30", "--parallel", "8",
                             "--format", "csv", "--trace", parallel_trace});
  c.expect(serial.code == 0, "bench K=1 exit " + std::to_string(serial.code) + ": " + serial.err);
  c.expect(parallel.code == 0, "bench K=8 exit " + std::to_string(parallel.code) + ": " + parallel.err);
  c.expect(serial.out == parallel.out && !serial.out.empty(), "stats differ between K=1 and K=8");

  for (const auto& path : {serial_trace, parallel_trace}) {
    const auto issues = verify_trace(path);
    c.expect(issues.empty(), path + ": " + (issues.empty() ? "" : issues[0].message));
    std::vector<TraceEvent> events;
    try {
      events = load_events(path);
    } catch (const Error& e) {
      c.expect(false, e.what());
    }
    std::set<std::string> runs;
    std::size_t results = 0;
    for (const auto& e : events) {
      if (e.kind != EventKind::StageResult) continue;
      ++results;
      runs.insert(e.run_id);
    }
    c.expect(results == 30 && runs.size() == 30, fmt::format("{}: {} stage_result events over {} runs", path,
                                                             results, runs.size()));
  }

  // The stats come from the trace as well as from memory.
  const auto from_trace = cli({"report", "--trace", parallel_trace, "--format", "csv"});
  c.expect(from_trace.out == parallel.out, "report over the bench trace disagrees with bench output");
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_s;
  std::function<void(Check&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "stage statistics table", 1.0, stage_statistics_table},
      {"AC2", "retry cap enforcement", 1.0, retry_cap},
      {"AC3", "error feedback injection", 5.0, error_feedback},
      {"AC4", "pipeline chaining and halting", 1.0, pipeline_chaining},
      {"AC5", "replay determinism", 1.0, replay_determinism},
      {"AC6", "cost accounting", 1.0, cost_accounting},
      {"AC7", "aggregation properties", 5.0, aggregation_properties},
      {"AC8", "trace integrity under concurrency", 10.0, concurrent_trace_integrity},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("unexpected exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(elapsed < cr.budget_s, fmt::format("took {:.3f}s, budget {:.0f}s", elapsed, cr.budget_s));
    const bool ok = check.ok();
    failed += ok ? 0 : 1;
    std::cout << fmt::format("{} {:<36} {}  ({:.3f}s, budget {:.0f}s){}\n", cr.id, cr.name, ok ? "PASS" : "FAIL",
                             elapsed, cr.budget_s, ok ? "" : check.summary());
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
                           criteria.size());
  return failed;
}
