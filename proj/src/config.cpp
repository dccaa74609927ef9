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
#include "tinyforge/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "tinyforge/error.hpp"

namespace tinyforge {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ConfigError, where + ": " + what);
}

void allow_keys(const YAML::Node& node, const std::string& where, std::initializer_list<std::string_view> keys) {
  if (!node.IsMap()) fail(where, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(where, "unknown key '" + key + "'");
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
  if (!node.IsScalar()) fail(where, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(where, "cannot interpret '" + node.Scalar() + "'");
  }
}

Millis seconds_value(const YAML::Node& node, const std::string& where) {
  const double s = scalar<double>(node, where);
  if (!(s > 0)) fail(where, "must be positive");
  return Millis{static_cast<std::int64_t>(s * 1000.0 + 0.5)};
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

fs::path existing_file(const fs::path& base, const YAML::Node& node, const std::string& where) {
  fs::path p = resolve(base, scalar<std::string>(node, where));
  std::error_code ec;
  if (!fs::exists(p, ec)) fail(where, "file not found: " + p.string());
  return p;
}

LifecycleStage stage_key_of(const YAML::Node& key, const std::string& where) {
  const auto text = key.as<std::string>();
  auto stage = parse_stage(text);
  if (!stage) fail(where, "unknown stage '" + text + "'");
  return *stage;
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence()) fail(where, "expected a list");
  std::vector<std::string> out;
  for (const auto& item : node) out.push_back(scalar<std::string>(item, where));
  return out;
}

void parse_provider(const YAML::Node& node, const fs::path& base, ProviderConfig& p) {
  allow_keys(node, "provider",
             {"kind", "model_name", "temperature", "system_message", "endpoint", "api_key", "request_timeout_s",
              "transport_tries", "initial_backoff_s", "fixtures", "seed", "success_probability", "latency_ms",
              "success_content", "failure_content", "simulated_clock"});
  if (node["kind"]) {
    const auto kind = scalar<std::string>(node["kind"], "provider.kind");
    if (kind == "live") {
      p.kind = ProviderKind::Live;
    } else if (kind == "scripted") {
      p.kind = ProviderKind::Scripted;
    } else if (kind == "stochastic") {
      p.kind = ProviderKind::Stochastic;
    } else {
      fail("provider.kind", "must be one of live, scripted, stochastic (got '" + kind + "')");
    }
  }
  if (node["model_name"]) p.request.model_name = scalar<std::string>(node["model_name"], "provider.model_name");
  if (node["temperature"]) p.request.temperature = scalar<double>(node["temperature"], "provider.temperature");
  if (node["system_message"]) {
    p.request.system_message = scalar<std::string>(node["system_message"], "provider.system_message");
  }
  if (node["endpoint"]) p.endpoint = scalar<std::string>(node["endpoint"], "provider.endpoint");
  if (node["api_key"]) p.api_key = scalar<std::string>(node["api_key"], "provider.api_key");
  if (node["request_timeout_s"]) p.request_timeout = seconds_value(node["request_timeout_s"], "provider.request_timeout_s");
  if (node["transport_tries"]) {
    p.transport_tries = scalar<int>(node["transport_tries"], "provider.transport_tries");
    if (p.transport_tries < 1) fail("provider.transport_tries", "must be >= 1");
  }
  if (node["initial_backoff_s"]) {
    const double s = scalar<double>(node["initial_backoff_s"], "provider.initial_backoff_s");
    if (s < 0) fail("provider.initial_backoff_s", "must be >= 0");
    p.initial_backoff = Millis{static_cast<std::int64_t>(s * 1000.0 + 0.5)};
  }
  if (const auto fixtures = node["fixtures"]) {
    if (!fixtures.IsMap()) fail("provider.fixtures", "expected a mapping of stage to file");
    for (const auto& kv : fixtures) {
      const std::string where = "provider.fixtures." + kv.first.as<std::string>();
      p.fixtures[stage_key_of(kv.first, where)] = existing_file(base, kv.second, where);
    }
  }
  if (node["seed"]) p.seed = scalar<std::uint64_t>(node["seed"], "provider.seed");
  if (const auto prob = node["success_probability"]) {
    auto check = [](double v, const std::string& where) {
      if (!(v >= 0.0 && v <= 1.0)) fail(where, "must be within [0, 1]");
      return v;
    };
    if (prob.IsScalar()) {
      const double v = check(scalar<double>(prob, "provider.success_probability"), "provider.success_probability");
      for (auto s : kAllStages) p.success_probability[s] = v;
    } else if (prob.IsMap()) {
      for (const auto& kv : prob) {
        const std::string where = "provider.success_probability." + kv.first.as<std::string>();
        p.success_probability[stage_key_of(kv.first, where)] = check(scalar<double>(kv.second, where), where);
      }
    } else {
      fail("provider.success_probability", "expected a number or a mapping of stage to number");
    }
  }
  if (const auto lat = node["latency_ms"]) {
    if (!lat.IsSequence() || lat.size() != 2) fail("provider.latency_ms", "expected [min, max]");
    const auto lo = scalar<std::int64_t>(lat[0], "provider.latency_ms");
    const auto hi = scalar<std::int64_t>(lat[1], "provider.latency_ms");
    if (lo < 0 || hi < lo) fail("provider.latency_ms", "need 0 <= min <= max");
    p.min_latency = Millis{lo};
    p.max_latency = Millis{hi};
  }
  for (const char* key : {"success_content", "failure_content"}) {
    if (const auto contents = node[key]) {
      if (!contents.IsMap()) fail(std::string("provider.") + key, "expected a mapping of stage to text");
      auto& target = std::string_view(key) == "success_content" ? p.success_content : p.failure_content;
      for (const auto& kv : contents) {
        const std::string where = std::string("provider.") + key + "." + kv.first.as<std::string>();
        target[stage_key_of(kv.first, where)] = scalar<std::string>(kv.second, where);
      }
    }
  }
  if (node["simulated_clock"]) p.simulated_clock = scalar<bool>(node["simulated_clock"], "provider.simulated_clock");

  if (p.kind == ProviderKind::Live && p.endpoint.empty()) fail("provider.endpoint", "required for the live provider");
}

StageInput parse_stage_input(LifecycleStage stage, const YAML::Node& node, const fs::path& base) {
  const std::string where = "stages." + std::string(stage_key(stage));
  if (!node.IsMap()) fail(where, "expected a mapping");
  StageInput in;
  in.stage = stage;
  for (const auto& kv : node) {
    const auto name = kv.first.as<std::string>();
    auto field = parse_field(name);
    if (!field) fail(where, "unknown field '" + name + "'");
    const auto value = scalar<std::string>(kv.second, where + "." + name);
    switch (*field) {
      case InputField::DatasetLocator: in.dataset_locator = resolve(base, value); break;
      case InputField::DatasetDescription: in.dataset_description = value; break;
      case InputField::ModelPurpose: in.model_purpose = value; break;
      case InputField::ModelLocator: in.model_locator = resolve(base, value); break;
      case InputField::DatasetOverview: in.dataset_overview = value; break;
      case InputField::QuantizationTarget: {
        auto q = parse_quantization_target(value);
        if (!q) fail(where + ".quantization_target", "unsupported target '" + value + "' (supported: int8)");
        in.quantization_target = q;
        break;
      }
      case InputField::RepresentativeDataLocator: in.representative_data_locator = resolve(base, value); break;
      case InputField::ConvertedModelLocator: in.converted_model_locator = resolve(base, value); break;
      case InputField::BoardId: in.board_id = value; break;
      case InputField::ApplicationDescription: in.application_description = value; break;
      case InputField::PeripheralDescription: in.peripheral_description = value; break;
    }
  }
  return in;
}

}  // namespace

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::Live: return "live";
    case ProviderKind::Scripted: return "scripted";
    case ProviderKind::Stochastic: return "stochastic";
  }
  return "?";
}

Config parse_config(std::string_view yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    fail("config", std::string("YAML syntax error: ") + e.what());
  }
  Config cfg;
  if (root.IsNull()) {
    cfg.workspace = resolve(base_dir, "runs");
    cfg.trace = resolve(base_dir, std::string(kDefaultTracePath));
    return cfg;
  }
  allow_keys(root, "config",
             {"provider", "cost", "retry", "templates", "toolchain", "executor", "workspace", "trace", "stages"});

  if (root["provider"]) parse_provider(root["provider"], base_dir, cfg.provider);

  if (const auto cost = root["cost"]) {
    allow_keys(cost, "cost", {"input_price_per_token", "output_price_per_token"});
    if (!cost["input_price_per_token"] || !cost["output_price_per_token"]) {
      fail("cost", "needs input_price_per_token and output_price_per_token");
    }
    const double in = scalar<double>(cost["input_price_per_token"], "cost.input_price_per_token");
    const double out = scalar<double>(cost["output_price_per_token"], "cost.output_price_per_token");
    if (in < 0 || out < 0) fail("cost", "prices must be non-negative");
    cfg.cost = CostModel::per_token(in, out);
  }

  if (const auto retry = root["retry"]) {
    allow_keys(retry, "retry", {"max_attempts", "timeout_s"});
    if (retry["max_attempts"]) cfg.retry.max_attempts = scalar<int>(retry["max_attempts"], "retry.max_attempts");
    if (retry["timeout_s"]) cfg.retry.per_execution_timeout = seconds_value(retry["timeout_s"], "retry.timeout_s");
    if (cfg.retry.max_attempts < 1) fail("retry.max_attempts", "must be >= 1");
  }

  if (const auto templates = root["templates"]) {
    if (!templates.IsMap()) fail("templates", "expected a mapping of stage to file");
    for (const auto& kv : templates) {
      const std::string where = "templates." + kv.first.as<std::string>();
      cfg.templates[stage_key_of(kv.first, where)] = existing_file(base_dir, kv.second, where);
    }
  }

  if (const auto tc = root["toolchain"]) {
    allow_keys(tc, "toolchain", {"adapter", "binary", "known_boards", "upload", "port"});
    if (tc["adapter"]) {
      cfg.toolchain.adapter = scalar<std::string>(tc["adapter"], "toolchain.adapter");
      if (cfg.toolchain.adapter != "mock" && cfg.toolchain.adapter != "arduino-cli") {
        fail("toolchain.adapter", "must be mock or arduino-cli");
      }
    }
    if (tc["binary"]) cfg.toolchain.binary = scalar<std::string>(tc["binary"], "toolchain.binary");
    if (tc["known_boards"]) cfg.toolchain.known_boards = string_list(tc["known_boards"], "toolchain.known_boards");
    if (tc["upload"]) cfg.toolchain.upload = scalar<bool>(tc["upload"], "toolchain.upload");
    if (tc["port"]) cfg.toolchain.port = scalar<std::string>(tc["port"], "toolchain.port");
    if (cfg.toolchain.upload && cfg.toolchain.port.empty()) fail("toolchain.port", "required when upload is on");
  }

  if (const auto ex = root["executor"]) {
    allow_keys(ex, "executor", {"interpreter", "script_name", "env_whitelist"});
    if (ex["interpreter"]) cfg.executor.interpreter = scalar<std::string>(ex["interpreter"], "executor.interpreter");
    if (ex["script_name"]) cfg.executor.script_name = scalar<std::string>(ex["script_name"], "executor.script_name");
    if (ex["env_whitelist"]) cfg.executor.env_whitelist = string_list(ex["env_whitelist"], "executor.env_whitelist");
  }

  cfg.workspace = resolve(base_dir, root["workspace"] ? scalar<std::string>(root["workspace"], "workspace") : "runs");
  cfg.trace = resolve(base_dir, root["trace"] ? scalar<std::string>(root["trace"], "trace")
                                              : std::string(kDefaultTracePath));

  if (const auto stages = root["stages"]) {
    if (!stages.IsMap()) fail("stages", "expected a mapping of stage to inputs");
    for (const auto& kv : stages) {
      const auto stage = stage_key_of(kv.first, "stages");
      cfg.stages[stage] = parse_stage_input(stage, kv.second, base_dir);
    }
  }
  return cfg;
}

Config load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Config cfg = parse_config(buf.str(), fs::absolute(path).parent_path());
  cfg.source = path;
  if (const char* key = std::getenv(std::string(kApiKeyEnv).c_str()); key && *key) cfg.provider.api_key = key;
  return cfg;
}

}  // namespace tinyforge
