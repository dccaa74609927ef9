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
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tinyforge/error.hpp"
#include "tinyforge/llm.hpp"

namespace tinyforge {

using nlohmann::json;

LiveProvider::LiveProvider(LiveOptions options) : options_(std::move(options)) {
  const auto scheme_end = options_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::InvalidRequest, "endpoint must be an absolute http(s) URL: " + options_.endpoint);
  }
  const auto path_start = options_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = options_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : options_.endpoint.substr(path_start);
  if (options_.transport_tries < 1) options_.transport_tries = 1;
}

std::string LiveProvider::encode_request(const LLMRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role == Role::System ? "system" : "user"}, {"content", m.content}});
  }
  json body = {{"model", request.model_name}, {"messages", messages}, {"temperature", request.temperature}};
  return body.dump();
}

LLMResponse LiveProvider::decode_response(const LLMRequest& request, std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    std::string text = content.is_null() ? std::string() : content.get<std::string>();
    if (doc.contains("usage") && doc["usage"].is_object() && doc["usage"].contains("prompt_tokens") &&
        doc["usage"].contains("completion_tokens")) {
      LLMResponse r;
      r.content = std::move(text);
      r.usage.prompt_tokens = doc["usage"]["prompt_tokens"].get<std::int64_t>();
      r.usage.completion_tokens = doc["usage"]["completion_tokens"].get<std::int64_t>();
      if (r.usage.prompt_tokens < 0 || r.usage.completion_tokens < 0) {
        throw Error(ErrorKind::BadResponse, "negative usage counts");
      }
      r.usage_source = UsageSource::ProviderReported;
      return r;
    }
    return with_estimated_usage(request, std::move(text));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadResponse, std::string("malformed chat completion: ") + e.what());
  }
}

LLMResponse LiveProvider::complete(const LLMRequest& request) {
  validate_request(request);
  const std::string body = encode_request(request);

  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(options_.request_timeout).count();
  std::string last_problem = "no attempt made";
  bool last_was_rate_limit = false;
  auto backoff = options_.initial_backoff;

  for (int attempt = 1; attempt <= options_.transport_tries; ++attempt) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(std::max<long>(1, timeout_s), 0);
    client.set_read_timeout(std::max<long>(1, timeout_s), 0);
    client.set_write_timeout(std::max<long>(1, timeout_s), 0);

    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_problem = "transport error: " + httplib::to_string(res.error());
      last_was_rate_limit = false;
    } else if (res->status == 429) {
      last_problem = "HTTP 429 from " + scheme_host_port_;
      last_was_rate_limit = true;
    } else if (res->status >= 500) {
      last_problem = "HTTP " + std::to_string(res->status) + " from " + scheme_host_port_;
      last_was_rate_limit = false;
    } else if (res->status >= 200 && res->status < 300) {
      return decode_response(request, res->body);
    } else {
      throw Error(ErrorKind::BadResponse, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
    }
    if (attempt < options_.transport_tries) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  const std::string summary = last_problem + " after " + std::to_string(options_.transport_tries) + " tries";
  if (last_was_rate_limit) throw Error(ErrorKind::RateLimited, summary);
  throw Error(ErrorKind::ProviderUnreachable, summary);
}

}  // namespace tinyforge
