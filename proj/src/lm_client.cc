// Copyright 2026 The Authors.
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

#include "deleter/lm_client.h"

#include <cmath>
#include <optional>
#include <regex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace deleter {
namespace {

using json = nlohmann::json;

struct SplitUrl {
  std::string scheme_host_port;
  std::string prefix;
};

SplitUrl Split(const std::string& base_url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url, m, re)) {
    throw ConfigError("scorer URL must look like http://host:port[/prefix], got '" +
                      base_url + "'");
  }
  std::string prefix = m[2].matched ? m[2].str() : "";
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {m[1].str(), prefix};
}

httplib::Client MakeClient(const SplitUrl& url, const ScorerEndpoint& ep) {
  httplib::Client cli(url.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(ep.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  return cli;
}

std::chrono::milliseconds BackoffFor(const RetryPolicy& policy, std::size_t retry) {
  if (policy.backoff.empty()) return std::chrono::milliseconds(0);
  return policy.backoff[std::min(retry, policy.backoff.size() - 1)];
}

// Runs send() until it yields a usable response. Transport failures and 5xx
// answers are retried; anything else is returned to the caller as is.
template <typename Send>
httplib::Result WithRetries(const ScorerEndpoint& ep, Send send,
                            std::string* last_failure) {
  for (std::size_t attempt = 0; attempt < ep.retry.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(BackoffFor(ep.retry, attempt - 1));
    httplib::Result res = send();
    if (!res) {
      *last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      *last_failure = "HTTP " + std::to_string(res->status);
      try {
        *last_failure += ": " + json::parse(res->body).at("error").get<std::string>();
      } catch (const json::exception&) {
      }
      continue;
    }
    return res;
  }
  return httplib::Result(nullptr, httplib::Error::Unknown);
}

std::vector<NllVector> ScoreChunk(const SplitUrl& url, const ScorerEndpoint& ep,
                                  const std::vector<TokenList>& sentences,
                                  std::size_t first, std::size_t count) {
  json body;
  body["sentences"] = json::array();
  for (std::size_t i = first; i < first + count; ++i) {
    body["sentences"].push_back(sentences[i]);
  }
  const std::string payload = body.dump();

  std::string failure;
  httplib::Result res = WithRetries(
      ep,
      [&] {
        httplib::Client cli = MakeClient(url, ep);
        return cli.Post(url.prefix + "/v1/score", payload, "application/json");
      },
      &failure);
  if (!res) {
    throw TransportError("scoring sentences " + std::to_string(first) + ".." +
                             std::to_string(first + count - 1) + " failed after " +
                             std::to_string(ep.retry.max_attempts) +
                             " attempts (" + failure + ")",
                         sentences[first]);
  }
  if (res->status != 200) {
    std::string msg = "HTTP " + std::to_string(res->status);
    try {
      msg += ": " + json::parse(res->body).at("error").get<std::string>();
    } catch (const json::exception&) {
    }
    throw ProtocolError(msg, first, sentences[first]);
  }

  json doc;
  try {
    doc = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed response body: ") + e.what(), first,
                        sentences[first]);
  }
  if (!doc.is_object() || !doc.contains("scores") || !doc["scores"].is_array()) {
    throw ProtocolError("response lacks a \"scores\" array", first, sentences[first]);
  }
  const json& scores = doc["scores"];
  if (scores.size() != count) {
    const std::size_t bad = first + std::min(scores.size(), count - 1);
    throw ProtocolError("response has " + std::to_string(scores.size()) +
                            " score vectors for " + std::to_string(count) +
                            " sentences",
                        bad, sentences[bad]);
  }

  std::vector<NllVector> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = first + k;
    const TokenList& tokens = sentences[idx];
    const json& row = scores[k];
    if (!row.is_array()) throw ProtocolError("score entry is not an array", idx, tokens);
    if (row.size() != tokens.size()) {
      throw ProtocolError("expected " + std::to_string(tokens.size()) +
                              " NLLs, got " + std::to_string(row.size()),
                          idx, tokens);
    }
    NllVector v;
    v.reserve(row.size());
    for (const json& x : row) {
      if (!x.is_number()) throw ProtocolError("non-numeric NLL", idx, tokens);
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw ProtocolError("non-finite NLL", idx, tokens);
      if (d < 0.0) throw ProtocolError("negative NLL", idx, tokens);
      v.push_back(d);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

void ScorerEndpoint::Validate() const {
  Split(base_url);
  if (max_batch < 1) throw ConfigError("max_batch must be >= 1");
  if (retry.max_attempts < 1) throw ConfigError("retry attempts must be >= 1");
  if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
}

ServerInfo Healthcheck(const ScorerEndpoint& endpoint) {
  const SplitUrl url = Split(endpoint.base_url);
  std::string failure;
  httplib::Result res = WithRetries(
      endpoint,
      [&] {
        httplib::Client cli = MakeClient(url, endpoint);
        return cli.Get(url.prefix + "/v1/health");
      },
      &failure);
  if (!res) {
    throw TransportError("scorer at " + endpoint.base_url + " unreachable after " +
                             std::to_string(endpoint.retry.max_attempts) +
                             " attempts (" + failure + ")",
                         {});
  }
  if (res->status != 200) {
    throw ProtocolError("health endpoint returned HTTP " +
                            std::to_string(res->status),
                        0, {});
  }
  ServerInfo info;
  try {
    const json doc = json::parse(res->body);
    info.model = doc.at("model").get<std::string>();
    info.agg = doc.at("agg").get<std::string>();
    info.version = doc.at("version").get<int>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed health response: ") + e.what(), 0, {});
  }
  if (info.version != kProtocolVersion) {
    throw ProtocolError("scorer speaks protocol version " +
                            std::to_string(info.version) + ", this client needs " +
                            std::to_string(kProtocolVersion) +
                            "; upgrade the server or point " + kScorerUrlEnv +
                            " at a compatible one",
                        0, {});
  }
  return info;
}

std::vector<NllVector> RemoteScore(const std::vector<TokenList>& sentences,
                                   const ScorerEndpoint& endpoint) {
  const SplitUrl url = Split(endpoint.base_url);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].empty()) {
      throw ProtocolError("empty sentence cannot be scored", i, {});
    }
  }
  std::vector<NllVector> out;
  out.reserve(sentences.size());
  const std::size_t batch = std::max<std::size_t>(1, endpoint.max_batch);
  for (std::size_t first = 0; first < sentences.size(); first += batch) {
    const std::size_t count = std::min(batch, sentences.size() - first);
    for (NllVector& v : ScoreChunk(url, endpoint, sentences, first, count)) {
      out.push_back(std::move(v));
    }
  }
  return out;
}

RemoteScorer::RemoteScorer(ScorerEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  endpoint_.Validate();
}

NllVector RemoteScorer::Score(const TokenList& tokens) const {
  return RemoteScore({tokens}, endpoint_).front();
}

std::vector<NllVector> RemoteScorer::ScoreBatch(
    std::span<const TokenList> sentences) const {
  return RemoteScore(std::vector<TokenList>(sentences.begin(), sentences.end()),
                     endpoint_);
}

}  // namespace deleter
