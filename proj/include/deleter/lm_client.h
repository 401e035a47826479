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

// HTTP client for a masked-LM scoring server.
//
//   POST {base}/v1/score   {"sentences": [["tok", ...], ...]}
//                       -> {"scores": [[nll, ...], ...]}
//   GET  {base}/v1/health  -> {"model": str, "agg": str, "version": 1}
//
// Scores are per word token, in nats. Masking, [CLS]/[SEP] framing and
// wordpiece aggregation happen on the server.

#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "deleter/scoring.h"

namespace deleter {

inline constexpr int kProtocolVersion = 1;
inline constexpr const char* kScorerUrlEnv = "DELETER_SCORER_URL";

struct RetryPolicy {
  std::size_t max_attempts = 3;
  // Delay before retry i (0-based); the last entry repeats.
  std::vector<std::chrono::milliseconds> backoff = {
      std::chrono::milliseconds(100), std::chrono::milliseconds(500),
      std::chrono::milliseconds(2000)};
};

struct ScorerEndpoint {
  std::string base_url;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_batch = 64;
  RetryPolicy retry;

  void Validate() const;
};

// The server could not be reached, or kept failing after all retries.
class TransportError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

// The server answered with something that breaks the protocol.
class ProtocolError : public ScorerError {
 public:
  ProtocolError(const std::string& what, std::size_t sentence_index,
                TokenList tokens)
      : ScorerError("sentence " + std::to_string(sentence_index) + ": " + what,
                    std::move(tokens)),
        sentence_index_(sentence_index) {}

  std::size_t sentence_index() const { return sentence_index_; }

 private:
  std::size_t sentence_index_;
};

struct ServerInfo {
  std::string model;
  std::string agg;
  int version = 0;
};

// Fetches /v1/health. Throws TransportError when unreachable and
// ProtocolError on a malformed body or a version other than 1.
ServerInfo Healthcheck(const ScorerEndpoint& endpoint);

// Scores sentences in request chunks of at most max_batch. The returned
// vectors align with the input and are fully validated.
std::vector<NllVector> RemoteScore(const std::vector<TokenList>& sentences,
                                   const ScorerEndpoint& endpoint);

// TokenScorer backed by a remote server. Safe for concurrent use; every call
// opens its own connection.
class RemoteScorer : public TokenScorer {
 public:
  explicit RemoteScorer(ScorerEndpoint endpoint);

  NllVector Score(const TokenList& tokens) const override;
  std::vector<NllVector> ScoreBatch(
      std::span<const TokenList> sentences) const override;

  const ScorerEndpoint& endpoint() const { return endpoint_; }

 private:
  ScorerEndpoint endpoint_;
};

}  // namespace deleter
