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

// Sentence scoring: the token-scorer contract, a thread-safe score cache,
// deterministic table-driven scorers, and the AvgPPL objective.

#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "deleter/core.h"

namespace deleter {

using NllVector = std::vector<double>;

// A scorer failed or broke its contract. Carries the offending sentence.
class ScorerError : public DeleterError {
 public:
  ScorerError(const std::string& what, TokenList tokens)
      : DeleterError(what + " [sentence: " + Join(tokens) + "]"),
        tokens_(std::move(tokens)) {}

  const TokenList& tokens() const { return tokens_; }

 private:
  TokenList tokens_;
};

// Maps a token sequence to per-token negative log-likelihoods in nats.
// Implementations must be deterministic and safe for concurrent calls.
class TokenScorer {
 public:
  virtual ~TokenScorer() = default;

  virtual NllVector Score(const TokenList& tokens) const = 0;

  // Default scores one sentence at a time. Remote scorers override this to
  // send a single request.
  virtual std::vector<NllVector> ScoreBatch(
      std::span<const TokenList> sentences) const;
};

// Checks the scorer contract (same length, finite, >= 0) and throws
// ScorerError naming the sentence otherwise.
void ValidateNlls(const TokenList& tokens, const NllVector& nlls);

// Exact-sequence keyed cache of NLL vectors with hit/miss counters.
class ScoreCache {
 public:
  bool Lookup(const TokenList& tokens, NllVector* out) const;
  void Store(const TokenList& tokens, NllVector nlls);

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  std::size_t size() const;
  void Clear();

  static std::string Key(const TokenList& tokens);

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, NllVector> entries_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

// Returns the cached vector on a hit, otherwise scores, validates and stores.
// Failed delegate calls are not cached. A null cache scores directly.
NllVector ScoreWithCache(const TokenList& tokens, const TokenScorer& scorer,
                         ScoreCache* cache);

// Batch form: only cache misses are sent to the scorer, in one ScoreBatch.
std::vector<NllVector> ScoreBatchWithCache(std::span<const TokenList> sentences,
                                           const TokenScorer& scorer,
                                           ScoreCache* cache);

// Computes the score of a node. root_nlls are the per-token NLLs of the
// original sentence; the deleted-token term is read from them and never
// triggers rescoring.
ScoreBreakdown AvgPpl(const TokenList& node_tokens,
                      std::span<const RootIndex> deleted_root_indices,
                      std::span<const double> root_nlls,
                      const TokenScorer& scorer, ScoreCache* cache = nullptr);

// Same, for NLLs already obtained for node_tokens.
ScoreBreakdown AvgPplFromNlls(std::span<const double> node_nlls,
                              std::span<const RootIndex> deleted_root_indices,
                              std::span<const double> root_nlls);

// Strict lookup table. Unknown sequences are an error so tests cannot score
// candidates they did not anticipate.
class FixtureScorer : public TokenScorer {
 public:
  using Table = std::map<TokenList, NllVector>;

  explicit FixtureScorer(Table table);

  NllVector Score(const TokenList& tokens) const override;

  // {"entries": [{"tokens": [...], "nll": [...]}, ...]}
  static FixtureScorer FromJsonFile(const std::string& path);

 private:
  Table table_;
};

// Context-sensitive deterministic scorer:
//   NLL(t_i) = max(0, unigram[t_i] + bonus(t_{i-1}, t_i))
// with t_{-1} = kBoundary. A bonus(t_last, kEnd) entry is added to the last
// token before clamping. With no bonuses it is context-free.
class BigramScorer : public TokenScorer {
 public:
  static constexpr const char* kBoundary = "<s>";
  static constexpr const char* kEnd = "</s>";

  using Unigram = std::unordered_map<Token, double>;
  using Bonus = std::map<std::pair<Token, Token>, double>;

  BigramScorer(Unigram unigram, Bonus bonus,
               std::optional<double> oov_nll = std::nullopt);

  NllVector Score(const TokenList& tokens) const override;

  // {"unigram": {"tok": nll, ...}, "bigram": [["a", "b", delta], ...],
  //  "oov_nll": optional number}. "<s>" and "</s>" name the sentence boundaries.
  static BigramScorer FromJsonFile(const std::string& path);

 private:
  Unigram unigram_;
  Bonus bonus_;
  std::optional<double> oov_nll_;
};

}  // namespace deleter
