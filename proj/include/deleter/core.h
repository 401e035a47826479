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

// Shared domain types for the deletion-path engine.
//
// A sentence is never edited in place. Every node of the deletion graph is a
// strictly increasing list of indices into an immutable RootSentence, so
// nodes are cheap value objects that can be shared across worker threads.

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace deleter {

using Token = std::string;
using TokenList = std::vector<Token>;
using RootIndex = std::size_t;
using IndexList = std::vector<RootIndex>;
using IndexSet = std::set<RootIndex>;

// Base class for every error raised by the library.
class DeleterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid SearchConfig / RunConfig values or flag combinations.
class ConfigError : public DeleterError {
 public:
  using DeleterError::DeleterError;
};

// Bad sentence input (empty root, whitespace inside a token, ...).
class InputError : public DeleterError {
 public:
  using DeleterError::DeleterError;
};

class RootSentence {
 public:
  // Throws InputError when tokens is empty or a token is empty or contains
  // whitespace.
  explicit RootSentence(TokenList tokens, std::string id = "");

  const TokenList& tokens() const { return tokens_; }
  const std::string& id() const { return id_; }
  std::size_t size() const { return tokens_.size(); }
  const Token& operator[](RootIndex i) const { return tokens_[i]; }

 private:
  TokenList tokens_;
  std::string id_;
};

// Score of one node. avgppl = exp((kept_nll_sum + deleted_nll_sum) / root_len)
// where kept tokens are scored in the current sentence and deleted tokens
// keep the NLL they had in the original sentence.
struct ScoreBreakdown {
  double kept_nll_sum = 0.0;
  double deleted_nll_sum = 0.0;
  std::size_t kept_count = 0;
  std::size_t deleted_count = 0;
  std::size_t root_len = 0;
  double avgppl = 1.0;
};

struct PathNode {
  IndexList kept;
  ScoreBreakdown score;

  std::size_t size() const { return kept.size(); }
  TokenList Tokens(const RootSentence& root) const;
  // Complement of kept in 0..root_len, ascending.
  IndexList Deleted(std::size_t root_len) const;
};

struct DeletionStep {
  // Span position within the parent's kept sequence.
  std::size_t span_start = 0;
  std::size_t span_len = 0;
  IndexList removed_root_indices;
  std::size_t lookahead_used = 0;
  PathNode result;
  double penalized_score = 0.0;
  bool passed_threshold = false;
};

enum class Termination {
  kThresholdExhausted,
  kTokenFloor,
  kCrBound,
  kStepLimit,
  kExhausted,
  kScorerError,
};

std::string_view ToString(Termination t);

struct DeletionPath {
  RootSentence root;
  PathNode root_node;
  // Per-token NLLs of the root, the source of every deleted-token term.
  std::vector<double> root_nlls;
  std::vector<DeletionStep> steps;
  Termination terminated_by = Termination::kThresholdExhausted;
  // Index into Nodes() of the selected output sentence.
  std::size_t final_index = 0;
  // Set when max_cr could not be met by any node.
  bool final_flagged = false;
  // Set when the scorer failed mid-path; steps holds the partial path.
  std::optional<std::string> error;

  explicit DeletionPath(RootSentence r) : root(std::move(r)) {}

  // Root node followed by every step's result.
  std::vector<const PathNode*> Nodes() const;
  const PathNode& Final() const { return *Nodes()[final_index]; }
};

enum class PenaltyMode { kSpanLength, kCurrentLength, kOff };
enum class TerminationMode { kTerminate, kFullPath };

std::string_view ToString(PenaltyMode m);
std::string_view ToString(TerminationMode m);
PenaltyMode ParsePenaltyMode(std::string_view s);
TerminationMode ParseTerminationMode(std::string_view s);

struct SearchConfig {
  double alpha = 0.04;
  double beta = 0.04;
  std::size_t max_lookahead = 3;
  PenaltyMode penalty_mode = PenaltyMode::kSpanLength;
  TerminationMode termination_mode = TerminationMode::kTerminate;
  IndexSet frozen_root_indices;
  std::optional<double> min_cr;
  std::optional<double> max_cr;
  std::size_t min_tokens = 1;
  std::optional<std::size_t> step_limit;

  // Throws ConfigError.
  void Validate() const;
};

// Freeze request as given by a caller: token texts match every occurrence,
// indices match exactly.
struct FreezeSpec {
  std::set<std::string> texts;
  IndexSet indices;
};

struct ResolvedRoot {
  RootSentence root;
  IndexSet frozen;
  std::vector<std::string> warnings;
};

// Builds a root and resolves frozen entries to root indices. A frozen text
// that does not occur is a warning, or an InputError when strict is set. An
// out-of-range frozen index is always an InputError.
ResolvedRoot MakeRoot(TokenList tokens, const FreezeSpec& freeze,
                      std::string id = "", bool strict = false);

// Whitespace tokenization with optional lowercasing. When split_punct is set,
// leading and trailing ASCII punctuation is peeled off each word into
// separate tokens ("summer," -> "summer" ",").
struct TokenizeOptions {
  bool lowercase = true;
  bool split_punct = false;
};

TokenList Tokenize(std::string_view text, const TokenizeOptions& opts = {});

std::string Join(const TokenList& tokens, std::string_view sep = " ");

}  // namespace deleter
