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

// Progressive lookahead greedy search over the deletion graph.
//
// Each step probes contiguous span deletions of length 1 first. A candidate
// passes when its penalized AvgPPL divided by the parent's AvgPPL does not
// exceed 1 + alpha * ln(root_len). If no candidate of length l passes, spans
// of length l + 1 are probed, up to max_lookahead. In terminate mode a step
// with no passing candidate ends the search; in full-path mode the lowest
// penalized candidate seen at any level is taken instead.
//
// Penalized scores within 1e-12 relative of the best count as tied; ties go to
// the shorter span, then the leftmost.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "deleter/core.h"
#include "deleter/scoring.h"

namespace deleter {

// 1 + alpha * ln(root_len).
double Threshold(double alpha, std::size_t root_len);

// True iff candidate_penalized / parent_avgppl <= threshold. Inclusive.
bool Passes(double parent_avgppl, double candidate_penalized, double threshold);

double PenaltyMultiplier(std::size_t span_len, std::size_t parent_len,
                         double beta, PenaltyMode mode);

inline double Penalize(double avgppl, std::size_t span_len,
                       std::size_t parent_len, double beta, PenaltyMode mode) {
  return avgppl * PenaltyMultiplier(span_len, parent_len, beta, mode);
}

// Smallest token count a node may shrink to: max(min_tokens, ceil(min_cr * L)).
std::size_t MinLegalLength(const SearchConfig& config, std::size_t root_len);

// Largest token count satisfying max_cr, or root_len when unset.
std::size_t MaxSelectableLength(const SearchConfig& config, std::size_t root_len);

struct StepProbe {
  std::size_t lookahead = 0;
  std::vector<DeletionStep> candidates;
};

struct ProbeResult {
  std::optional<DeletionStep> chosen;
  std::vector<StepProbe> probes;
  // No legal candidate existed at any lookahead level.
  bool exhausted = false;
};

struct SearchContext {
  const RootSentence& root;
  const SearchConfig& config;
  const TokenScorer& scorer;
  ScoreCache* cache = nullptr;
  std::span<const double> root_nlls;
  // Candidates of one probe level are scored on up to this many threads.
  std::size_t workers = 1;
};

// Probes the next deletion from parent. When force is set, a step is chosen
// even if nothing passes, exactly as in full-path mode.
ProbeResult ProbeStep(const PathNode& parent, const SearchContext& ctx,
                      bool force = false);

PathNode MakeRootNode(const RootSentence& root, std::span<const double> root_nlls);

// Runs the search from the root. The root is scored once and its NLLs feed
// every deleted-token term. A scorer failure on the root throws; a failure
// later returns the partial path with error set.
//
// With max_cr set in terminate mode, steps keep being forced while the
// current node is longer than max_cr * L; the selected output is the last
// node within max_cr, or the shortest node flagged when none is.
DeletionPath Compress(const RootSentence& root, const SearchConfig& config,
                      const TokenScorer& scorer, ScoreCache* cache = nullptr,
                      std::size_t workers = 1);

}  // namespace deleter
