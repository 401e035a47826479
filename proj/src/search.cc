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

#include "deleter/search.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <numeric>

namespace deleter {
namespace {

// Guards the ratio-to-count conversions against 0.3 * 10 = 3.0000000000000004.
constexpr double kCountSlack = 1e-9;

// Penalized scores this close to the minimum count as ties. Mathematically
// equal candidates (duplicate tokens, NLLs clamped at zero) can differ in the
// last bits depending on summation order.
constexpr double kTieRelTol = 1e-12;

// Lowest penalized score among the steps accepted by keep, ties going to the
// shorter span and then the leftmost one.
template <typename Keep>
const DeletionStep* SelectBest(const std::vector<const DeletionStep*>& steps,
                               Keep keep) {
  double best = INFINITY;
  for (const DeletionStep* s : steps) {
    if (keep(*s)) best = std::min(best, s->penalized_score);
  }
  if (best == INFINITY) return nullptr;
  const double cutoff = best + kTieRelTol * best;
  const DeletionStep* chosen = nullptr;
  for (const DeletionStep* s : steps) {
    if (!keep(*s) || s->penalized_score > cutoff) continue;
    if (!chosen || s->span_len < chosen->span_len ||
        (s->span_len == chosen->span_len && s->span_start < chosen->span_start)) {
      chosen = s;
    }
  }
  return chosen;
}

bool TouchesFrozen(const PathNode& parent, std::size_t start, std::size_t len,
                   const IndexSet& frozen) {
  if (frozen.empty()) return false;
  for (std::size_t p = start; p < start + len; ++p) {
    if (frozen.count(parent.kept[p])) return true;
  }
  return false;
}

std::vector<NllVector> ScoreAll(const std::vector<TokenList>& sentences,
                                const SearchContext& ctx) {
  const std::size_t n = sentences.size();
  const std::size_t workers = std::max<std::size_t>(1, std::min(ctx.workers, n));
  if (workers == 1) return ScoreBatchWithCache(sentences, ctx.scorer, ctx.cache);

  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::future<std::vector<NllVector>>> futures;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t len = std::min(chunk, n - begin);
    std::span<const TokenList> part(sentences.data() + begin, len);
    futures.push_back(std::async(std::launch::async, [part, &ctx] {
      return ScoreBatchWithCache(part, ctx.scorer, ctx.cache);
    }));
  }
  // Drain every future before rethrowing so no task outlives ctx.
  std::vector<NllVector> out;
  out.reserve(n);
  std::exception_ptr first_error;
  for (auto& f : futures) {
    try {
      for (NllVector& v : f.get()) out.push_back(std::move(v));
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::size_t CrFloorLength(const SearchConfig& config, std::size_t root_len) {
  if (!config.min_cr) return 0;
  const double need = *config.min_cr * static_cast<double>(root_len);
  return static_cast<std::size_t>(std::ceil(need - kCountSlack));
}

}  // namespace

double Threshold(double alpha, std::size_t root_len) {
  return 1.0 + alpha * std::log(static_cast<double>(root_len));
}

bool Passes(double parent_avgppl, double candidate_penalized, double threshold) {
  return candidate_penalized / parent_avgppl <= threshold;
}

double PenaltyMultiplier(std::size_t span_len, std::size_t parent_len,
                         double beta, PenaltyMode mode) {
  switch (mode) {
    case PenaltyMode::kSpanLength:
      return std::pow(static_cast<double>(span_len), beta);
    case PenaltyMode::kCurrentLength:
      return std::pow(static_cast<double>(parent_len), beta);
    case PenaltyMode::kOff:
      return 1.0;
  }
  return 1.0;
}

std::size_t MinLegalLength(const SearchConfig& config, std::size_t root_len) {
  return std::max(config.min_tokens, CrFloorLength(config, root_len));
}

std::size_t MaxSelectableLength(const SearchConfig& config, std::size_t root_len) {
  if (!config.max_cr) return root_len;
  const double cap = *config.max_cr * static_cast<double>(root_len);
  return static_cast<std::size_t>(std::floor(cap + kCountSlack));
}

PathNode MakeRootNode(const RootSentence& root, std::span<const double> root_nlls) {
  PathNode node;
  node.kept.resize(root.size());
  std::iota(node.kept.begin(), node.kept.end(), RootIndex{0});
  node.score = AvgPplFromNlls(root_nlls, {}, root_nlls);
  return node;
}

ProbeResult ProbeStep(const PathNode& parent, const SearchContext& ctx,
                      bool force) {
  const SearchConfig& cfg = ctx.config;
  const std::size_t root_len = ctx.root.size();
  const std::size_t parent_len = parent.size();
  const std::size_t floor_len = MinLegalLength(cfg, root_len);
  const double threshold = Threshold(cfg.alpha, root_len);
  const bool take_best_anyway =
      force || cfg.termination_mode == TerminationMode::kFullPath;

  ProbeResult result;
  result.exhausted = true;

  for (std::size_t len = 1; len <= cfg.max_lookahead && len <= parent_len; ++len) {
    if (parent_len - len < floor_len) break;

    StepProbe probe;
    probe.lookahead = len;
    std::vector<TokenList> sentences;
    for (std::size_t start = 0; start + len <= parent_len; ++start) {
      if (TouchesFrozen(parent, start, len, cfg.frozen_root_indices)) continue;
      DeletionStep step;
      step.span_start = start;
      step.span_len = len;
      step.lookahead_used = len;
      step.removed_root_indices.assign(parent.kept.begin() + start,
                                       parent.kept.begin() + start + len);
      step.result.kept.reserve(parent_len - len);
      step.result.kept.insert(step.result.kept.end(), parent.kept.begin(),
                              parent.kept.begin() + start);
      step.result.kept.insert(step.result.kept.end(),
                              parent.kept.begin() + start + len, parent.kept.end());
      sentences.push_back(step.result.Tokens(ctx.root));
      probe.candidates.push_back(std::move(step));
    }
    if (probe.candidates.empty()) {
      result.probes.push_back(std::move(probe));
      continue;
    }
    result.exhausted = false;

    const std::vector<NllVector> nlls = ScoreAll(sentences, ctx);
    for (std::size_t c = 0; c < probe.candidates.size(); ++c) {
      DeletionStep& step = probe.candidates[c];
      const IndexList deleted = step.result.Deleted(root_len);
      step.result.score = AvgPplFromNlls(nlls[c], deleted, ctx.root_nlls);
      step.penalized_score = Penalize(step.result.score.avgppl, len, parent_len,
                                      cfg.beta, cfg.penalty_mode);
      step.passed_threshold =
          Passes(parent.score.avgppl, step.penalized_score, threshold);
    }
    result.probes.push_back(std::move(probe));

    // Pointers are taken only after the probe has its final address.
    std::vector<const DeletionStep*> level;
    for (const DeletionStep& step : result.probes.back().candidates) level.push_back(&step);
    const DeletionStep* best_passing =
        SelectBest(level, [](const DeletionStep& s) { return s.passed_threshold; });
    if (best_passing) {
      result.chosen = *best_passing;
      return result;
    }
  }

  if (take_best_anyway) {
    std::vector<const DeletionStep*> all;
    for (const StepProbe& probe : result.probes) {
      for (const DeletionStep& step : probe.candidates) all.push_back(&step);
    }
    const DeletionStep* best = SelectBest(all, [](const DeletionStep&) { return true; });
    if (best) result.chosen = *best;
  }
  return result;
}

DeletionPath Compress(const RootSentence& root, const SearchConfig& config,
                      const TokenScorer& scorer, ScoreCache* cache,
                      std::size_t workers) {
  config.Validate();
  for (RootIndex i : config.frozen_root_indices) {
    if (i >= root.size()) {
      throw InputError("frozen index " + std::to_string(i) + " out of range");
    }
  }

  DeletionPath path(root);
  path.root_nlls = ScoreWithCache(root.tokens(), scorer, cache);
  path.root_node = MakeRootNode(root, path.root_nlls);

  const std::size_t root_len = root.size();
  const std::size_t cr_floor = CrFloorLength(config, root_len);
  const std::size_t max_len = MaxSelectableLength(config, root_len);
  const SearchContext ctx{root, config, scorer, cache, path.root_nlls, workers};

  const PathNode* current = &path.root_node;
  while (true) {
    if (config.step_limit && path.steps.size() >= *config.step_limit) {
      path.terminated_by = Termination::kStepLimit;
      break;
    }
    const std::size_t n = current->size();
    if (n <= config.min_tokens) {
      path.terminated_by = Termination::kTokenFloor;
      break;
    }
    if (n - 1 < cr_floor) {
      path.terminated_by = Termination::kCrBound;
      break;
    }
    const bool force =
        config.termination_mode == TerminationMode::kTerminate && n > max_len;

    ProbeResult probe;
    try {
      probe = ProbeStep(*current, ctx, force);
    } catch (const DeleterError& e) {
      path.error = e.what();
      path.terminated_by = Termination::kScorerError;
      break;
    }
    if (!probe.chosen) {
      path.terminated_by = probe.exhausted ? Termination::kExhausted
                                           : Termination::kThresholdExhausted;
      break;
    }
    path.steps.push_back(std::move(*probe.chosen));
    current = &path.steps.back().result;
  }

  const auto nodes = path.Nodes();
  path.final_index = nodes.size() - 1;
  if (config.max_cr) {
    path.final_flagged = true;
    for (std::size_t i = nodes.size(); i-- > 0;) {
      if (nodes[i]->size() <= max_len) {
        path.final_index = i;
        path.final_flagged = false;
        break;
      }
    }
  }
  return path;
}

}  // namespace deleter
