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

#include "deleter/scoring.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

#include "json.hpp"

namespace deleter {

using json = nlohmann::json;

std::vector<NllVector> TokenScorer::ScoreBatch(
    std::span<const TokenList> sentences) const {
  std::vector<NllVector> out;
  out.reserve(sentences.size());
  for (const TokenList& s : sentences) out.push_back(Score(s));
  return out;
}

void ValidateNlls(const TokenList& tokens, const NllVector& nlls) {
  if (nlls.size() != tokens.size()) {
    throw ScorerError("scorer returned " + std::to_string(nlls.size()) +
                          " values for " + std::to_string(tokens.size()) +
                          " tokens",
                      tokens);
  }
  for (std::size_t i = 0; i < nlls.size(); ++i) {
    if (!std::isfinite(nlls[i]) || nlls[i] < 0.0) {
      throw ScorerError("scorer returned invalid NLL " + std::to_string(nlls[i]) +
                            " at token " + std::to_string(i),
                        tokens);
    }
  }
}

// Length-prefixed, so distinct token lists never share a key.
std::string ScoreCache::Key(const TokenList& tokens) {
  std::string key;
  for (const Token& t : tokens) {
    key += std::to_string(t.size());
    key += '\x1f';
    key += t;
  }
  return key;
}

bool ScoreCache::Lookup(const TokenList& tokens, NllVector* out) const {
  const std::string key = Key(tokens);
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    misses_.fetch_add(1);
    return false;
  }
  hits_.fetch_add(1);
  *out = it->second;
  return true;
}

void ScoreCache::Store(const TokenList& tokens, NllVector nlls) {
  std::string key = Key(tokens);
  std::unique_lock lock(mu_);
  entries_.insert_or_assign(std::move(key), std::move(nlls));
}

std::size_t ScoreCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

void ScoreCache::Clear() {
  std::unique_lock lock(mu_);
  entries_.clear();
  hits_ = 0;
  misses_ = 0;
}

NllVector ScoreWithCache(const TokenList& tokens, const TokenScorer& scorer,
                         ScoreCache* cache) {
  NllVector out;
  if (cache && cache->Lookup(tokens, &out)) return out;
  out = scorer.Score(tokens);
  ValidateNlls(tokens, out);
  if (cache) cache->Store(tokens, out);
  return out;
}

std::vector<NllVector> ScoreBatchWithCache(std::span<const TokenList> sentences,
                                           const TokenScorer& scorer,
                                           ScoreCache* cache) {
  std::vector<NllVector> out(sentences.size());
  std::vector<std::size_t> miss_pos;
  std::vector<TokenList> misses;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (cache && cache->Lookup(sentences[i], &out[i])) continue;
    miss_pos.push_back(i);
    misses.push_back(sentences[i]);
  }
  if (misses.empty()) return out;
  std::vector<NllVector> scored = scorer.ScoreBatch(misses);
  if (scored.size() != misses.size()) {
    throw ScorerError("scorer returned " + std::to_string(scored.size()) +
                          " vectors for a batch of " +
                          std::to_string(misses.size()),
                      misses.front());
  }
  for (std::size_t k = 0; k < misses.size(); ++k) {
    ValidateNlls(misses[k], scored[k]);
  }
  for (std::size_t k = 0; k < misses.size(); ++k) {
    if (cache) cache->Store(misses[k], scored[k]);
    out[miss_pos[k]] = std::move(scored[k]);
  }
  return out;
}

ScoreBreakdown AvgPplFromNlls(std::span<const double> node_nlls,
                              std::span<const RootIndex> deleted_root_indices,
                              std::span<const double> root_nlls) {
  const std::size_t root_len = root_nlls.size();
  if (node_nlls.size() + deleted_root_indices.size() != root_len) {
    throw InputError("kept (" + std::to_string(node_nlls.size()) +
                     ") + deleted (" +
                     std::to_string(deleted_root_indices.size()) +
                     ") tokens do not cover the " + std::to_string(root_len) +
                     "-token root");
  }
  ScoreBreakdown b;
  b.root_len = root_len;
  b.kept_count = node_nlls.size();
  b.deleted_count = deleted_root_indices.size();
  for (double v : node_nlls) b.kept_nll_sum += v;
  for (RootIndex i : deleted_root_indices) {
    if (i >= root_len) {
      throw InputError("deleted index " + std::to_string(i) + " out of range");
    }
    b.deleted_nll_sum += root_nlls[i];
  }
  b.avgppl = std::exp((b.kept_nll_sum + b.deleted_nll_sum) /
                      static_cast<double>(root_len));
  return b;
}

ScoreBreakdown AvgPpl(const TokenList& node_tokens,
                      std::span<const RootIndex> deleted_root_indices,
                      std::span<const double> root_nlls,
                      const TokenScorer& scorer, ScoreCache* cache) {
  const NllVector nlls = ScoreWithCache(node_tokens, scorer, cache);
  return AvgPplFromNlls(nlls, deleted_root_indices, root_nlls);
}

FixtureScorer::FixtureScorer(Table table) : table_(std::move(table)) {
  for (const auto& [tokens, nlls] : table_) {
    if (tokens.size() != nlls.size()) {
      throw InputError("fixture entry '" + Join(tokens) + "' has " +
                       std::to_string(nlls.size()) + " NLLs for " +
                       std::to_string(tokens.size()) + " tokens");
    }
  }
}

NllVector FixtureScorer::Score(const TokenList& tokens) const {
  auto it = table_.find(tokens);
  if (it == table_.end()) {
    throw ScorerError("fixture has no entry for sequence", tokens);
  }
  return it->second;
}

FixtureScorer FixtureScorer::FromJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open fixture file " + path);
  json doc;
  try {
    doc = json::parse(in);
    Table table;
    for (const json& e : doc.at("entries")) {
      table.emplace(e.at("tokens").get<TokenList>(), e.at("nll").get<NllVector>());
    }
    return FixtureScorer(std::move(table));
  } catch (const json::exception& e) {
    throw InputError("malformed fixture file " + path + ": " + e.what());
  }
}

BigramScorer::BigramScorer(Unigram unigram, Bonus bonus,
                           std::optional<double> oov_nll)
    : unigram_(std::move(unigram)), bonus_(std::move(bonus)), oov_nll_(oov_nll) {
  for (const auto& [tok, v] : unigram_) {
    if (!std::isfinite(v)) throw InputError("non-finite unigram NLL for '" + tok + "'");
  }
  for (const auto& [pair, v] : bonus_) {
    if (!std::isfinite(v)) {
      throw InputError("non-finite bigram delta for '" + pair.first + " " +
                       pair.second + "'");
    }
  }
  if (oov_nll_ && !std::isfinite(*oov_nll_)) throw InputError("non-finite oov NLL");
}

NllVector BigramScorer::Score(const TokenList& tokens) const {
  NllVector out;
  out.reserve(tokens.size());
  Token prev = kBoundary;
  for (const Token& t : tokens) {
    double v;
    auto it = unigram_.find(t);
    if (it != unigram_.end()) {
      v = it->second;
    } else if (oov_nll_) {
      v = *oov_nll_;
    } else {
      throw ScorerError("token '" + t + "' missing from unigram table", tokens);
    }
    if (!bonus_.empty()) {
      auto b = bonus_.find({prev, t});
      if (b != bonus_.end()) v += b->second;
    }
    out.push_back(v);
    prev = t;
  }
  // The closing transition is charged to the last token.
  if (!out.empty() && !bonus_.empty()) {
    auto b = bonus_.find({prev, kEnd});
    if (b != bonus_.end()) out.back() += b->second;
  }
  for (double& v : out) v = std::max(0.0, v);
  return out;
}

BigramScorer BigramScorer::FromJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open bigram table " + path);
  try {
    json doc = json::parse(in);
    Unigram unigram = doc.at("unigram").get<Unigram>();
    Bonus bonus;
    if (doc.contains("bigram")) {
      for (const json& row : doc.at("bigram")) {
        bonus[{row.at(0).get<Token>(), row.at(1).get<Token>()}] =
            row.at(2).get<double>();
      }
    }
    std::optional<double> oov;
    if (doc.contains("oov_nll")) oov = doc.at("oov_nll").get<double>();
    return BigramScorer(std::move(unigram), std::move(bonus), oov);
  } catch (const json::exception& e) {
    throw InputError("malformed bigram table " + path + ": " + e.what());
  }
}

}  // namespace deleter
