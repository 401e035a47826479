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

// Dataset ingestion and automatic evaluation of compressions.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deleter/core.h"
#include "json.hpp"

namespace deleter {

// A malformed dataset record. line is 1-based (0 when unknown).
class DataError : public DeleterError {
 public:
  DataError(const std::string& what, std::size_t line)
      : DeleterError(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CompressionPair {
  std::string id;
  TokenList source_tokens;
  std::vector<TokenList> reference_tokens;
};

// Multiset token F1. 0 when system is empty or nothing overlaps.
double TokenF1(const TokenList& system, const TokenList& reference);

// F1 over source positions. Both lists are aligned to source as leftmost
// subsequences; returns nullopt when either is not a subsequence.
std::optional<double> PositionalF1(const TokenList& system,
                                   const TokenList& reference,
                                   const TokenList& source);

// Leftmost-match alignment of tokens as a subsequence of source.
std::optional<IndexList> AlignSubsequence(const TokenList& tokens,
                                          const TokenList& source);

double CompressionRatio(const TokenList& system, const TokenList& source);

enum class F1Mode { kMultiset, kPositional };

struct ExampleScore {
  std::string id;
  std::vector<double> f1;  // one per reference
  std::size_t system_len = 0;
  std::size_t source_len = 0;
};

struct EvalReport {
  std::vector<ExampleScore> per_example;
  // Macro average per reference slot. Examples lacking slot r are skipped.
  std::vector<double> f1;
  // F1 from token counts pooled over examples, per reference slot.
  std::vector<double> f1_micro;
  // Micro average: total system tokens / total source tokens.
  double cr = 0.0;
  std::size_t n = 0;

  nlohmann::json ToJson() const;
  std::string ToTable() const;
};

// Scores predictions (keyed by id) against pairs. Every pair needs a
// prediction; throws DataError naming the first missing id.
EvalReport Evaluate(const std::vector<CompressionPair>& pairs,
                    const std::map<std::string, TokenList>& predictions,
                    F1Mode mode = F1Mode::kMultiset);

struct LoadOptions {
  TokenizeOptions tokenize;
  // Skip malformed lines instead of failing; errors are collected.
  bool lenient = false;
  std::optional<std::size_t> first_n;
};

struct LoadResult {
  std::vector<CompressionPair> pairs;
  std::vector<DataError> errors;
};

// One JSON object per line:
//   {"id": str, "source": str | [tok...], "references": [str | [tok...], ...]}
// Strings are tokenized per options; token lists are taken verbatim.
LoadResult LoadJsonl(const std::string& path, const LoadOptions& opts = {});
LoadResult ParseJsonl(std::istream& in, const LoadOptions& opts = {});

// The published sentence-compression release: a stream of JSON objects with
// graph.sentence and compression.text. Syntactic fields are ignored. Text is
// tokenized with punctuation split off and lowercased by default.
std::vector<CompressionPair> LoadGoogleDataset(const std::string& path,
                                               std::optional<std::size_t> first_n,
                                               TokenizeOptions tokenize = {
                                                   .lowercase = true,
                                                   .split_punct = true});
std::vector<CompressionPair> ParseGoogleDataset(std::istream& in,
                                                std::optional<std::size_t> first_n,
                                                TokenizeOptions tokenize = {
                                                    .lowercase = true,
                                                    .split_punct = true});

}  // namespace deleter
