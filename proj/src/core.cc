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

#include "deleter/core.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <utility>

namespace deleter {
namespace {

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }
bool IsPunct(char c) { return std::ispunct(static_cast<unsigned char>(c)); }

bool InUnitInterval(double x) { return std::isfinite(x) && x > 0.0 && x <= 1.0; }

}  // namespace

RootSentence::RootSentence(TokenList tokens, std::string id)
    : tokens_(std::move(tokens)), id_(std::move(id)) {
  if (tokens_.empty()) throw InputError("root sentence has no tokens");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const Token& t = tokens_[i];
    if (t.empty()) {
      throw InputError("token " + std::to_string(i) + " is empty");
    }
    if (std::any_of(t.begin(), t.end(), IsSpace)) {
      throw InputError("token " + std::to_string(i) + " contains whitespace: '" +
                       t + "'");
    }
  }
}

TokenList PathNode::Tokens(const RootSentence& root) const {
  TokenList out;
  out.reserve(kept.size());
  for (RootIndex i : kept) out.push_back(root[i]);
  return out;
}

IndexList PathNode::Deleted(std::size_t root_len) const {
  IndexList out;
  out.reserve(root_len - kept.size());
  auto it = kept.begin();
  for (RootIndex i = 0; i < root_len; ++i) {
    if (it != kept.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<const PathNode*> DeletionPath::Nodes() const {
  std::vector<const PathNode*> out;
  out.reserve(steps.size() + 1);
  out.push_back(&root_node);
  for (const DeletionStep& s : steps) out.push_back(&s.result);
  return out;
}

std::string_view ToString(Termination t) {
  switch (t) {
    case Termination::kThresholdExhausted: return "ThresholdExhausted";
    case Termination::kTokenFloor: return "TokenFloor";
    case Termination::kCrBound: return "CrBound";
    case Termination::kStepLimit: return "StepLimit";
    case Termination::kExhausted: return "Exhausted";
    case Termination::kScorerError: return "ScorerError";
  }
  return "?";
}

std::string_view ToString(PenaltyMode m) {
  switch (m) {
    case PenaltyMode::kSpanLength: return "span-length";
    case PenaltyMode::kCurrentLength: return "current-length";
    case PenaltyMode::kOff: return "off";
  }
  return "?";
}

std::string_view ToString(TerminationMode m) {
  switch (m) {
    case TerminationMode::kTerminate: return "terminate";
    case TerminationMode::kFullPath: return "full-path";
  }
  return "?";
}

PenaltyMode ParsePenaltyMode(std::string_view s) {
  if (s == "span-length" || s == "span") return PenaltyMode::kSpanLength;
  if (s == "current-length" || s == "current") return PenaltyMode::kCurrentLength;
  if (s == "off") return PenaltyMode::kOff;
  throw ConfigError("unknown penalty mode '" + std::string(s) + "'");
}

TerminationMode ParseTerminationMode(std::string_view s) {
  if (s == "terminate") return TerminationMode::kTerminate;
  if (s == "full-path") return TerminationMode::kFullPath;
  throw ConfigError("unknown termination mode '" + std::string(s) + "'");
}

void SearchConfig::Validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ConfigError("alpha must be finite and >= 0");
  }
  if (!std::isfinite(beta) || beta < 0.0) {
    throw ConfigError("beta must be finite and >= 0");
  }
  if (max_lookahead < 1) throw ConfigError("max lookahead must be >= 1");
  if (min_tokens < 1) throw ConfigError("min tokens must be >= 1");
  if (min_cr && !InUnitInterval(*min_cr)) {
    throw ConfigError("min_cr must lie in (0, 1]");
  }
  if (max_cr && !InUnitInterval(*max_cr)) {
    throw ConfigError("max_cr must lie in (0, 1]");
  }
  if (min_cr && max_cr && *min_cr > *max_cr) {
    throw ConfigError("min_cr must not exceed max_cr");
  }
}

ResolvedRoot MakeRoot(TokenList tokens, const FreezeSpec& freeze, std::string id,
                      bool strict) {
  ResolvedRoot out{RootSentence(std::move(tokens), std::move(id)), {}, {}};
  const RootSentence& root = out.root;
  for (RootIndex i : freeze.indices) {
    if (i >= root.size()) {
      throw InputError("frozen index " + std::to_string(i) +
                       " out of range for " + std::to_string(root.size()) +
                       "-token sentence");
    }
    out.frozen.insert(i);
  }
  for (const std::string& text : freeze.texts) {
    bool found = false;
    for (RootIndex i = 0; i < root.size(); ++i) {
      if (root[i] == text) {
        out.frozen.insert(i);
        found = true;
      }
    }
    if (!found) {
      std::string msg = "frozen token '" + text + "' not present in sentence";
      if (strict) throw InputError(msg);
      out.warnings.push_back(std::move(msg));
    }
  }
  return out;
}

TokenList Tokenize(std::string_view text, const TokenizeOptions& opts) {
  TokenList out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    if (j > i) {
      std::string word(text.substr(i, j - i));
      if (opts.lowercase) {
        for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      if (!opts.split_punct) {
        out.push_back(std::move(word));
      } else {
        std::size_t b = 0;
        std::size_t e = word.size();
        while (b < e && IsPunct(word[b])) ++b;
        while (e > b && IsPunct(word[e - 1])) --e;
        for (std::size_t k = 0; k < b; ++k) out.emplace_back(1, word[k]);
        if (e > b) out.push_back(word.substr(b, e - b));
        for (std::size_t k = std::max(b, e); k < word.size(); ++k) {
          out.emplace_back(1, word[k]);
        }
      }
    }
    i = j;
  }
  return out;
}

std::string Join(const TokenList& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace deleter
