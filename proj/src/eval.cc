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

#include "deleter/eval.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace deleter {
namespace {

using json = nlohmann::json;

double HarmonicF1(std::size_t overlap, std::size_t system_len,
                  std::size_t reference_len) {
  if (overlap == 0 || system_len == 0 || reference_len == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(system_len);
  const double r = static_cast<double>(overlap) / static_cast<double>(reference_len);
  return 2.0 * p * r / (p + r);
}

TokenList TokensFromJson(const json& v, const TokenizeOptions& tok,
                         const char* field) {
  if (v.is_string()) return Tokenize(v.get<std::string>(), tok);
  if (v.is_array()) {
    TokenList out;
    for (const json& t : v) {
      if (!t.is_string()) {
        throw std::invalid_argument(std::string("\"") + field +
                                    "\" list holds a non-string token");
      }
      out.push_back(t.get<std::string>());
    }
    return out;
  }
  throw std::invalid_argument(std::string("\"") + field +
                              "\" must be a string or a list of tokens");
}

CompressionPair ParsePairLine(const std::string& line, const TokenizeOptions& tok) {
  const json doc = json::parse(line);
  if (!doc.is_object()) throw std::invalid_argument("record is not a JSON object");
  for (const char* field : {"id", "source", "references"}) {
    if (!doc.contains(field)) {
      throw std::invalid_argument(std::string("missing \"") + field + "\"");
    }
  }
  CompressionPair pair;
  const json& id = doc["id"];
  pair.id = id.is_string() ? id.get<std::string>() : id.dump();
  pair.source_tokens = TokensFromJson(doc["source"], tok, "source");
  if (pair.source_tokens.empty()) throw std::invalid_argument("empty source");
  if (!doc["references"].is_array() || doc["references"].empty()) {
    throw std::invalid_argument("\"references\" must be a non-empty list");
  }
  for (const json& ref : doc["references"]) {
    pair.reference_tokens.push_back(TokensFromJson(ref, tok, "references"));
    if (pair.reference_tokens.back().empty()) {
      throw std::invalid_argument("empty reference");
    }
  }
  return pair;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::size_t MultisetOverlap(const TokenList& system, const TokenList& reference) {
  std::unordered_map<std::string, std::size_t> ref_counts;
  for (const Token& t : reference) ++ref_counts[t];
  std::size_t overlap = 0;
  for (const Token& t : system) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return overlap;
}

}  // namespace

double TokenF1(const TokenList& system, const TokenList& reference) {
  return HarmonicF1(MultisetOverlap(system, reference), system.size(), reference.size());
}

std::optional<IndexList> AlignSubsequence(const TokenList& tokens,
                                          const TokenList& source) {
  IndexList out;
  out.reserve(tokens.size());
  std::size_t j = 0;
  for (const Token& t : tokens) {
    while (j < source.size() && source[j] != t) ++j;
    if (j == source.size()) return std::nullopt;
    out.push_back(j++);
  }
  return out;
}

namespace {

// Positions shared by the leftmost alignments, or nullopt when either list is
// not a subsequence of source.
std::optional<std::size_t> PositionalOverlap(const TokenList& system,
                                             const TokenList& reference,
                                             const TokenList& source) {
  const auto sys = AlignSubsequence(system, source);
  const auto ref = AlignSubsequence(reference, source);
  if (!sys || !ref) return std::nullopt;
  IndexList common;
  std::set_intersection(sys->begin(), sys->end(), ref->begin(), ref->end(),
                        std::back_inserter(common));
  return common.size();
}

}  // namespace

std::optional<double> PositionalF1(const TokenList& system,
                                   const TokenList& reference,
                                   const TokenList& source) {
  const auto overlap = PositionalOverlap(system, reference, source);
  if (!overlap) return std::nullopt;
  return HarmonicF1(*overlap, system.size(), reference.size());
}

double CompressionRatio(const TokenList& system, const TokenList& source) {
  return static_cast<double>(system.size()) / static_cast<double>(source.size());
}

EvalReport Evaluate(const std::vector<CompressionPair>& pairs,
                    const std::map<std::string, TokenList>& predictions,
                    F1Mode mode) {
  EvalReport report;
  std::size_t refs = 0;
  for (const CompressionPair& p : pairs) refs = std::max(refs, p.reference_tokens.size());
  std::vector<double> sums(refs, 0.0);
  std::vector<std::size_t> counts(refs, 0);
  // pooled overlap / system / reference token counts for the micro average
  std::vector<std::array<std::size_t, 3>> pooled(refs, {0, 0, 0});
  std::size_t sys_total = 0;
  std::size_t src_total = 0;

  for (const CompressionPair& p : pairs) {
    auto it = predictions.find(p.id);
    if (it == predictions.end()) throw DataError("no prediction for id '" + p.id + "'", 0);
    const TokenList& system = it->second;
    ExampleScore ex;
    ex.id = p.id;
    ex.system_len = system.size();
    ex.source_len = p.source_tokens.size();
    for (std::size_t r = 0; r < p.reference_tokens.size(); ++r) {
      const TokenList& ref = p.reference_tokens[r];
      std::size_t overlap;
      if (mode == F1Mode::kPositional) {
        auto po = PositionalOverlap(system, ref, p.source_tokens);
        if (!po) {
          throw DataError("id '" + p.id +
                              "': positional F1 needs system and reference to be "
                              "subsequences of the source",
                          0);
        }
        overlap = *po;
      } else {
        overlap = MultisetOverlap(system, ref);
      }
      const double f1 = HarmonicF1(overlap, system.size(), ref.size());
      pooled[r][0] += overlap;
      pooled[r][1] += system.size();
      pooled[r][2] += ref.size();
      ex.f1.push_back(f1);
      sums[r] += f1;
      ++counts[r];
    }
    sys_total += ex.system_len;
    src_total += ex.source_len;
    report.per_example.push_back(std::move(ex));
  }
  report.n = pairs.size();
  for (std::size_t r = 0; r < refs; ++r) {
    report.f1.push_back(counts[r] ? sums[r] / static_cast<double>(counts[r]) : 0.0);
    report.f1_micro.push_back(HarmonicF1(pooled[r][0], pooled[r][1], pooled[r][2]));
  }
  report.cr = src_total ? static_cast<double>(sys_total) / static_cast<double>(src_total)
                        : 0.0;
  return report;
}

json EvalReport::ToJson() const {
  json out;
  out["f1"] = json::object();
  out["f1_micro"] = json::object();
  for (std::size_t r = 0; r < f1.size(); ++r) {
    out["f1"]["ref_" + std::to_string(r)] = f1[r];
    out["f1_micro"]["ref_" + std::to_string(r)] = f1_micro[r];
  }
  out["cr"] = cr;
  out["n"] = n;
  out["per_example"] = json::array();
  for (const ExampleScore& ex : per_example) {
    out["per_example"].push_back({{"id", ex.id},
                                  {"f1", ex.f1},
                                  {"cr", ex.source_len ? static_cast<double>(ex.system_len) /
                                                             static_cast<double>(ex.source_len)
                                                       : 0.0},
                                  {"system_len", ex.system_len},
                                  {"source_len", ex.source_len}});
  }
  return out;
}

std::string EvalReport::ToTable() const {
  std::ostringstream os;
  os << "examples  " << n << "\n";
  for (std::size_t r = 0; r < f1.size(); ++r) {
    os << "F1 (#" << (r + 1) << ")    " << Fixed(100.0 * f1[r], 1) << "   micro "
       << Fixed(100.0 * f1_micro[r], 1) << "\n";
  }
  os << "CR        " << Fixed(cr, 2) << "\n";
  return os.str();
}

LoadResult ParseJsonl(std::istream& in, const LoadOptions& opts) {
  LoadResult out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (opts.first_n && out.pairs.size() >= *opts.first_n) break;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      CompressionPair pair = ParsePairLine(line, opts.tokenize);
      if (!seen.insert(pair.id).second) {
        throw std::invalid_argument("duplicate id '" + pair.id + "'");
      }
      out.pairs.push_back(std::move(pair));
    } catch (const std::exception& e) {
      DataError err(e.what(), lineno);
      if (!opts.lenient) throw err;
      out.errors.push_back(std::move(err));
    }
  }
  return out;
}

LoadResult LoadJsonl(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path, 0);
  return ParseJsonl(in, opts);
}

std::vector<CompressionPair> ParseGoogleDataset(std::istream& in,
                                                std::optional<std::size_t> first_n,
                                                TokenizeOptions tokenize) {
  std::vector<CompressionPair> out;
  std::size_t record = 0;
  while (!first_n || out.size() < *first_n) {
    in >> std::ws;
    if (in.peek() == std::char_traits<char>::eof()) break;
    ++record;
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw DataError("record " + std::to_string(record) + ": " + e.what(), 0);
    }
    auto require = [&](const json& obj, const char* path, const char* key) -> const json& {
      if (!obj.is_object() || !obj.contains(key)) {
        throw DataError("record " + std::to_string(record) + ": missing field \"" +
                            path + "\"",
                        0);
      }
      return obj[key];
    };
    const json& graph = require(doc, "graph", "graph");
    const json& sentence = require(graph, "graph.sentence", "sentence");
    const json& compression = require(doc, "compression", "compression");
    const json& text = require(compression, "compression.text", "text");
    if (!sentence.is_string() || !text.is_string()) {
      throw DataError("record " + std::to_string(record) +
                          ": graph.sentence and compression.text must be strings",
                      0);
    }
    CompressionPair pair;
    if (graph.contains("id") && graph["id"].is_string()) {
      pair.id = graph["id"].get<std::string>();
    } else {
      pair.id = std::to_string(record - 1);
    }
    pair.source_tokens = Tokenize(sentence.get<std::string>(), tokenize);
    pair.reference_tokens.push_back(Tokenize(text.get<std::string>(), tokenize));
    if (pair.source_tokens.empty() || pair.reference_tokens[0].empty()) {
      throw DataError("record " + std::to_string(record) + ": empty sentence", 0);
    }
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<CompressionPair> LoadGoogleDataset(const std::string& path,
                                               std::optional<std::size_t> first_n,
                                               TokenizeOptions tokenize) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path, 0);
  return ParseGoogleDataset(in, first_n, tokenize);
}

}  // namespace deleter
