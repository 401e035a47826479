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

#include "deleter/cli.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "deleter/eval.h"
#include "deleter/lm_client.h"
#include "deleter/scoring.h"
#include "deleter/search.h"

namespace deleter {
namespace {

using json = nlohmann::json;

// Bad flags or flag combinations; maps to exit code 2.
class UsageError : public DeleterError {
 public:
  using DeleterError::DeleterError;
};

struct ScorerOptions {
  std::string url;
  std::string fixture;
  std::string bigram;
  int timeout_ms = 30000;
  std::size_t max_batch = 64;
  std::size_t attempts = 3;
  std::string expect_agg = "joint-mask-sum";
};

struct SearchOptions {
  double alpha = 0.04;
  double beta = 0.04;
  std::size_t max_lookahead = 3;
  std::string penalty = "span-length";
  std::string mode = "terminate";
  std::vector<std::string> freeze;
  std::vector<std::size_t> freeze_index;
  bool strict_freeze = false;
  std::optional<double> min_cr;
  std::optional<double> max_cr;
  std::size_t min_tokens = 1;
  std::optional<std::size_t> step_limit;
  std::size_t workers = 1;
  bool no_lowercase = false;
};

struct ScorerHandle {
  std::unique_ptr<TokenScorer> scorer;
  json echo;
  std::optional<ServerInfo> server;
};

struct InputSentence {
  std::string id;
  TokenList tokens;
};

void AddScorerOptions(CLI::App* app, ScorerOptions& o) {
  app->add_option("--scorer-url", o.url,
                  std::string("Masked-LM scoring server (default: $") +
                      kScorerUrlEnv + ")");
  app->add_option("--fixture", o.fixture, "JSON table of exact sentence scores");
  app->add_option("--bigram", o.bigram, "JSON unigram/bigram scorer table");
  app->add_option("--timeout-ms", o.timeout_ms, "Per-request timeout")->capture_default_str();
  app->add_option("--max-batch", o.max_batch, "Sentences per scoring request")
      ->capture_default_str();
  app->add_option("--attempts", o.attempts, "Attempts per scoring request")
      ->capture_default_str();
  app->add_option("--expect-agg", o.expect_agg,
                  "Wordpiece aggregation mode the server must advertise")
      ->capture_default_str();
}

void AddSearchOptions(CLI::App* app, SearchOptions& o) {
  app->add_option("--alpha", o.alpha, "Threshold slope")->capture_default_str();
  app->add_option("--beta", o.beta, "Gradualness penalty exponent")->capture_default_str();
  app->add_option("--max-lookahead", o.max_lookahead, "Longest span deleted in one step")
      ->capture_default_str();
  app->add_option("--penalty", o.penalty, "span-length | current-length | off")
      ->capture_default_str();
  app->add_option("--mode", o.mode, "terminate | full-path")->capture_default_str();
  app->add_option("--freeze", o.freeze, "Token text that must never be deleted");
  app->add_option("--freeze-index", o.freeze_index, "Token position that must never be deleted");
  app->add_flag("--strict-freeze", o.strict_freeze,
                "Fail when a --freeze token is absent from a sentence");
  app->add_option("--min-cr", o.min_cr, "Minimum compression ratio");
  app->add_option("--max-cr", o.max_cr, "Maximum compression ratio of the output");
  app->add_option("--min-tokens", o.min_tokens, "Token floor")->capture_default_str();
  app->add_option("--step-limit", o.step_limit, "Maximum deletion steps");
  app->add_option("--workers", o.workers, "Parallel workers")->capture_default_str();
  app->add_flag("--no-lowercase", o.no_lowercase, "Keep input case");
}

SearchConfig BuildSearchConfig(const SearchOptions& o) {
  SearchConfig c;
  c.alpha = o.alpha;
  c.beta = o.beta;
  c.max_lookahead = o.max_lookahead;
  c.min_cr = o.min_cr;
  c.max_cr = o.max_cr;
  c.min_tokens = o.min_tokens;
  c.step_limit = o.step_limit;
  try {
    c.penalty_mode = ParsePenaltyMode(o.penalty);
    c.termination_mode = ParseTerminationMode(o.mode);
    c.Validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return c;
}

FreezeSpec BuildFreeze(const SearchOptions& o) {
  FreezeSpec f;
  TokenizeOptions tok{.lowercase = !o.no_lowercase};
  for (const std::string& text : o.freeze) {
    for (Token& t : Tokenize(text, tok)) f.texts.insert(std::move(t));
  }
  f.indices.insert(o.freeze_index.begin(), o.freeze_index.end());
  return f;
}

json RunConfigEcho(const SearchConfig& config, const SearchOptions& o,
                   const json& scorer_echo) {
  json echo = SearchConfigToJson(config);
  echo["freeze"] = o.freeze;
  echo["freeze_index"] = o.freeze_index;
  echo["strict_freeze"] = o.strict_freeze;
  echo["lowercase"] = !o.no_lowercase;
  echo["scorer"] = scorer_echo;
  return echo;
}

ScorerHandle BuildScorer(const ScorerOptions& o) {
  std::string url = o.url;
  const int chosen = !o.url.empty() + !o.fixture.empty() + !o.bigram.empty();
  if (chosen > 1) {
    throw UsageError("choose exactly one of --scorer-url, --fixture, --bigram");
  }
  if (chosen == 0) {
    if (const char* env = std::getenv(kScorerUrlEnv); env && *env) url = env;
  }
  ScorerHandle h;
  if (!o.fixture.empty()) {
    h.scorer = std::make_unique<FixtureScorer>(FixtureScorer::FromJsonFile(o.fixture));
    h.echo = {{"kind", "fixture"}, {"source", o.fixture}};
  } else if (!o.bigram.empty()) {
    h.scorer = std::make_unique<BigramScorer>(BigramScorer::FromJsonFile(o.bigram));
    h.echo = {{"kind", "bigram"}, {"source", o.bigram}};
  } else if (!url.empty()) {
    ScorerEndpoint ep;
    ep.base_url = url;
    ep.timeout = std::chrono::milliseconds(o.timeout_ms);
    ep.max_batch = o.max_batch;
    ep.retry.max_attempts = o.attempts;
    try {
      ep.Validate();
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    h.server = Healthcheck(ep);
    h.scorer = std::make_unique<RemoteScorer>(ep);
    h.echo = {{"kind", "remote"},
              {"url", url},
              {"model", h.server->model},
              {"agg", h.server->agg},
              {"version", h.server->version}};
  } else {
    throw UsageError(std::string("no scorer: pass --scorer-url, --fixture or --bigram, "
                                 "or set ") +
                     kScorerUrlEnv);
  }
  return h;
}

template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

std::vector<InputSentence> ReadInputs(const std::string& text, const std::string& path,
                                      const TokenizeOptions& tok) {
  std::vector<InputSentence> out;
  if (!text.empty()) {
    out.push_back({"0", Tokenize(text, tok)});
    return out;
  }
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] != '{') {
      out.push_back({std::to_string(out.size()), Tokenize(line, tok)});
      continue;
    }
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(e.what(), lineno);
    }
    InputSentence s;
    s.id = doc.contains("id") ? (doc["id"].is_string() ? doc["id"].get<std::string>()
                                                       : doc["id"].dump())
                              : std::to_string(out.size());
    const json* src = nullptr;
    for (const char* key : {"tokens", "text", "source"}) {
      if (doc.contains(key)) {
        src = &doc[key];
        break;
      }
    }
    if (!src) throw DataError("record needs \"tokens\", \"text\" or \"source\"", lineno);
    if (src->is_string()) {
      s.tokens = Tokenize(src->get<std::string>(), tok);
    } else {
      try {
        s.tokens = src->get<TokenList>();
      } catch (const json::exception&) {
        throw DataError("token list must hold strings", lineno);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct CompressOutcome {
  std::optional<DeletionPath> path;
  IndexSet frozen;
  std::vector<std::string> warnings;
  std::string error;
};

CompressOutcome CompressOne(const InputSentence& input, const SearchConfig& base,
                            const FreezeSpec& freeze, bool strict,
                            const TokenScorer& scorer, ScoreCache* cache,
                            std::size_t inner_workers) {
  CompressOutcome out;
  try {
    ResolvedRoot resolved = MakeRoot(input.tokens, freeze, input.id, strict);
    SearchConfig cfg = base;
    cfg.frozen_root_indices = resolved.frozen;
    out.frozen = resolved.frozen;
    out.warnings = std::move(resolved.warnings);
    out.path = Compress(resolved.root, cfg, scorer, cache, inner_workers);
    if (out.path->error) out.error = *out.path->error;
  } catch (const DeleterError& e) {
    out.error = e.what();
  }
  return out;
}

json OutcomeToJson(const InputSentence& input, const CompressOutcome& o,
                   const json& config) {
  json rec;
  if (o.path) {
    rec = PathToJson(*o.path, o.frozen, config);
  } else {
    rec["id"] = input.id;
    rec["config"] = config;
    rec["root"] = input.tokens;
  }
  if (!o.warnings.empty()) rec["warnings"] = o.warnings;
  if (!o.error.empty()) rec["error"] = o.error;
  return rec;
}

std::string FormatDouble(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::ostream& OpenOutput(const std::string& path, std::ofstream& file, std::ostream& out) {
  if (path.empty() || path == "-") return out;
  file.open(path);
  if (!file) throw UsageError("cannot write " + path);
  return file;
}

int CmdCompress(const std::string& text, const std::string& input,
                const std::string& output, const std::string& format,
                const SearchOptions& so, const ScorerOptions& sc, std::ostream& out,
                std::ostream& err) {
  if (text.empty() == input.empty()) {
    throw UsageError("compress needs exactly one of --text or --input");
  }
  if (format != "jsonl" && format != "table") {
    throw UsageError("--format must be jsonl or table");
  }
  const SearchConfig config = BuildSearchConfig(so);
  const FreezeSpec freeze = BuildFreeze(so);
  const TokenizeOptions tok{.lowercase = !so.no_lowercase};
  const std::vector<InputSentence> inputs = ReadInputs(text, input, tok);
  if (!text.empty() && inputs.front().tokens.empty()) {
    throw UsageError("--text has no tokens");
  }

  ScorerHandle scorer = BuildScorer(sc);
  if (scorer.server && scorer.server->agg != sc.expect_agg) {
    err << "warning: scorer advertises aggregation '" << scorer.server->agg
        << "', expected '" << sc.expect_agg << "'\n";
  }
  const json echo = RunConfigEcho(config, so, scorer.echo);

  ScoreCache cache;
  std::vector<CompressOutcome> outcomes(inputs.size());
  const std::size_t inner = inputs.size() == 1 ? so.workers : 1;
  ParallelFor(inputs.size(), so.workers, [&](std::size_t i) {
    outcomes[i] = CompressOne(inputs[i], config, freeze, so.strict_freeze,
                              *scorer.scorer, &cache, inner);
  });

  std::ofstream file;
  std::ostream& os = OpenOutput(output, file, out);
  bool failed = false;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const CompressOutcome& o = outcomes[i];
    for (const std::string& w : o.warnings) {
      err << "warning: " << inputs[i].id << ": " << w << "\n";
    }
    if (!o.error.empty()) {
      failed = true;
      err << "error: " << inputs[i].id << ": " << o.error << "\n";
    }
    if (format == "jsonl") {
      os << OutcomeToJson(inputs[i], o, echo).dump() << "\n";
    } else if (o.path) {
      if (config.termination_mode == TerminationMode::kFullPath) {
        os << PathToTable(*o.path);
        if (i + 1 < inputs.size()) os << "\n";
      } else {
        os << Join(o.path->Final().Tokens(o.path->root)) << "\n";
      }
    }
  }
  return failed ? kExitFailure : kExitOk;
}

int CmdScore(const std::string& text, bool as_json, bool no_lowercase,
             const ScorerOptions& sc, std::ostream& out) {
  const TokenList tokens = Tokenize(text, {.lowercase = !no_lowercase});
  if (tokens.empty()) throw UsageError("score needs a non-empty --text");
  ScorerHandle scorer = BuildScorer(sc);
  const RootSentence root(tokens);
  const NllVector nlls = ScoreWithCache(root.tokens(), *scorer.scorer, nullptr);
  const ScoreBreakdown b = AvgPplFromNlls(nlls, {}, nlls);
  if (as_json) {
    out << json{{"tokens", tokens}, {"nll", nlls}, {"avgppl", b.avgppl}}.dump() << "\n";
    return kExitOk;
  }
  std::size_t width = 6;
  for (const Token& t : tokens) width = std::max(width, t.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out << tokens[i] << std::string(width - tokens[i].size() + 2, ' ')
        << FormatDouble(nlls[i], 4) << "\n";
  }
  out << "avgppl" << std::string(width - 6 + 2, ' ')
      << FormatDouble(b.avgppl, 4) << "\n";
  return kExitOk;
}

std::map<std::string, TokenList> ReadPredictions(const std::string& path,
                                                 const TokenizeOptions& tok) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open predictions file " + path);
  std::map<std::string, TokenList> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json doc = json::parse(line);
      const json& id = doc.at("id");
      const std::string key = id.is_string() ? id.get<std::string>() : id.dump();
      TokenList tokens;
      if (doc.contains("final")) {
        tokens = doc["final"].get<TokenList>();
      } else if (doc.contains("tokens")) {
        tokens = doc["tokens"].get<TokenList>();
      } else {
        tokens = Tokenize(doc.at("text").get<std::string>(), tok);
      }
      if (!out.emplace(key, std::move(tokens)).second) {
        throw DataError("duplicate prediction id '" + key + "'", lineno);
      }
    } catch (const json::exception& e) {
      throw DataError(e.what(), lineno);
    }
  }
  return out;
}

struct EvalArgs {
  std::string predictions;
  std::string references;
  std::string dataset;
  bool google = false;
  std::optional<std::size_t> first_n;
  bool positional = false;
  std::string format = "json";
  std::string predictions_out;
};

int CmdEval(const EvalArgs& a, const SearchOptions& so, const ScorerOptions& sc,
            std::ostream& out, std::ostream& err) {
  const bool offline = !a.predictions.empty() || !a.references.empty();
  if (offline == !a.dataset.empty()) {
    throw UsageError("eval needs --predictions with --references, or --dataset with a scorer");
  }
  if (offline && (a.predictions.empty() || a.references.empty())) {
    throw UsageError("--predictions and --references go together");
  }
  if (a.format != "json" && a.format != "table") {
    throw UsageError("--format must be json or table");
  }
  const TokenizeOptions tok{.lowercase = !so.no_lowercase};
  const std::string& ref_path = offline ? a.references : a.dataset;
  std::vector<CompressionPair> pairs;
  if (a.google) {
    pairs = LoadGoogleDataset(ref_path, a.first_n,
                              {.lowercase = !so.no_lowercase, .split_punct = true});
  } else {
    pairs = LoadJsonl(ref_path, {.tokenize = tok, .first_n = a.first_n}).pairs;
  }

  std::map<std::string, TokenList> predictions;
  bool failed = false;
  if (offline) {
    predictions = ReadPredictions(a.predictions, tok);
    std::set<std::string> ref_ids;
    for (const CompressionPair& p : pairs) ref_ids.insert(p.id);
    for (const auto& [id, _] : predictions) {
      if (!ref_ids.count(id)) {
        throw DataError("prediction id '" + id + "' has no reference", 0);
      }
    }
  } else {
    SearchOptions terminate = so;
    terminate.mode = "terminate";
    const SearchConfig config = BuildSearchConfig(terminate);
    const FreezeSpec freeze = BuildFreeze(so);
    ScorerHandle scorer = BuildScorer(sc);
    if (scorer.server && scorer.server->agg != sc.expect_agg) {
      throw UsageError("scorer advertises aggregation '" + scorer.server->agg +
                       "' but '" + sc.expect_agg +
                       "' is expected; refusing to evaluate (see --expect-agg)");
    }
    const json echo = RunConfigEcho(config, terminate, scorer.echo);
    std::vector<InputSentence> inputs;
    for (const CompressionPair& p : pairs) inputs.push_back({p.id, p.source_tokens});
    ScoreCache cache;
    std::vector<CompressOutcome> outcomes(inputs.size());
    ParallelFor(inputs.size(), so.workers, [&](std::size_t i) {
      outcomes[i] = CompressOne(inputs[i], config, freeze, so.strict_freeze,
                                *scorer.scorer, &cache, 1);
    });
    std::ofstream saved;
    if (!a.predictions_out.empty()) {
      saved.open(a.predictions_out);
      if (!saved) throw UsageError("cannot write " + a.predictions_out);
    }
    std::vector<CompressionPair> kept;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const CompressOutcome& o = outcomes[i];
      if (saved) saved << OutcomeToJson(inputs[i], o, echo).dump() << "\n";
      if (!o.error.empty() || !o.path) {
        failed = true;
        err << "error: " << inputs[i].id << ": " << o.error << "\n";
        continue;
      }
      predictions[inputs[i].id] = o.path->Final().Tokens(o.path->root);
      kept.push_back(pairs[i]);
    }
    pairs = std::move(kept);
  }

  const EvalReport report =
      Evaluate(pairs, predictions, a.positional ? F1Mode::kPositional : F1Mode::kMultiset);
  if (a.format == "json") {
    out << report.ToJson().dump() << "\n";
  } else {
    out << report.ToTable();
  }
  return failed ? kExitFailure : kExitOk;
}

int CmdHealth(const ScorerOptions& sc, std::ostream& out) {
  if (!sc.fixture.empty() || !sc.bigram.empty()) {
    throw UsageError("health only applies to a remote scorer");
  }
  ScorerHandle h = BuildScorer(sc);
  out << json{{"model", h.server->model}, {"agg", h.server->agg},
              {"version", h.server->version}}
             .dump()
      << "\n";
  return kExitOk;
}

}  // namespace

json SearchConfigToJson(const SearchConfig& c) {
  json j;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["max_lookahead"] = c.max_lookahead;
  j["penalty_mode"] = ToString(c.penalty_mode);
  j["termination_mode"] = ToString(c.termination_mode);
  j["min_cr"] = c.min_cr ? json(*c.min_cr) : json(nullptr);
  j["max_cr"] = c.max_cr ? json(*c.max_cr) : json(nullptr);
  j["min_tokens"] = c.min_tokens;
  j["step_limit"] = c.step_limit ? json(*c.step_limit) : json(nullptr);
  j["log"] = "natural";
  return j;
}

json PathToJson(const DeletionPath& path, const IndexSet& frozen, const json& config) {
  json rec;
  rec["id"] = path.root.id();
  rec["config"] = config;
  rec["root"] = path.root.tokens();
  rec["root_nll"] = path.root_nlls;
  rec["frozen"] = frozen;
  rec["threshold"] = config.contains("alpha")
                         ? json(Threshold(config["alpha"].get<double>(), path.root.size()))
                         : json(nullptr);
  json nodes = json::array();
  auto node_json = [&](const PathNode& n) {
    return json{{"tokens", n.Tokens(path.root)},
                {"kept", n.kept},
                {"avgppl", n.score.avgppl},
                {"kept_nll_sum", n.score.kept_nll_sum},
                {"deleted_nll_sum", n.score.deleted_nll_sum}};
  };
  json root = node_json(path.root_node);
  root["deleted"] = json::array();
  root["deleted_tokens"] = json::array();
  root["lookahead"] = 0;
  nodes.push_back(std::move(root));
  for (const DeletionStep& s : path.steps) {
    json n = node_json(s.result);
    TokenList removed;
    for (RootIndex i : s.removed_root_indices) removed.push_back(path.root[i]);
    n["deleted"] = s.removed_root_indices;
    n["deleted_tokens"] = removed;
    n["lookahead"] = s.lookahead_used;
    n["penalized"] = s.penalized_score;
    n["passed_threshold"] = s.passed_threshold;
    nodes.push_back(std::move(n));
  }
  rec["path"] = std::move(nodes);
  rec["final"] = path.Final().Tokens(path.root);
  rec["final_index"] = path.final_index;
  rec["final_flagged"] = path.final_flagged;
  rec["terminated_by"] = ToString(path.terminated_by);
  if (path.error) rec["error"] = *path.error;
  return rec;
}

std::string PathToTable(const DeletionPath& path) {
  std::vector<std::array<std::string, 3>> rows;
  rows.push_back({"Sentence", "Deleted Tokens", "AvgPPL"});
  rows.push_back({Join(path.root.tokens()), "-",
                  FormatDouble(path.root_node.score.avgppl, 2)});
  for (const DeletionStep& s : path.steps) {
    TokenList removed;
    for (RootIndex i : s.removed_root_indices) removed.push_back(path.root[i]);
    rows.push_back({Join(s.result.Tokens(path.root)), Join(removed),
                    FormatDouble(s.result.score.avgppl, 2)});
  }
  std::array<std::size_t, 3> width{};
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 3; ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << r[0] << std::string(width[0] - r[0].size(), ' ') << " | " << r[1]
       << std::string(width[1] - r[1].size(), ' ') << " | " << r[2] << "\n";
    if (i == 0) {
      os << std::string(width[0], '-') << "-+-" << std::string(width[1], '-') << "-+-"
         << std::string(width[2], '-') << "\n";
    }
  }
  return os.str();
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised sentence compression by greedy deletion search", "deleter"};
  app.require_subcommand(1);

  ScorerOptions sc;
  SearchOptions so;

  std::string text;
  std::string input;
  std::string output;
  std::string format = "jsonl";
  CLI::App* compress = app.add_subcommand("compress", "Find deletion paths");
  compress->add_option("--text", text, "Sentence to compress");
  compress->add_option("--input", input, "File of sentences (plain lines or JSONL)");
  compress->add_option("--output", output, "Write results here instead of stdout");
  compress->add_option("--format", format, "jsonl | table")->capture_default_str();
  AddSearchOptions(compress, so);
  AddScorerOptions(compress, sc);

  std::string score_text;
  bool score_json = false;
  bool score_no_lowercase = false;
  CLI::App* score = app.add_subcommand("score", "Print per-token NLLs and AvgPPL");
  score->add_option("--text", score_text, "Sentence to score");
  score->add_flag("--json", score_json, "Machine-readable output");
  score->add_flag("--no-lowercase", score_no_lowercase, "Keep input case");
  AddScorerOptions(score, sc);

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "Token F1 and compression ratio");
  eval->add_option("--predictions", ea.predictions, "JSONL predictions (or compress output)");
  eval->add_option("--references", ea.references, "Reference dataset");
  eval->add_option("--dataset", ea.dataset, "Dataset to compress end to end");
  eval->add_flag("--google", ea.google, "Dataset is in the Google compression release format");
  eval->add_option("--first-n", ea.first_n, "Only the first N records");
  eval->add_flag("--positional", ea.positional, "Position-aligned F1 instead of multiset F1");
  eval->add_option("--format", ea.format, "json | table")->capture_default_str();
  eval->add_option("--predictions-out", ea.predictions_out,
                   "Save end-to-end compress records here");
  AddSearchOptions(eval, so);
  AddScorerOptions(eval, sc);

  CLI::App* health = app.add_subcommand("health", "Query a scoring server");
  AddScorerOptions(health, sc);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*compress) return CmdCompress(text, input, output, format, so, sc, out, err);
    if (*score) return CmdScore(score_text, score_json, score_no_lowercase, sc, out);
    if (*eval) return CmdEval(ea, so, sc, out, err);
    if (*health) return CmdHealth(sc, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace deleter
