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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "deleter/lm_client.h"
#include "deleter/scoring.h"
#include "doctest.h"
#include "json.hpp"
#include "testing/oracles.h"
#include "testing/stub_server.h"

using namespace deleter;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kBigram = DELETER_TEST_DATA "/toy_bigram.json";
const std::string kFixture = DELETER_TEST_DATA "/she_sings_fixture.json";
const std::string kToyPairs = DELETER_TEST_DATA "/toy_pairs.jsonl";
const std::string kAmerica = "i think america is still a fairly crowded country by the way .";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<json> Records(const std::string& jsonl) {
  std::vector<json> out;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("deleter_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string Write(const std::string& name, const std::string& content) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string Path(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

// Splits "a | b | c" table rows into trimmed cells.
std::vector<std::vector<std::string>> TableRows(const std::string& table) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(table);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("-+-") != std::string::npos) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t bar = line.find(" | ", start);
      std::string cell = line.substr(start, bar == std::string::npos ? std::string::npos
                                                                      : bar - start);
      cell.erase(cell.find_last_not_of(' ') + 1);
      cells.push_back(cell);
      if (bar == std::string::npos) break;
      start = bar + 3;
    }
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("full-path table layout") {
  const Run r = Cli({"compress", "--bigram", kBigram, "--mode", "full-path", "--format",
                     "table", "--text", kAmerica});
  REQUIRE(r.code == kExitOk);
  const auto rows = TableRows(r.out);
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0] == std::vector<std::string>{"Sentence", "Deleted Tokens", "AvgPPL"});
  CHECK(rows[1][0] == kAmerica);
  CHECK(rows[1][1] == "-");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 3);
    // two decimals
    CHECK(rows[i][2].size() - rows[i][2].find('.') == 3);
  }
}

TEST_CASE("frozen token never shows up as deleted") {
  const Run r = Cli({"compress", "--bigram", kBigram, "--mode", "full-path", "--format",
                     "table", "--freeze", "america", "--text", kAmerica});
  REQUIRE(r.code == kExitOk);
  const auto rows = TableRows(r.out);
  CHECK(rows.size() > 5);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][1].find("america") == std::string::npos);
    CHECK(rows[i][0].find("america") != std::string::npos);
  }

  const Run j = Cli({"compress", "--bigram", kBigram, "--mode", "full-path", "--freeze",
                     "america", "--text", kAmerica});
  const json rec = Records(j.out).at(0);
  CHECK(rec["frozen"] == json::array({2}));
  for (const json& node : rec["path"]) {
    for (const json& t : node["deleted_tokens"]) CHECK(t != "america");
  }
}

TEST_CASE("max-cr bounds the output") {
  const Run r = Cli({"compress", "--bigram", kBigram, "--max-cr", "0.5", "--text", kAmerica});
  REQUIRE(r.code == kExitOk);
  const json rec = Records(r.out).at(0);
  CHECK(rec["root"].size() == 13);
  CHECK(rec["final"].size() <= 6);
  CHECK_FALSE(rec["final_flagged"].get<bool>());

  const Run t = Cli({"compress", "--bigram", kBigram, "--max-cr", "0.5", "--format", "table",
                     "--text", kAmerica});
  CHECK(Tokenize(t.out).size() <= 6);
}

TEST_CASE("usage errors") {
  CHECK(Cli({"compress", "--bigram", kBigram, "--min-cr", "0.6", "--max-cr", "0.5", "--text",
             kAmerica})
            .code == kExitUsage);
  CHECK(Cli({"compress", "--bigram", kBigram, "--text", "   "}).code == kExitUsage);
  CHECK(Cli({"score", "--bigram", kBigram, "--text", ""}).code == kExitUsage);
  CHECK(Cli({"compress", "--bigram", kBigram, "--fixture", kFixture, "--text", "a"}).code ==
        kExitUsage);
  CHECK(Cli({"compress", "--bigram", kBigram, "--penalty", "cubic", "--text", "a"}).code ==
        kExitUsage);
  CHECK(Cli({"compress", "--bigram", kBigram}).code == kExitUsage);
  CHECK(Cli({"frobnicate"}).code == kExitUsage);
  CHECK(Cli({}).code == kExitUsage);
  ::unsetenv(kScorerUrlEnv);
  const Run none = Cli({"compress", "--text", "a b"});
  CHECK(none.code == kExitUsage);
  CHECK(none.err.find(kScorerUrlEnv) != std::string::npos);
}

TEST_CASE("score passes the scorer through") {
  const Run r = Cli({"score", "--fixture", kFixture, "--text", "she sings with me ."});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string tok;
  double v;
  for (const char* expect : {"she", "sings", "with", "me", "."}) {
    in >> tok >> v;
    CHECK(tok == expect);
    CHECK(v == 1.0);
  }
  in >> tok >> v;
  CHECK(tok == "avgppl");
  CHECK(v == doctest::Approx(std::exp(1.0)).epsilon(1e-4));

  const Run j = Cli({"score", "--fixture", kFixture, "--json", "--text", "she sings ."});
  const json doc = json::parse(j.out);
  CHECK(doc["tokens"] == json::array({"she", "sings", "."}));
  CHECK(doc["nll"] == json::array({0.9, 0.9, 0.9}));
  CHECK(doc["avgppl"].get<double>() == doctest::Approx(std::exp(0.9)).epsilon(1e-12));
}

TEST_CASE("JSONL records are self-contained") {
  const BigramScorer scorer = BigramScorer::FromJsonFile(kBigram);
  const Run r = Cli({"compress", "--bigram", kBigram, "--mode", "full-path", "--text", kAmerica});
  REQUIRE(r.code == kExitOk);
  const json rec = Records(r.out).at(0);
  CHECK(rec["config"]["alpha"] == 0.04);
  CHECK(rec["config"]["log"] == "natural");
  CHECK(rec["terminated_by"].is_string());
  const std::vector<double> root_nll = rec["root_nll"];
  const double L = static_cast<double>(root_nll.size());
  for (const json& node : rec["path"]) {
    const std::vector<std::size_t> kept = node["kept"];
    const TokenList tokens = node["tokens"];
    double kept_sum = 0.0;
    for (double v : scorer.Score(tokens)) kept_sum += v;
    double deleted_sum = 0.0;
    for (std::size_t i = 0, k = 0; i < root_nll.size(); ++i) {
      if (k < kept.size() && kept[k] == i) {
        ++k;
      } else {
        deleted_sum += root_nll[i];
      }
    }
    CHECK(deleter::testing::RelClose(node["kept_nll_sum"].get<double>(), kept_sum, 1e-12));
    CHECK(deleter::testing::RelClose(node["deleted_nll_sum"].get<double>(), deleted_sum,
                                     1e-12));
    CHECK(deleter::testing::RelClose(node["avgppl"].get<double>(),
                                     std::exp((kept_sum + deleted_sum) / L), 1e-12));
  }
}

TEST_CASE("file input and output") {
  TempDir dir;
  const std::string in = dir.Write("in.txt",
                                   "she sings with me .\n"
                                   "\n"
                                   "{\"id\": \"b\", \"tokens\": [\"i\", \"work\", \"work\", "
                                   "\"at\", \"a\", \"company\", \".\"]}\n");
  const std::string out = dir.Path("out.jsonl");
  const Run r = Cli({"compress", "--bigram", kBigram, "--input", in, "--output", out});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.empty());
  std::ifstream f(out);
  const std::string content((std::istreambuf_iterator<char>(f)), {});
  const auto recs = Records(content);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0]["id"] == "0");
  CHECK(recs[1]["id"] == "b");
  // the duplicate goes first
  CHECK(recs[1]["path"][1]["deleted_tokens"] == json::array({"work"}));
}

TEST_CASE("one failing sentence gives exit 1 and keeps the rest") {
  TempDir dir;
  const std::string in = dir.Write("in.txt", "she sings with me .\nno such entry\n");
  const Run r = Cli({"compress", "--fixture", kFixture, "--input", in});
  CHECK(r.code == kExitFailure);
  const auto recs = Records(r.out);
  REQUIRE(recs.size() == 2);
  CHECK_FALSE(recs[0].contains("error"));
  CHECK(recs[0]["final"] == json::array({"she", "sings", "."}));
  CHECK(recs[1].contains("error"));
  CHECK(r.err.find("error: 1:") != std::string::npos);
}

TEST_CASE("offline eval") {
  TempDir dir;
  SUBCASE("identical predictions score 1 per reference") {
    const std::string refs = dir.Write(
        "refs.jsonl",
        "{\"id\": \"a\", \"source\": \"x y z\", \"references\": [\"x z\", \"x z\"]}\n"
        "{\"id\": \"b\", \"source\": \"p q\", \"references\": [\"q\", \"q\"]}\n");
    const std::string preds = dir.Write("preds.jsonl",
                                        "{\"id\": \"a\", \"text\": \"x z\"}\n"
                                        "{\"id\": \"b\", \"tokens\": [\"q\"]}\n");
    const Run r = Cli({"eval", "--predictions", preds, "--references", refs});
    REQUIRE(r.code == kExitOk);
    const json doc = json::parse(r.out);
    CHECK(doc["f1"]["ref_0"] == 1.0);
    CHECK(doc["f1"]["ref_1"] == 1.0);
    CHECK(doc["cr"] == 0.6);
    CHECK(doc["n"] == 2);
  }
  SUBCASE("two references give two columns") {
    const std::string preds = dir.Write("preds.jsonl",
                                        "{\"id\": \"t1\", \"text\": \"she sings .\"}\n"
                                        "{\"id\": \"t2\", \"text\": \"i work at a company .\"}\n"
                                        "{\"id\": \"t3\", \"text\": \"the cat sat .\"}\n"
                                        "{\"id\": \"t4\", \"text\": \"heavy rain .\"}\n"
                                        "{\"id\": \"t5\", \"text\": \"the budget passed .\"}\n");
    const Run r =
        Cli({"eval", "--predictions", preds, "--references", kToyPairs, "--format", "table"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("F1 (#1)") != std::string::npos);
    CHECK(r.out.find("F1 (#2)") != std::string::npos);
    CHECK(r.out.find("CR") != std::string::npos);
  }
  SUBCASE("unknown prediction id") {
    const std::string preds = dir.Write("preds.jsonl", "{\"id\": \"zz\", \"text\": \"a\"}\n");
    CHECK(Cli({"eval", "--predictions", preds, "--references", kToyPairs}).code ==
          kExitFailure);
  }
  SUBCASE("flag combinations") {
    CHECK(Cli({"eval", "--predictions", kToyPairs}).code == kExitUsage);
    CHECK(Cli({"eval"}).code == kExitUsage);
  }
}

TEST_CASE("end-to-end eval is deterministic") {
  TempDir dir;
  const std::string saved = dir.Path("pred.jsonl");
  const Run a = Cli({"eval", "--dataset", kToyPairs, "--bigram", kBigram, "--predictions-out",
                     saved, "--workers", "4"});
  const Run b = Cli({"eval", "--dataset", kToyPairs, "--bigram", kBigram});
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  const json doc = json::parse(a.out);
  CHECK(doc["n"] == 5);
  CHECK(doc["f1"].size() == 2);
  CHECK(doc["cr"].get<double>() > 0.0);
  CHECK(doc["cr"].get<double>() <= 1.0);

  // saved predictions replay to the same report
  const Run c = Cli({"eval", "--predictions", saved, "--references", kToyPairs});
  CHECK(c.out == a.out);
}

TEST_CASE("google layout through eval") {
  TempDir dir;
  const std::string preds = dir.Write("p.jsonl",
                                      "{\"id\": \"2-3040\", \"text\": \"serge ibaka will miss "
                                      "the rest of the season .\"}\n");
  const Run r = Cli({"eval", "--google", "--first-n", "1", "--predictions", preds,
                     "--references", DELETER_TEST_DATA "/google_sample.json", "--positional"});
  REQUIRE(r.code == kExitOk);
  CHECK(json::parse(r.out)["f1"]["ref_0"] == 1.0);
}

TEST_CASE("remote scorer from the environment") {
  const BigramScorer scorer = BigramScorer::FromJsonFile(kBigram);
  deleter::testing::StubServer server(&scorer);
  ::setenv(kScorerUrlEnv, server.url().c_str(), 1);
  const Run remote = Cli({"compress", "--text", kAmerica, "--max-batch", "5"});
  ::unsetenv(kScorerUrlEnv);
  REQUIRE(remote.code == kExitOk);
  const json rec = Records(remote.out).at(0);
  CHECK(rec["config"]["scorer"]["kind"] == "remote");
  CHECK(rec["config"]["scorer"]["agg"] == "joint-mask-sum");

  const Run local = Cli({"compress", "--bigram", kBigram, "--text", kAmerica});
  CHECK(Records(local.out).at(0)["final"] == rec["final"]);

  const Run h = Cli({"health", "--scorer-url", server.url()});
  CHECK(h.code == kExitOk);
  CHECK(json::parse(h.out)["version"] == 1);

  server.SetHealth("independent-mask-sum", 1);
  const Run refused = Cli({"eval", "--dataset", kToyPairs, "--scorer-url", server.url()});
  CHECK(refused.code == kExitUsage);
  CHECK(refused.err.find("independent-mask-sum") != std::string::npos);
}
