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

#include "doctest.h"

using namespace deleter;

TEST_CASE("MakeRoot without freezing") {
  ResolvedRoot r = MakeRoot({"america", "."}, {});
  CHECK(r.root.size() == 2);
  CHECK(r.frozen.empty());
  CHECK(r.warnings.empty());
}

TEST_CASE("MakeRoot resolves frozen text") {
  ResolvedRoot r = MakeRoot({"i", "think", "america", "is", "."}, {.texts = {"america"}});
  CHECK(r.frozen == IndexSet{2});
}

TEST_CASE("MakeRoot freezes every occurrence of a text") {
  const TokenList tokens = {"a", "b", "a"};
  ResolvedRoot r = MakeRoot(tokens, {.texts = {"a"}});
  // scan
  IndexSet expected;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "a") expected.insert(i);
  }
  CHECK(r.frozen == expected);
  CHECK(r.frozen == IndexSet{0, 2});
}

TEST_CASE("MakeRoot index freezing is exact") {
  ResolvedRoot r = MakeRoot({"a", "b", "a"}, {.indices = {2}});
  CHECK(r.frozen == IndexSet{2});
  CHECK_THROWS_AS(MakeRoot({"a"}, {.indices = {1}}), InputError);
}

TEST_CASE("MakeRoot missing frozen text") {
  ResolvedRoot r = MakeRoot({"a", "b"}, {.texts = {"zebra"}});
  CHECK(r.frozen.empty());
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("zebra") != std::string::npos);
  CHECK_THROWS_AS(MakeRoot({"a", "b"}, {.texts = {"zebra"}}, "", /*strict=*/true),
                  InputError);
}

TEST_CASE("RootSentence rejects bad tokens") {
  CHECK_THROWS_AS(RootSentence({}), InputError);
  CHECK_THROWS_AS(RootSentence({"a", ""}), InputError);
  CHECK_THROWS_AS(RootSentence({"a b"}), InputError);
  CHECK_THROWS_AS(RootSentence({"a\tb"}), InputError);
}

TEST_CASE("PathNode deleted is the complement of kept") {
  PathNode n;
  n.kept = {0, 2, 5};
  CHECK(n.Deleted(6) == IndexList{1, 3, 4});
  CHECK(n.Tokens(RootSentence({"a", "b", "c", "d", "e", "f"})) ==
        TokenList{"a", "c", "f"});
  n.kept = {};
  CHECK(n.Deleted(2) == IndexList{0, 1});
}

TEST_CASE("SearchConfig validation") {
  SearchConfig c;
  CHECK_NOTHROW(c.Validate());
  CHECK(c.alpha == 0.04);
  CHECK(c.beta == 0.04);
  CHECK(c.max_lookahead == 3);
  CHECK(c.penalty_mode == PenaltyMode::kSpanLength);
  CHECK(c.termination_mode == TerminationMode::kTerminate);

  SUBCASE("negative alpha") {
    c.alpha = -0.1;
    CHECK_THROWS_AS(c.Validate(), ConfigError);
  }
  SUBCASE("negative beta") {
    c.beta = -1;
    CHECK_THROWS_AS(c.Validate(), ConfigError);
  }
  SUBCASE("zero lookahead") {
    c.max_lookahead = 0;
    CHECK_THROWS_AS(c.Validate(), ConfigError);
  }
  SUBCASE("min_cr above max_cr") {
    c.min_cr = 0.6;
    c.max_cr = 0.5;
    CHECK_THROWS_AS(c.Validate(), ConfigError);
  }
  SUBCASE("ratio out of range") {
    c.max_cr = 1.5;
    CHECK_THROWS_AS(c.Validate(), ConfigError);
    c.max_cr = 0.0;
    CHECK_THROWS_AS(c.Validate(), ConfigError);
  }
  SUBCASE("equal bounds are fine") {
    c.min_cr = 0.5;
    c.max_cr = 0.5;
    CHECK_NOTHROW(c.Validate());
  }
}

TEST_CASE("mode names round trip") {
  for (PenaltyMode m : {PenaltyMode::kSpanLength, PenaltyMode::kCurrentLength, PenaltyMode::kOff}) {
    CHECK(ParsePenaltyMode(ToString(m)) == m);
  }
  for (TerminationMode m : {TerminationMode::kTerminate, TerminationMode::kFullPath}) {
    CHECK(ParseTerminationMode(ToString(m)) == m);
  }
  CHECK_THROWS_AS(ParsePenaltyMode("quadratic"), ConfigError);
  CHECK_THROWS_AS(ParseTerminationMode("beam"), ConfigError);
}

TEST_CASE("Tokenize") {
  CHECK(Tokenize("  I Think  America ") == TokenList{"i", "think", "america"});
  CHECK(Tokenize("I Think", {.lowercase = false}) == TokenList{"I", "Think"});
  CHECK(Tokenize("") == TokenList{});
  CHECK(Tokenize("this summer, reports David Hein.", {.split_punct = true}) ==
        TokenList{"this", "summer", ",", "reports", "david", "hein", "."});
  CHECK(Tokenize("say 'no' -- ok", {.split_punct = true}) ==
        TokenList{"say", "'", "no", "'", "-", "-", "ok"});
  CHECK(Tokenize("don't", {.split_punct = true}) == TokenList{"don't"});
}
