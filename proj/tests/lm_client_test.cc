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

#include "deleter/lm_client.h"

#include <atomic>
#include <string>
#include <vector>

#include "deleter/search.h"
#include "doctest.h"
#include "json.hpp"
#include "testing/stub_server.h"

using namespace deleter;
using deleter::testing::StubServer;
using nlohmann::json;

namespace {

BigramScorer ToyScorer() {
  return BigramScorer({{"she", 1.0}, {"sings", 2.0}, {"with", 0.5}, {"me", 0.7}, {".", 0.1}},
                      {{{"sings", "with"}, -0.3}}, 3.0);
}

ScorerEndpoint Endpoint(const StubServer& s) {
  ScorerEndpoint ep;
  ep.base_url = s.url();
  ep.timeout = std::chrono::milliseconds(2000);
  ep.retry.backoff = {std::chrono::milliseconds(1)};
  return ep;
}

std::vector<TokenList> Sentences(std::size_t n) {
  std::vector<TokenList> out;
  for (std::size_t i = 0; i < n; ++i) {
    TokenList s = {"she", "sings"};
    for (std::size_t k = 0; k < i % 3; ++k) s.push_back("with");
    s.push_back(".");
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("one vector per sentence, one NLL per token") {
  const BigramScorer scorer = ToyScorer();
  StubServer server(&scorer);
  const std::vector<TokenList> in = {{"she", "sings", "with", "me", "."}, {"she", "."}};
  const auto out = RemoteScore(in, Endpoint(server));
  REQUIRE(out.size() == 2);
  CHECK(out[0].size() == 5);
  CHECK(out[1].size() == 2);
  CHECK(out[0] == scorer.Score(in[0]));
  CHECK(out[1] == scorer.Score(in[1]));
}

TEST_CASE("request body shape") {
  const BigramScorer scorer = ToyScorer();
  StubServer server(&scorer);
  RemoteScore({{"she", "."}}, Endpoint(server));
  const json body = json::parse(server.bodies().at(0));
  CHECK(body == json::parse(R"({"sentences": [["she", "."]]})"));
}

TEST_CASE("requests are chunked by max_batch") {
  const BigramScorer scorer = ToyScorer();
  StubServer server(&scorer);
  ScorerEndpoint ep = Endpoint(server);
  ep.max_batch = 3;
  const auto in = Sentences(7);
  const auto chunked = RemoteScore(in, ep);
  CHECK(server.score_requests() == 3);
  std::vector<std::size_t> sizes;
  for (const std::string& b : server.bodies()) sizes.push_back(json::parse(b)["sentences"].size());
  CHECK(sizes == std::vector<std::size_t>{3, 3, 1});

  ep.max_batch = 64;
  CHECK(RemoteScore(in, ep) == chunked);
  CHECK(server.score_requests() == 4);
}

TEST_CASE("length mismatch names the sentence") {
  const BigramScorer scorer = ToyScorer();
  StubServer server(&scorer);
  SUBCASE("first sentence") {
    server.SetScoreHandler([](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"scores": [[1.0, 2.0], [1.0, 1.0]]})", "application/json");
    });
    try {
      RemoteScore({{"she", "sings", "."}, {"she", "."}}, Endpoint(server));
      FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
      CHECK(e.sentence_index() == 0);
      CHECK(std::string(e.what()).find("sentence 0") != std::string::npos);
      CHECK(e.tokens() == TokenList{"she", "sings", "."});
    }
  }
  SUBCASE("later sentence in a later chunk") {
    ScorerEndpoint ep = Endpoint(server);
    ep.max_batch = 2;
    server.SetScoreHandler([&](const httplib::Request& req, httplib::Response& res) {
      json out;
      out["scores"] = json::array();
      const json doc = json::parse(req.body);
      for (const auto& s : doc["sentences"]) {
        NllVector v = scorer.Score(s.get<TokenList>());
        if (s.size() == 5) v.pop_back();
        out["scores"].push_back(v);
      }
      res.set_content(out.dump(), "application/json");
    });
    // index 2 has 5 tokens
    const auto in = Sentences(4);
    REQUIRE(in[2].size() == 5);
    try {
      RemoteScore(in, ep);
      FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
      CHECK(e.sentence_index() == 2);
    }
  }
}

TEST_CASE("bad payloads are protocol errors") {
  StubServer server;
  const std::vector<TokenList> in = {{"a", "b"}};
  auto respond = [&](std::string body) {
    server.SetScoreHandler([body](const httplib::Request&, httplib::Response& res) {
      res.set_content(body, "application/json");
    });
  };
  respond(R"({"scores": [[1.0, -0.5]]})");
  CHECK_THROWS_WITH_AS(RemoteScore(in, Endpoint(server)), doctest::Contains("negative"),
                       ProtocolError);
  respond(R"({"scores": [[1.0, "x"]]})");
  CHECK_THROWS_AS(RemoteScore(in, Endpoint(server)), ProtocolError);
  respond(R"({"scores": [[1.0, 2.0]]")");
  CHECK_THROWS_WITH_AS(RemoteScore(in, Endpoint(server)), doctest::Contains("malformed"),
                       ProtocolError);
  respond(R"({"nlls": [[1.0, 2.0]]})");
  CHECK_THROWS_AS(RemoteScore(in, Endpoint(server)), ProtocolError);
  respond(R"({"scores": []})");
  CHECK_THROWS_AS(RemoteScore(in, Endpoint(server)), ProtocolError);
}

TEST_CASE("client errors are not retried") {
  StubServer server;
  server.SetScoreHandler([](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
    res.set_content(R"({"error": "empty sentence"})", "application/json");
  });
  CHECK_THROWS_WITH_AS(RemoteScore({{"a"}}, Endpoint(server)),
                       doctest::Contains("empty sentence"), ProtocolError);
  CHECK(server.score_requests() == 1);
}

TEST_CASE("server errors are retried") {
  const BigramScorer scorer = ToyScorer();
  StubServer server(&scorer);
  std::atomic<int> calls{0};
  server.SetScoreHandler([&](const httplib::Request& req, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    server.DefaultScore(req, res);
  });
  const auto out = RemoteScore({{"she", "."}}, Endpoint(server));
  CHECK(out[0] == scorer.Score({"she", "."}));
  CHECK(server.score_requests() == 3);

  SUBCASE("and give up after max_attempts") {
    calls = -10;
    CHECK_THROWS_WITH_AS(RemoteScore({{"she", "."}}, Endpoint(server)),
                         doctest::Contains("HTTP 503"), TransportError);
    CHECK(server.score_requests() == 6);
  }
}

TEST_CASE("unreachable server") {
  int port;
  {
    StubServer s;
    port = std::stoi(s.url().substr(s.url().rfind(':') + 1));
  }
  ScorerEndpoint ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port);
  ep.timeout = std::chrono::milliseconds(500);
  ep.retry.max_attempts = 2;
  ep.retry.backoff = {std::chrono::milliseconds(1)};
  CHECK_THROWS_AS(RemoteScore({{"a"}}, ep), TransportError);
  CHECK_THROWS_AS(Healthcheck(ep), TransportError);
}

TEST_CASE("endpoint validation") {
  ScorerEndpoint ep;
  ep.base_url = "localhost:8000";
  CHECK_THROWS_AS(ep.Validate(), ConfigError);
  ep.base_url = "http://localhost:8000/prefix";
  CHECK_NOTHROW(ep.Validate());
  ep.max_batch = 0;
  CHECK_THROWS_AS(ep.Validate(), ConfigError);
}

TEST_CASE("empty sentence is refused before sending") {
  StubServer server;
  CHECK_THROWS_AS(RemoteScore({{"a"}, {}}, Endpoint(server)), ProtocolError);
  CHECK(server.score_requests() == 0);
}

TEST_CASE("health") {
  StubServer server;
  const ServerInfo info = Healthcheck(Endpoint(server));
  CHECK(info.model == "stub");
  CHECK(info.agg == "joint-mask-sum");
  CHECK(info.version == 1);

  server.SetHealth("independent-mask-sum", 2);
  CHECK_THROWS_WITH_AS(Healthcheck(Endpoint(server)), doctest::Contains("version 2"),
                       ProtocolError);
}

TEST_CASE("remote scorer drives the search like the local one") {
  const BigramScorer scorer = ToyScorer();
  StubServer server(&scorer);
  ScorerEndpoint ep = Endpoint(server);
  ep.max_batch = 2;
  const RemoteScorer remote(ep);
  const RootSentence root({"she", "sings", "with", "me", "."});
  SearchConfig cfg;
  cfg.termination_mode = TerminationMode::kFullPath;
  const DeletionPath a = Compress(root, cfg, remote, nullptr, 3);
  const DeletionPath b = Compress(root, cfg, scorer);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].removed_root_indices == b.steps[i].removed_root_indices);
    CHECK(a.steps[i].result.score.avgppl == b.steps[i].result.score.avgppl);
  }
  CHECK_FALSE(a.error);
}
