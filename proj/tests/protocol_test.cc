// Copyright 2026 The Groundcap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <future>
#include <thread>

#include "doctest.h"
#include "groundcap/common/encoding.h"
#include "groundcap/common/error.h"
#include "groundcap/mock/mock_lvlm.h"
#include "groundcap/protocol/client.h"
#include "groundcap/protocol/conformance.h"
#include "groundcap/protocol/server.h"
#include "groundcap/protocol/transport.h"
#include "groundcap/protocol/wire.h"
#include "testing/scripted_backend.h"

namespace groundcap {
namespace {

Vocabulary SmallVocab() {
  return Vocabulary({"<eos>", ".", ",", "a", "dog", "cat", "A", "B", "C"}, ".", ",", "<eos>");
}

SequenceContext Ctx(std::vector<TokenId> prefix = {}) {
  return SequenceContext{std::string("img"), kCaptionPrompt, std::move(prefix)};
}

// "a dog ." then EOS; the first step is {A:0.6, B:0.3, C:0.1}.
testing::ScriptedBackend MakeScripted() {
  auto vocab = SmallVocab();
  auto v = vocab;
  return testing::ScriptedBackend(std::move(vocab), [v](const std::vector<TokenId>& p, bool) {
    std::vector<double> d(v.size(), 0.0);
    const std::vector<TokenId> script = {v.Id("a"), v.Id("dog"), v.period_id(), v.eos_id()};
    if (p.size() < script.size()) {
      d[script[p.size()]] = 0.7;
      d[v.Id("cat")] = 0.3;
    } else {
      d[v.eos_id()] = 1.0;
    }
    return d;
  });
}

struct Loopback {
  explicit Loopback(Backend& backend) : server(backend) {
    auto [client_end, server_end] = MakeChannelPair();
    server_channel = std::move(server_end);
    thread = std::thread([this] { server.Serve(*server_channel); });
    client = std::make_unique<ProtocolClient>(std::move(client_end));
  }
  ~Loopback() {
    client.reset();
    thread.join();
  }
  ProtocolServer server;
  std::unique_ptr<FdLineChannel> server_channel;
  std::thread thread;
  std::unique_ptr<ProtocolClient> client;
};

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("top_k on a scripted distribution") {
  auto v = SmallVocab();
  testing::ScriptedBackend b(v, [&](const std::vector<TokenId>&, bool) {
    std::vector<double> d(v.size(), 0.0);
    d[v.Id("A")] = 0.6;
    d[v.Id("B")] = 0.3;
    d[v.Id("C")] = 0.1;
    return d;
  });
  auto r = b.TopKNext(Ctx(), 2, true);
  REQUIRE(r.top_tokens.size() == 2);
  CHECK(r.top_tokens[0] == TokenProb{v.Id("A"), 0.6});
  CHECK(r.top_tokens[1] == TokenProb{v.Id("B"), 0.3});

  auto full = b.TopKNext(Ctx(), v.size(), true);
  double sum = 0.0;
  for (const auto& tp : full.top_tokens) sum += tp.probability;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  // Zero-probability ties come out by ascending id.
  CHECK(full.top_tokens[3].token == 0);
  CHECK(full.top_tokens[4].token == 1);

  CHECK_THROWS_AS(b.TopKNext(Ctx(), 0, true), Error);
  CHECK_THROWS_AS(b.TopKNext(Ctx(), v.size() + 1, true), Error);
}

TEST_CASE("greedy_extend follows the script and honours the cap") {
  auto b = MakeScripted();
  const auto& v = b.vocab();
  const std::vector<TokenId> stops = {v.period_id(), v.eos_id()};
  auto r = b.GreedyExtend(Ctx(), stops, true);
  CHECK(v.Detokenize(r.tokens) == "a dog.");
  CHECK_FALSE(r.truncated);
  CHECK(b.GreedyExtend(Ctx(), stops, true).tokens == r.tokens);

  auto full = Ctx(std::vector<TokenId>(kMaxSequenceLen, v.Id("a")));
  auto capped = b.GreedyExtend(full, stops, true);
  CHECK(capped.tokens.empty());
  CHECK(capped.truncated);

  CHECK_THROWS_AS(b.GreedyExtend(Ctx(), {v.period_id()}, true), Error);
  auto too_long = Ctx(std::vector<TokenId>(kMaxSequenceLen + 1, 0));
  CHECK_THROWS_AS(b.GreedyExtend(too_long, stops, true), Error);
  SequenceContext no_prompt = Ctx();
  no_prompt.prompt.clear();
  CHECK_THROWS_AS(b.TopKNext(no_prompt, 1, true), Error);
}

TEST_CASE("greedy_extend equals iterated top-1") {
  auto b = MakeScripted();
  const auto& v = b.vocab();
  auto greedy = b.GreedyExtend(Ctx(), {v.period_id(), v.eos_id()}, true);
  std::vector<TokenId> iterated;
  auto ctx = Ctx();
  while (true) {
    const TokenId t = b.TopKNext(ctx, 1, true).top_tokens[0].token;
    iterated.push_back(t);
    ctx.prefix_tokens.push_back(t);
    if (t == v.period_id() || t == v.eos_id()) break;
  }
  CHECK(iterated == greedy.tokens);
}

TEST_CASE("hidden states are length preserving") {
  auto b = MakeScripted();
  std::vector<TokenId> toks = {3, 4, 5, 3, 1};
  auto h = b.FinalHiddenStates(Ctx(), toks, true);
  CHECK(h.size() == 5);
  for (const auto& x : h) CHECK(x.size() == b.Info().hidden_dim);
  CHECK(b.FinalHiddenStates(Ctx(), toks, true) == h);
  CHECK_THROWS_AS(b.FinalHiddenStates(Ctx(), std::vector<TokenId>{}, true), Error);

  b.set_hidden([](TokenId t, std::size_t, bool) {
    return std::vector<float>(t == 5 ? 3 : 4, 0.0f);
  });
  try {
    b.FinalHiddenStates(Ctx(), toks, true);
    FAIL("expected a protocol error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kProtocol);
  }
}

TEST_CASE("discriminative replies") {
  CHECK(DiscriminativeQuestion("dog") ==
        "Is there a dog in the image? Answer with only Yes or No.");
  CHECK(DiscriminativeQuestion("umbrella") ==
        "Is there an umbrella in the image? Answer with only Yes or No.");
  CHECK(ParseYesNo("Yes"));
  CHECK(ParseYesNo(" yes.\n"));
  CHECK_FALSE(ParseYesNo("No"));
  auto b = MakeScripted();
  b.set_reply("maybe");
  try {
    b.DiscriminativeQuery("img", "dog");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(e.detail() == "maybe");
  }
}

TEST_CASE("vocabulary tokenization round trip") {
  auto v = SmallVocab();
  auto ids = v.Tokenize("a dog, a cat.");
  CHECK(ids.size() == 6);
  CHECK(v.Detokenize(ids) == "a dog, a cat.");
  CHECK_THROWS_AS(v.Id("zebra"), Error);
  CHECK_THROWS_AS(Vocabulary({"a", "a", ".", ",", "<eos>"}, ".", ",", "<eos>"), Error);
}

TEST_CASE("wire encoding is bit exact") {
  std::vector<float> v = {0.0f, -1.5f, 3.1415927f, 1e-38f, -0.0f,
                          std::numeric_limits<float>::max()};
  auto back = DecodeFloatsBase64(EncodeFloatsBase64(v));
  REQUIRE(back.size() == v.size());
  CHECK(std::memcmp(back.data(), v.data(), v.size() * sizeof(float)) == 0);
  // 1.0f little endian is 00 00 80 3f.
  CHECK(EncodeFloatsBase64(std::vector<float>{1.0f}) == "AACAPw==");
  CHECK_THROWS_AS(DecodeFloatsBase64("AACA"), Error);
}

TEST_CASE("server reports malformed requests as errors") {
  auto b = MakeScripted();
  ProtocolServer server(b);
  auto bad = Json::parse(server.HandleLine("{not json"));
  CHECK(bad["ok"] == false);
  CHECK(bad["id"].is_null());
  CHECK(bad["error"]["code"] == "protocol");
  auto unknown = Json::parse(server.HandleLine(R"({"id":4,"op":"nope"})"));
  CHECK(unknown["id"] == 4);
  CHECK(unknown["error"]["code"] == "protocol");
  auto missing = Json::parse(server.HandleLine(R"({"id":5,"op":"top_k_next"})"));
  CHECK(missing["ok"] == false);
  auto info = Json::parse(server.HandleLine(R"({"id":6,"op":"info"})"));
  CHECK(info["ok"] == true);
  CHECK(info["payload"]["hidden_dim"] == 4);
}

TEST_CASE("client over a socket pair matches the backend") {
  auto scene = mock::SceneSpec{"s1", {"dog", "bench", "tree"}, 3};
  auto mock = mock::BuildMock(scene, {});
  Loopback loop(*mock);
  ProtocolClient& client = *loop.client;
  CHECK(client.Info().vocab == mock->Info().vocab);

  auto ctx = Ctx();
  ctx.image_ref = "s1";
  auto direct = mock->TopKNext(ctx, 5, true);
  auto remote = client.TopKNext(ctx, 5, true);
  CHECK(remote.top_tokens == direct.top_tokens);
  CHECK(remote.hidden == direct.hidden);

  const auto& info = mock->Info();
  auto g1 = PlainGreedyDecode(*mock, ctx);
  auto g2 = PlainGreedyDecode(client, ctx);
  CHECK(g1.tokens == g2.tokens);

  // Two passes in flight at once.
  auto with = std::async(std::launch::async, [&] {
    return client.FinalHiddenStates(ctx, g1.tokens, true);
  });
  auto without = std::async(std::launch::async, [&] {
    return client.FinalHiddenStates(ctx, g1.tokens, false);
  });
  CHECK(with.get() == mock->FinalHiddenStates(ctx, g1.tokens, true));
  CHECK(without.get() == mock->FinalHiddenStates(ctx, g1.tokens, false));

  CHECK(client.DiscriminativeQuery("s1", "dog"));
  CHECK_FALSE(client.DiscriminativeQuery("s1", "zebra"));
  auto bad = ctx;
  bad.image_ref = "unknown";
  try {
    client.TopKNext(bad, 1, true);
    FAIL("expected an input error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInput);
  }
  CHECK(info.eos_id == client.Info().eos_id);
}

TEST_CASE("conformance suite passes on the mock, direct and remote") {
  auto mock = mock::BuildMock(mock::SceneSpec{"s1", {"dog", "cat"}, 9}, {});
  ConformanceOptions opts;
  opts.image_ref = "s1";
  for (const auto& c : RunConformanceSuite(*mock, opts)) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  Loopback loop(*mock);
  for (const auto& c : RunConformanceSuite(*loop.client, opts)) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("conformance suite flags a broken backend") {
  auto v = SmallVocab();
  // Not normalized.
  testing::ScriptedBackend b(v, [&](const std::vector<TokenId>&, bool) {
    std::vector<double> d(v.size(), 0.05);
    d[v.period_id()] = 0.5;
    return d;
  });
  ConformanceOptions opts;
  opts.image_ref = "img";
  bool any_failed = false;
  for (const auto& c : RunConformanceSuite(b, opts)) any_failed |= !c.passed;
  CHECK(any_failed);
}

TEST_CASE("client fails pending calls when the server goes away") {
  auto [client_end, server_end] = MakeChannelPair();
  std::thread peer([&] {
    // Answer info, then hang up.
    auto line = server_end->ReadLine();
    auto req = Json::parse(*line);
    auto mock = mock::BuildMock(mock::SceneSpec{"s1", {"dog"}, 1}, {});
    server_end->WriteLine(wire::OkResponse(req["id"], wire::EncodeInfo(mock->Info())).dump());
    server_end->ReadLine();
    server_end->CloseWrite();
  });
  ProtocolClient client(std::move(client_end));
  try {
    client.TopKNext(Ctx(), 1, true);
    FAIL("expected a transport error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTransport);
  }
  peer.join();
}

}  // TEST_SUITE

}  // namespace groundcap
