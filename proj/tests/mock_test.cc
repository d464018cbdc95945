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
#include <map>

#include "doctest.h"
#include "groundcap/common/error.h"
#include "groundcap/mock/mock_lvlm.h"
#include "groundcap/protocol/server.h"

namespace groundcap::mock {
namespace {

SequenceContext Ctx(const std::string& scene, std::vector<TokenId> prefix = {}) {
  return SequenceContext{scene, kCaptionPrompt, std::move(prefix)};
}

std::vector<TokenId> Caption(MockLvlm& m, const std::string& scene, bool with_image = true) {
  auto ctx = Ctx(scene);
  const auto& info = m.Info();
  std::vector<TokenId> out;
  while (true) {
    auto r = m.GreedyExtend(ctx, {info.period_id, info.eos_id}, with_image);
    out.insert(out.end(), r.tokens.begin(), r.tokens.end());
    ctx.prefix_tokens.insert(ctx.prefix_tokens.end(), r.tokens.begin(), r.tokens.end());
    if (r.truncated || r.tokens.back() == info.eos_id) return out;
  }
}

double Distance(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("mock") {

TEST_CASE("default vocabulary") {
  auto v = DefaultMockVocab();
  CHECK(v.vocab().size() >= 150);
  CHECK(v.vocab().size() <= 250);
  CHECK(v.vocab().Contains("."));
  CHECK(v.IsNoun(v.vocab().Id("zebra")));
  CHECK_FALSE(v.IsNoun(v.vocab().Id("the")));
}

TEST_CASE("rate curves") {
  auto step = RateCurve::Step(0.5, 0.1, 0.9);
  CHECK(step.At(0.0) == 0.1);
  CHECK(step.At(0.49) == 0.1);
  CHECK(step.At(0.5) == 0.9);
  CHECK(step.At(1.0) == 0.9);
  auto lin = RateCurve::Linear(0.0, 0.4);
  CHECK(lin.At(0.25) == doctest::Approx(0.1));
  CHECK(lin.IsMonotone());
  CHECK_FALSE(RateCurve::Linear(0.5, 0.1).IsMonotone());
  CHECK_THROWS_AS(RateCurve({{0.0, 1.5}}), Error);
}

TEST_CASE("identical configuration gives identical transcripts") {
  MockBehavior b;
  b.hallucination_rate = RateCurve::Linear(0.1, 0.6);
  SceneSpec scene{"s", {"dog", "bench", "tree", "car"}, 42};
  auto m1 = BuildMock(scene, b);
  auto m2 = BuildMock(scene, b);
  ProtocolServer s1(*m1), s2(*m2);
  std::vector<std::string> requests = {
      R"({"id":1,"op":"top_k_next","ctx":{"image_ref":"s","prompt":"p","prefix_tokens":[]},"k":5,"with_image":true})",
      R"({"id":2,"op":"greedy_extend","ctx":{"image_ref":"s","prompt":"p","prefix_tokens":[]},"stop_tokens":[0,1],"with_image":false})",
      R"({"id":3,"op":"hidden_states","ctx":{"image_ref":"s","prompt":"p","prefix_tokens":[]},"tokens":[3,4,5],"with_image":true})",
      R"({"id":4,"op":"discriminative","image_ref":"s","object":"dog"})",
  };
  for (const auto& r : requests) CHECK(s1.HandleLine(r) == s2.HandleLine(r));
}

TEST_CASE("zero injection mentions only true objects") {
  SceneSpec scene{"s", {"dog", "bench", "tree"}, 5};
  auto m = BuildMock(scene, {});
  auto cap = Caption(*m, "s");
  const auto& v = m->vocab();
  int nouns = 0;
  for (TokenId t : cap) {
    if (!v.IsNoun(t)) continue;
    ++nouns;
    CHECK(std::count(scene.true_objects.begin(), scene.true_objects.end(), v.vocab().Text(t)) == 1);
  }
  CHECK(nouns > 0);
  auto gt = m->ExportGroundTruth(scene, cap);
  CHECK(std::all_of(gt.accurate.begin(), gt.accurate.end(), [](bool a) { return a; }));
  CHECK(gt.objects == scene.true_objects);
  CHECK(cap.back() == v.vocab().eos_id());
}

TEST_CASE("captions open with the template starter") {
  auto v = DefaultMockVocab();
  int starts = 0;
  auto scenes = GenerateScenes(v, 50, 3);
  MockLvlm m(v, scenes, {});
  for (const auto& s : scenes) {
    auto text = v.vocab().Detokenize(Caption(m, s.scene_id));
    starts += text.rfind("This image features", 0) == 0;
  }
  CHECK(starts >= 40);
}

TEST_CASE("full injection after the midpoint") {
  MockBehavior b;
  b.hallucination_rate = RateCurve::Step(0.5, 0.0, 1.0);
  auto v = DefaultMockVocab();
  auto scenes = GenerateScenes(v, 40, 11);
  MockLvlm m(v, scenes, b);
  for (const auto& s : scenes) {
    auto cap = Caption(m, s.scene_id);
    std::size_t sentence = 0;
    const double n = static_cast<double>(m.SentenceCount(s));
    for (TokenId t : cap) {
      if (t == v.vocab().period_id()) ++sentence;
      if (!v.IsNoun(t)) continue;
      const bool present = std::count(s.true_objects.begin(), s.true_objects.end(),
                                      v.vocab().Text(t)) > 0;
      CHECK(present == (sentence / n < 0.5));
    }
  }
}

TEST_CASE("injection frequency tracks the rate curve") {
  MockBehavior b;
  b.hallucination_rate = RateCurve::Linear(0.05, 0.65);
  auto v = DefaultMockVocab();
  auto scenes = GenerateScenes(v, 400, 21);
  MockLvlm m(v, scenes, b);
  std::map<int, std::pair<int, int>> bins;  // bin -> (hallucinated, slots)
  std::map<int, double> expected_sum;
  int sentences = 0;
  for (const auto& s : scenes) {
    for (std::size_t i = 0; i < m.SentenceCount(s); ++i) {
      const double x = m.RelativePosition(s, i);
      const int bin = static_cast<int>(x * 4);
      auto plan = m.Plan(s, i, sentences % b.templates.size());
      ++sentences;
      for (const auto& slot : plan.slots) {
        bins[bin].first += slot.hallucinated;
        bins[bin].second += 1;
        expected_sum[bin] += b.hallucination_rate.At(x);
      }
    }
  }
  CHECK(sentences >= 1000);
  for (const auto& [bin, counts] : bins) {
    const double observed = double(counts.first) / counts.second;
    const double expected = expected_sum[bin] / counts.second;
    INFO("bin " << bin << " observed " << observed << " expected " << expected);
    CHECK(std::abs(observed - expected) <= 0.05);
  }
}

TEST_CASE("hidden states carry the signal only on grounded tokens") {
  MockBehavior b;
  b.hallucination_rate = RateCurve::Constant(0.5);
  b.grounded_signal_magnitude = 3.0;
  auto v = DefaultMockVocab();
  auto scenes = GenerateScenes(v, 10, 4);
  MockLvlm m(v, scenes, b);
  int grounded = 0, hallucinated = 0;
  for (const auto& s : scenes) {
    auto cap = Caption(m, s.scene_id);
    auto gt = m.ExportGroundTruth(s, cap);
    auto x1 = m.FinalHiddenStates(Ctx(s.scene_id), cap, true);
    auto x2 = m.FinalHiddenStates(Ctx(s.scene_id), cap, false);
    for (std::size_t i = 0; i < cap.size(); ++i) {
      CHECK(x1[i].size() == 64);
      if (gt.accurate[i]) {
        ++grounded;
        CHECK(Distance(x1[i], x2[i]) == doctest::Approx(3.0).epsilon(1e-5));
      } else {
        ++hallucinated;
        CHECK(x1[i] == x2[i]);
      }
    }
  }
  CHECK(grounded > 0);
  CHECK(hallucinated > 0);
  CHECK(m.HiddenState(5, 3, true, false) == m.HiddenState(5, 3, false, false));
}

TEST_CASE("labels follow the sentence and phrase rules") {
  SceneSpec scene{"s", {"man", "umbrella"}, 1};
  auto m = BuildMock(scene, {});
  const auto& v = m->vocab().vocab();
  auto toks = v.Tokenize("The umbrella is next to the zebra , close to a man . A man can be seen near the umbrella .");
  auto labels = m->Labels(scene, toks);
  // Zebra taints the first sentence; the umbrella and man phrases reset.
  const std::vector<bool> expected = {true, true, true, true, true, true, true,
                                      false, true, true, true, true, false,
                                      true, true, true, true, true, true, true, true, true};
  CHECK(labels == expected);
  auto gt = m->ExportGroundTruth(scene, toks);
  REQUIRE(gt.mentions.size() == 5);
  CHECK(gt.mentions[1].object == "zebra");
  CHECK(gt.mentions[1].hallucinated);
  CHECK_FALSE(gt.mentions[0].hallucinated);
}

TEST_CASE("without the image, grounded steps lose mass") {
  SceneSpec scene{"s", {"dog", "bench", "tree"}, 8};
  MockBehavior b;
  b.hallucination_rate = RateCurve::Constant(0.4);
  auto m = BuildMock(scene, b);
  auto cap = Caption(*m, "s");
  auto gt = m->ExportGroundTruth(scene, cap);
  int differ = 0;
  for (std::size_t i = 0; i < cap.size(); ++i) {
    auto ctx = Ctx("s", std::vector<TokenId>(cap.begin(), cap.begin() + i));
    auto p1 = m->NextTokenDistribution(ctx, true);
    auto p2 = m->NextTokenDistribution(ctx, false);
    double s1 = 0, s2 = 0;
    for (double p : p1) s1 += p;
    for (double p : p2) s2 += p;
    CHECK(s1 == doctest::Approx(1.0));
    CHECK(s2 == doctest::Approx(1.0));
    if (p1 != p2) ++differ;
    if (i > 0 && !gt.accurate[i] && cap[i - 1] != m->vocab().vocab().period_id()) {
      CHECK(p1 == p2);
    }
  }
  CHECK(differ > 0);
}

TEST_CASE("configuration errors") {
  auto v = DefaultMockVocab();
  MockBehavior b;
  CHECK_THROWS_AS(MockLvlm(v, {{"s", {"unicorn"}, 1}}, b), Error);
  CHECK_THROWS_AS(MockLvlm(v, {{"s", {"dog"}, 1}, {"s", {"cat"}, 2}}, b), Error);
  b.hidden_dim = 4;
  CHECK_THROWS_AS(MockLvlm(v, {{"s", {"dog"}, 1}}, b), Error);
  b = MockBehavior{};
  b.hallucination_rate = RateCurve::Linear(0.6, 0.2);
  CHECK_THROWS_AS(MockLvlm(v, {{"s", {"dog"}, 1}}, b), Error);
  b = MockBehavior{};
  b.templates = {"This {obj} .", "This {obj} again ."};
  CHECK_THROWS_AS(MockLvlm(v, {{"s", {"dog"}, 1}}, b), Error);
  b.templates = {"This image features a {obj} and a {obj}"};
  CHECK_THROWS_AS(MockLvlm(v, {{"s", {"dog"}, 1}}, b), Error);
  CHECK_THROWS_AS(MockLvlm(v, {{"s", {"dog"}, 1}}, MockBehavior{}).Scene("x"), Error);
}

TEST_CASE("JSON configuration") {
  auto cfg = Json::parse(R"({
    "generate": {"count": 3, "seed": 9},
    "scenes": [{"scene_id": "fixed", "true_objects": ["dog", "cat"], "seed": 2}],
    "behavior": {"hallucination_rate": [[0, 0.1], [1, 0.3]], "hidden_dim": 16}
  })");
  auto m = MockFromJson(cfg);
  CHECK(m->scenes().size() == 4);
  CHECK(m->Info().hidden_dim == 16);
  CHECK(m->behavior().hallucination_rate.At(0.5) == doctest::Approx(0.2));
  auto round = BehaviorFromJson(BehaviorToJson(m->behavior()));
  CHECK(round.hallucination_rate.points() == m->behavior().hallucination_rate.points());
  CHECK_THROWS_AS(MockFromJson(Json::parse("{}")), Error);
}

}  // TEST_SUITE

}  // namespace groundcap::mock
