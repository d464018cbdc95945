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

#include <set>

#include "doctest.h"
#include "groundcap/annotate/annotator.h"
#include "groundcap/mock/mock_lvlm.h"
#include "testing/annotation_fixtures.h"

namespace groundcap::annotate {
namespace {

constexpr char kExampleCaption[] =
    "The image depicts a large kitchen with a man and a woman preparing food. The man is "
    "standing in front of the stove, while the woman is closer to the refrigerator. There are "
    "several appliances in the kitchen, including an oven, a microwave, and a dishwasher. A "
    "clock can be seen hanging on the wall, adding a sense of time to the scene. Various "
    "utensils are scattered around the kitchen, such as knives, forks, and spoons, suggesting "
    "that they are being used for food preparation. In addition, there are two cups visible in "
    "the scene, one close to the man and the other near the woman. Overall, the kitchen appears "
    "to be bustling with activity as the couple works together to prepare their meal.";

constexpr char kExampleObjects[] =
    "kitchen. man. woman. stove. refrigerator. appliance. oven. microwave. dishwasher. clock. "
    "utensil. knife. fork. spoon. cup.";

std::vector<std::string> UniqueObjects(const std::vector<ObjectMention>& mentions) {
  std::vector<std::string> out;
  for (const auto& m : mentions) {
    if (std::find(out.begin(), out.end(), m.object) == out.end()) out.push_back(m.object);
  }
  return out;
}

// Whitespace split with "." and "," as separate tokens.
std::vector<CaptionToken> SimpleTokens(const std::string& text) {
  std::vector<std::string> texts;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '.' || c == ',') {
      if (!cur.empty()) texts.push_back(cur);
      cur.clear();
      if (c != ' ') texts.push_back(std::string(1, c));
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) texts.push_back(cur);
  auto spans = AlignTokens(text, texts);
  std::vector<CaptionToken> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({-1, texts[i], spans[i]});
  return out;
}

std::vector<Label> LabelText(const std::string& text, const Lexicon& lex,
                             const std::map<std::string, bool>& accurate) {
  auto tokens = SimpleTokens(text);
  LexiconExtractor ex(lex);
  auto mentions = ex.Extract(text);
  MapMentionsToTokens(mentions, tokens);
  for (auto& m : mentions) m.accurate = accurate.at(m.object);
  return LabelTokens(tokens.size(), Segment(tokens), mentions);
}

std::string Render(const std::vector<Label>& labels) {
  std::string s;
  for (Label l : labels) s.push_back(l == Label::kAccurate ? 'A' : 'I');
  return s;
}

struct MockCorpus {
  std::unique_ptr<mock::MockLvlm> mock;
  std::vector<CaptionRecord> captions;
  std::vector<fusion::DetectionScoreRecord> scores;
  std::vector<std::vector<bool>> oracle;  // mock labels per caption, EOS dropped
};

MockCorpus BuildCorpus(double rate, std::size_t scenes, double noise) {
  MockCorpus c;
  mock::MockBehavior b;
  b.hallucination_rate = mock::RateCurve::Linear(rate * 0.5, rate * 1.5 > 1 ? 1.0 : rate * 1.5);
  auto vocab = mock::DefaultMockVocab();
  c.mock = std::make_unique<mock::MockLvlm>(vocab, mock::GenerateScenes(vocab, scenes, 99), b);
  const auto& v = c.mock->vocab().vocab();
  for (const auto& s : c.mock->scenes()) {
    auto ids = PlainGreedyDecode(*c.mock, {s.scene_id, kCaptionPrompt, {}}).tokens;
    if (!ids.empty() && ids.back() == v.eos_id()) ids.pop_back();
    CaptionRecord r{"cap-" + s.scene_id, s.scene_id, v.Detokenize(ids), ids, {}};
    const std::set<std::string> present(s.true_objects.begin(), s.true_objects.end());
    for (TokenId t : ids) {
      if (!c.mock->vocab().IsNoun(t)) continue;
      const auto& obj = v.Text(t);
      c.scores.push_back(fusion::SyntheticDetectorScores(r.caption_id, obj, present.contains(obj),
                                                         noise, 5));
    }
    c.oracle.push_back(c.mock->Labels(s, ids));
    c.captions.push_back(std::move(r));
  }
  return c;
}

}  // namespace

TEST_SUITE("annotate") {

TEST_CASE("lexicon matching with inflection") {
  Lexicon lex;
  lex.Add("dog", "dog");
  lex.Add("dogs", "dog");
  lex.Add("bench", "bench");
  LexiconExtractor ex(lex);
  auto m = ex.Extract("Two dogs near a bench.");
  REQUIRE(m.size() == 2);
  CHECK(m[0].object == "dog");
  CHECK(m[0].char_span == Span{4, 8});
  CHECK(m[1].object == "bench");
  CHECK(m[1].char_span == Span{16, 21});
  CHECK(ex.Extract("Nothing to see here.").empty());
  CHECK_THROWS_AS(ex.Extract("  "), Error);
}

TEST_CASE("longest match wins and case is ignored") {
  auto lex = DefaultLexicon();
  LexiconExtractor ex(lex);
  auto m = ex.Extract("A Fire Hydrant beside two Traffic Lights and a hot dog.");
  CHECK(UniqueObjects(m) == std::vector<std::string>{"fire hydrant", "traffic light", "hot dog"});
  CHECK(lex.Lemma("Knives") == "knife");
  CHECK(lex.Lemma("people") == "person");
}

TEST_CASE("worked example object list") {
  LexiconExtractor ex(DefaultLexicon());
  auto objects = UniqueObjects(ex.Extract(kExampleCaption));
  CHECK(objects == LlmExtractor::ParseObjectList(kExampleObjects));
  CHECK(objects.size() == 15);
}

TEST_CASE("LLM route") {
  std::string seen_prompt;
  LlmExtractor llm([&](const std::string& p) {
    seen_prompt = p;
    return std::string(kExampleObjects) + " giraffe.";
  }, LoadPromptTemplate(), DefaultLexicon());
  auto mentions = llm.Extract(kExampleCaption);
  CHECK(seen_prompt.find(std::string("\"") + kExampleCaption + "\"") != std::string::npos);
  CHECK(seen_prompt.find("{caption}") == std::string::npos);
  CHECK(UniqueObjects(mentions) == LlmExtractor::ParseObjectList(kExampleObjects));
  // "knives" located for "knife".
  bool found_knives = false;
  for (const auto& m : mentions) {
    if (m.object == "knife") {
      found_knives = std::string(kExampleCaption).substr(m.char_span.begin, 6) == "knives";
    }
  }
  CHECK(found_knives);
  CHECK_THROWS_AS(LlmExtractor([](const std::string&) { return ""; }, "no placeholder", {}), Error);
}

TEST_CASE("prompt template asset") {
  const auto t = LoadPromptTemplate();
  CHECK(t.starts_with("You will be provided with an image caption."));
  CHECK(t.find("\"{caption}\"") != std::string::npos);
  CHECK(t.find(kExampleObjects) != std::string::npos);
}

TEST_CASE("batch extraction keeps partial results on failure") {
  int calls = 0;
  LlmExtractor llm([&](const std::string&) -> std::string {
    if (++calls == 3) throw Error(ErrorCode::kTransport, "connection reset");
    return "dog.";
  }, LoadPromptTemplate(), DefaultLexicon());
  std::vector<std::string> caps = {"A dog.", "Two dogs.", "A third dog.", "More dogs."};
  try {
    ExtractAll(llm, caps);
    FAIL("expected an extraction error");
  } catch (const ExtractionError& e) {
    CHECK(e.code() == ErrorCode::kTransport);
    REQUIRE(e.completed().size() == 2);
    CHECK(e.completed()[1][0].object == "dog");
  }
}

TEST_CASE("phrase reset example") {
  auto lex = DefaultLexicon();
  const std::string text = "A man holds an umbrella, standing near a fire hydrant.";
  auto labels = LabelText(text, lex, {{"man", false}, {"umbrella", true}, {"fire hydrant", false}});
  // Tokens: A man holds an umbrella | , | standing near a fire hydrant | .
  CHECK(Render(labels) == "AAAAAIIIIIII");
  auto no_man = LabelText(text, lex, {{"man", true}, {"umbrella", true}, {"fire hydrant", false}});
  CHECK(Render(no_man) == "AAAAAIIIIIII");
  CHECK(Render(LabelText("A man holds an umbrella.", lex, {{"man", true}, {"umbrella", true}})) ==
        "AAAAAA");
  CHECK(Render(LabelText("A man holds an umbrella.", lex, {{"man", false}, {"umbrella", false}})) ==
        "IIIIII");
}

TEST_CASE("rule order is fixed") {
  auto lex = DefaultLexicon();
  const std::string text = "A dog, a zebra and a cat.";
  const std::map<std::string, bool> acc = {{"dog", true}, {"zebra", false}, {"cat", true}};
  auto tokens = SimpleTokens(text);
  LexiconExtractor ex(lex);
  auto mentions = ex.Extract(text);
  MapMentionsToTokens(mentions, tokens);
  for (auto& m : mentions) m.accurate = acc.at(m.object);
  const auto seg = Segment(tokens);
  auto labels = LabelTokens(tokens.size(), seg, mentions);

  // Rule 3 before rule 2, computed independently.
  std::vector<Label> swapped(tokens.size(), Label::kAccurate);
  for (const auto& m : mentions) {
    if (!*m.accurate) continue;
    for (const auto& p : seg.phrases) {
      if (p.Contains(m.token_span)) std::fill(swapped.begin() + p.begin, swapped.begin() + p.end, Label::kAccurate);
    }
  }
  for (const auto& m : mentions) {
    if (*m.accurate) continue;
    for (const auto& s : seg.sentences) {
      if (s.Contains(m.token_span)) std::fill(swapped.begin() + s.begin, swapped.begin() + s.end, Label::kInaccurate);
    }
  }
  CHECK(Render(labels) == "AAIAAAAAI");
  CHECK(Render(swapped) == "IIIIIIIII");
  CHECK(labels != swapped);
}

TEST_CASE("segmentation") {
  auto tokens = SimpleTokens("A dog, a cat. A bird");
  auto seg = Segment(tokens);
  CHECK(seg.sentences == std::vector<Span>{{0, 6}, {6, 8}});
  CHECK(seg.phrases == std::vector<Span>{{0, 2}, {3, 5}, {6, 8}});
}

TEST_CASE("mentions outside sentences or unflagged") {
  auto tokens = SimpleTokens("A dog.");
  ObjectMention m{"dog", {2, 5}, {1, 2}, {}, {}};
  CHECK_THROWS_AS(LabelTokens(tokens.size(), Segment(tokens), std::vector{m}), Error);
  m.accurate = false;
  m.token_span = {5, 6};
  CHECK_THROWS_AS(LabelTokens(tokens.size(), Segment(tokens), std::vector{m}), Error);
}

TEST_CASE("token alignment") {
  std::vector<std::string> pieces = {"\xE2\x96\x81" "The", "\xE2\x96\x81" "dog", "s", "."};
  auto spans = AlignTokens("The dogs.", pieces);
  CHECK(spans == std::vector<Span>{{0, 3}, {4, 7}, {7, 8}, {8, 9}});
  CHECK_THROWS_AS(AlignTokens("The dogs.", std::vector<std::string>{"The", "cat"}), Error);
}

TEST_CASE("lexicon loading errors") {
  CHECK(Lexicon::Parse("").empty());
  try {
    Lexicon::Parse("# header\npuppy\tdog\npuppy\tcat\n");
    FAIL("expected a conflict");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(Lexicon::Parse("no tab here\n"), Error);
}

TEST_CASE("mock vocabulary is covered by the shipped lexicon") {
  auto lex = DefaultLexicon();
  auto mv = mock::DefaultMockVocab();
  for (const auto& n : mv.nouns()) {
    INFO(n);
    CHECK(lex.Lemma(n) == n);
  }
  for (const auto& t : mv.vocab().tokens()) {
    if (mv.IsNoun(mv.vocab().Id(t))) continue;
    INFO(t);
    CHECK_FALSE(lex.Lemma(t).has_value());
  }
}

TEST_CASE("zero-injection mock corpus is fully accurate") {
  auto c = BuildCorpus(0.0, 30, 0.0);
  LexiconExtractor ex(DefaultLexicon());
  auto out = AnnotateCorpus(c.captions, ex, &c.mock->vocab().vocab(), fusion::FusionModel::Default(),
                            c.scores);
  CHECK(out.summary.captions == 30);
  CHECK(out.summary.tokens > 0);
  CHECK(out.summary.accurate_fraction() == 1.0);
  CHECK(out.summary.mentions_unscored == 0);
}

TEST_CASE("annotator agrees with the mock oracle on noise-free scores") {
  auto c = BuildCorpus(0.35, 60, 0.0);
  LexiconExtractor ex(DefaultLexicon());
  auto out = AnnotateCorpus(c.captions, ex, &c.mock->vocab().vocab(), fusion::FusionModel::Default(),
                            c.scores);
  std::size_t inaccurate = 0;
  for (std::size_t i = 0; i < out.captions.size(); ++i) {
    const auto& a = out.captions[i];
    std::vector<bool> got;
    for (Label l : a.labels) got.push_back(l == Label::kAccurate);
    CHECK(got == c.oracle[i]);
    inaccurate += std::count(got.begin(), got.end(), false);
    // Every INACCURATE token sits in a sentence with an inaccurate mention.
    for (const auto& s : a.segmentation.sentences) {
      bool has_bad = false;
      for (const auto& m : a.mentions) has_bad |= s.Contains(m.token_span) && m.accurate == false;
      for (std::size_t t = s.begin; t < s.end; ++t) {
        if (a.labels[t] == Label::kInaccurate) CHECK(has_bad);
      }
    }
  }
  CHECK(inaccurate > 0);
}

TEST_CASE("noisy scores stay close to the mock oracle") {
  auto c = BuildCorpus(0.3, 120, 0.15);
  LexiconExtractor ex(DefaultLexicon());
  auto out = AnnotateCorpus(c.captions, ex, &c.mock->vocab().vocab(), fusion::FusionModel::Default(),
                            c.scores);
  std::size_t oracle_bad = 0, total = 0;
  for (const auto& o : c.oracle) {
    oracle_bad += std::count(o.begin(), o.end(), false);
    total += o.size();
  }
  const double oracle_frac = double(oracle_bad) / double(total);
  const double got_frac = double(out.summary.inaccurate_tokens) / double(out.summary.tokens);
  CHECK(std::abs(got_frac - oracle_frac) <= 0.05);
}

TEST_CASE("labeling is idempotent through JSON") {
  auto c = BuildCorpus(0.4, 10, 0.0);
  LexiconExtractor ex(DefaultLexicon());
  auto out = AnnotateCorpus(c.captions, ex, &c.mock->vocab().vocab(), fusion::FusionModel::Default(),
                            c.scores);
  for (const auto& a : out.captions) {
    auto back = AnnotatedFromJson(Json::parse(AnnotatedToJson(a).dump()));
    CHECK(back.labels == a.labels);
    std::vector<ObjectMention> scored;
    for (const auto& m : back.mentions) {
      if (m.accurate) scored.push_back(m);
    }
    CHECK(LabelTokens(back.tokens.size(), Segment(back.tokens), scored) == a.labels);
    CHECK(AnnotatedToJson(back) == AnnotatedToJson(a));
  }
}

TEST_CASE("corpus edge cases") {
  LexiconExtractor ex(DefaultLexicon());
  std::vector<CaptionRecord> none;
  auto out = AnnotateCorpus(none, ex, nullptr, fusion::FusionModel::Default(), {});
  CHECK(out.captions.empty());
  CHECK(out.summary.tokens == 0);
  CHECK(out.summary.accurate_fraction() == 0.0);

  std::vector<CaptionRecord> bad = {{"c1", "i", "A dog.", {}, {}}, {"c2", "i", "A cat.", {}, {}}};
  try {
    AnnotateCorpus(bad, ex, nullptr, fusion::FusionModel::Default(), {});
    FAIL("expected an annotation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAnnotation);
    CHECK(std::string(e.what()).find("c1, c2") != std::string::npos);
  }

  // An unscored mention does not taint its sentence.
  std::vector<CaptionRecord> one = {{"c", "i", "A zebra and a dog.", {}, {"A", "zebra", "and", "a", "dog", "."}}};
  std::vector<fusion::DetectionScoreRecord> scores = {{"c", "dog", 0.9, 0.9, 0.9, {}}};
  auto r = AnnotateCorpus(one, ex, nullptr, fusion::FusionModel::Default(), scores);
  CHECK(r.summary.mentions_unscored == 1);
  CHECK(r.summary.accurate_fraction() == 1.0);
}

TEST_CASE("hand-labeled fixtures") {
  const auto fixtures = testing::AnnotationFixtures();
  REQUIRE(fixtures.size() == 25);
  std::vector<CaptionRecord> captions;
  std::vector<fusion::DetectionScoreRecord> scores;
  testing::FixtureCorpus(fixtures, &captions, &scores);
  LexiconExtractor ex(DefaultLexicon());
  const auto out = AnnotateCorpus(captions, ex, nullptr, fusion::FusionModel::Default(), scores);
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    CAPTURE(fixtures[i].name);
    CHECK(testing::RenderLabels(out.captions[i].labels) == fixtures[i].expected);
    std::set<std::string> seen;
    for (const auto& m : out.captions[i].mentions) seen.insert(m.object);
    std::set<std::string> listed;
    for (const auto& [o, s] : fixtures[i].objects) listed.insert(o);
    CHECK(seen == listed);
  }
  const auto again = AnnotateCorpus(captions, ex, nullptr, fusion::FusionModel::Default(), scores);
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    CHECK(again.captions[i].labels == out.captions[i].labels);
  }
}

}  // TEST_SUITE

}  // namespace groundcap::annotate
