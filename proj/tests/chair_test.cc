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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "groundcap/chair/chair.h"
#include "groundcap/common/error.h"
#include "testing/chair_corpus.h"

namespace groundcap::chair {

TEST_SUITE("chair") {

TEST_CASE("hand corpus totals") {
  const auto c = testing::HandChairCorpus();
  const auto r = EvaluateChair(c.captions, c.gt, c.synonyms);
  CHECK(r.captions == 10);
  CHECK(r.excluded == 0);
  CHECK(r.hallucinated_captions == 5);
  CHECK(r.mentions == 24);
  CHECK(r.hallucinated_mentions == 6);
  CHECK(r.unmapped_mentions == 1);
  CHECK(r.gt_objects == 28);
  CHECK(r.gt_mentioned == 18);
  CHECK(*r.chair_s == 0.5);
  CHECK(*r.chair_i == 0.25);
  CHECK(*r.recall == 18.0 / 28.0);
  CHECK(*r.length == 8.1);
  CHECK(r.details[5].hallucinated == std::set<std::string>{"bicycle", "elephant"});
  CHECK(FormatChairRow("hand", r) == "hand 50.0 25.0 64.3 8.1");
}

TEST_CASE("caption order does not matter") {
  auto c = testing::HandChairCorpus();
  const auto base = EvaluateChair(c.captions, c.gt, c.synonyms);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(c.captions.begin(), c.captions.end(), rng);
    const auto r = EvaluateChair(c.captions, c.gt, c.synonyms);
    CHECK(r.chair_s == base.chair_s);
    CHECK(r.chair_i == base.chair_i);
    CHECK(r.recall == base.recall);
    CHECK(r.length == base.length);
  }
}

TEST_CASE("definition examples") {
  GroundTruth gt;
  gt.images = {{"a", {"dog"}}, {"b", {"dog", "cat", "bench", "cup"}}};
  SynonymMap syn = SynonymMap::Parse("dog\tdog\ncat\tcat\nbench\tbench\ncup\tcup\nzebra\tzebra\n");
  std::vector<ChairCaption> two = {{"1", "a", "A dog.", {"dog"}}, {"2", "a", "A zebra.", {"zebra"}}};
  CHECK(*EvaluateChair(two, gt, syn).chair_s == 0.5);
  std::vector<ChairCaption> four = {{"1", "b", "x", {"dog", "cat", "bench", "zebra"}}};
  CHECK(*EvaluateChair(four, gt, syn).chair_i == 0.25);
  // A caption without mapped mentions leaves CHAIR_i alone.
  four.push_back({"2", "b", "Nothing here.", {"tree"}});
  const auto r = EvaluateChair(four, gt, syn);
  CHECK(*r.chair_i == 0.25);
  CHECK(*r.chair_s == 0.5);
  // Recall is 1 when every ground-truth category is mentioned.
  std::vector<ChairCaption> all = {{"1", "a", "x", {"dog"}}, {"2", "b", "x", {"dog", "cat", "bench", "cup"}}};
  CHECK(*EvaluateChair(all, gt, syn).recall == 1.0);
}

TEST_CASE("missing ground truth excludes the caption") {
  const auto c = testing::HandChairCorpus();
  auto caps = c.captions;
  caps.push_back({"c11", "img9", "A dog.", {"dog"}});
  const auto r = EvaluateChair(caps, c.gt, c.synonyms);
  CHECK(r.excluded == 1);
  CHECK(r.captions == 10);
  CHECK(*r.chair_s == 0.5);
  CHECK_FALSE(r.details.back().error.empty());
}

TEST_CASE("synonym map loading") {
  const auto m = SynonymMap::Parse("# comment\npuppy\tdog\n\nPuppy\tdog\n");
  CHECK(*m.Category("puppy") == "dog");
  CHECK(*m.Category("PUPPY") == "dog");
  CHECK_FALSE(m.Category("cat").has_value());
  CHECK(SynonymMap::Parse("").size() == 0);
  try {
    SynonymMap::Parse("puppy\tdog\ncat\tcat\npuppy\tcat\n", "syn.tsv");
    FAIL("expected a conflict");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInput);
    CHECK(std::string(e.what()).find("syn.tsv:3") != std::string::npos);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(SynonymMap::Parse("no tab here\n"), Error);
}

TEST_CASE("shipped synonym table") {
  const auto m = DefaultSynonyms();
  CHECK(m.Categories().size() == 80);
  CHECK(*m.Category("man") == "person");
  CHECK(*m.Category("sofa") == "couch");
  CHECK_FALSE(m.Category("tree").has_value());
}

TEST_CASE("percent formatting") {
  ChairResult r;
  r.chair_s = 0.472;
  r.chair_i = 0.136;
  r.recall = 0.795;
  r.length = 88.9;
  CHECK(FormatChairRow("Greedy", r) == "Greedy 47.2 13.6 79.5 88.9");
  CHECK(FormatChairRow("empty", ChairResult{}) == "empty n/a n/a n/a n/a");
}

TEST_CASE("ground truth and caption files") {
  const Json j = {{"img1", {"dog", "cat"}}};
  const auto gt = GroundTruth::FromJson(j);
  CHECK(gt.images.at("img1").size() == 2);
  CHECK(GroundTruth::FromJson(gt.ToJson()).images == gt.images);
  CHECK_THROWS_AS(GroundTruth::FromJson(Json::array()), Error);

  annotate::Lexicon lex;
  lex.Add("dog", "dog");
  lex.Add("dogs", "dog");
  annotate::LexiconExtractor ex(lex);
  const std::vector<Json> docs = {
      {{"caption_id", "a"}, {"image_id", "img1"}, {"text", "Two dogs."}},
      {{"caption_id", "b"}, {"image_id", "img1"}, {"text", ""}},
      {{"caption_id", "c"}, {"image_id", "img1"}, {"text", "x"}, {"mentions", {"cat"}}}};
  const auto caps = CaptionsFromJsonl(docs, ex);
  CHECK(caps[0].mentions == std::vector<std::string>{"dog"});
  CHECK(caps[1].mentions.empty());
  CHECK(caps[2].mentions == std::vector<std::string>{"cat"});
}

}  // TEST_SUITE

}  // namespace groundcap::chair
