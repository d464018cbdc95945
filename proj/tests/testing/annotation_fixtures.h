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


#ifndef GROUNDCAP_TESTS_TESTING_ANNOTATION_FIXTURES_H_
#define GROUNDCAP_TESTS_TESTING_ANNOTATION_FIXTURES_H_

#include <map>
#include <string>
#include <vector>

#include "groundcap/annotate/annotator.h"
#include "groundcap/fusion/fusion.h"

namespace groundcap::testing {

// Hand-labeled captions. `objects` gives each mentioned lemma's existence
// ('A' present, 'I' absent, '-' no detector score); `expected` has one
// letter per token (words, "." and "," are tokens).
struct AnnotationFixture {
  std::string name;
  std::string text;
  std::map<std::string, char> objects;
  std::string expected;
};

inline std::vector<AnnotationFixture> AnnotationFixtures() {
  return {
      {"all present", "A dog sits on a bench.", {{"dog", 'A'}, {"bench", 'A'}}, "AAAAAAA"},
      {"present object resets its phrase", "A dog sits on a bench.",
       {{"dog", 'A'}, {"bench", 'I'}}, "AAAAAAI"},
      {"all absent", "A dog sits on a bench.", {{"dog", 'I'}, {"bench", 'I'}}, "IIIIIII"},
      {"single absent object", "A cat sleeps.", {{"cat", 'I'}}, "IIII"},
      {"no objects", "It is sunny today.", {}, "AAAAA"},
      {"second sentence absent", "A cat sleeps. A zebra runs.", {{"cat", 'A'}, {"zebra", 'I'}},
       "AAAAIIII"},
      {"reset stops at the comma", "A man holds an umbrella, standing near a fire hydrant.",
       {{"man", 'I'}, {"umbrella", 'A'}, {"fire hydrant", 'I'}}, "AAAAAIIIIIII"},
      {"reset covers a conjunction phrase", "A dog, a zebra and a cat.",
       {{"dog", 'A'}, {"zebra", 'I'}, {"cat", 'A'}}, "AAIAAAAAI"},
      {"comma isolates the absent object", "A dog, a zebra, and a cat.",
       {{"dog", 'A'}, {"zebra", 'I'}, {"cat", 'A'}}, "AAIIIIAAAI"},
      {"middle sentence absent", "A bus stops. A giraffe eats. A car waits.",
       {{"bus", 'A'}, {"giraffe", 'I'}, {"car", 'A'}}, "AAAAIIIIAAAA"},
      {"repeated present object", "A dog and another dog.", {{"dog", 'A'}}, "AAAAAA"},
      {"plural surfaces", "Two dogs play with three cats.", {{"dog", 'A'}, {"cat", 'I'}},
       "AAAAAAI"},
      {"absent first phrase", "Two dogs play, three cats rest.", {{"dog", 'I'}, {"cat", 'A'}},
       "IIIIAAAI"},
      {"multi-word objects", "A fire hydrant stands near a teddy bear.",
       {{"fire hydrant", 'A'}, {"teddy bear", 'I'}}, "AAAAAAAAI"},
      {"case is ignored", "The Dog runs. The HORSE jumps.", {{"dog", 'A'}, {"horse", 'I'}},
       "AAAAIIII"},
      {"absent list", "A knife, a fork, a spoon.",
       {{"knife", 'I'}, {"fork", 'I'}, {"spoon", 'I'}}, "IIIIIIIII"},
      {"mixed list", "A knife, a fork, a spoon.", {{"knife", 'A'}, {"fork", 'I'}, {"spoon", 'A'}},
       "AAIIIIAAI"},
      {"reset never crosses sentences", "A cat sleeps on a bed. A dog barks, a cat purrs.",
       {{"cat", 'A'}, {"bed", 'A'}, {"dog", 'I'}}, "AAAAAAAIIIIAAAI"},
      {"unscored mention is ignored", "A dog sits near a vase.", {{"dog", 'A'}, {"vase", '-'}},
       "AAAAAAA"},
      {"unscored mention does not reset", "A vase is on a table.",
       {{"vase", '-'}, {"table", 'I'}}, "IIIIIII"},
      {"four phrases", "In the kitchen, a man cooks, a woman reads, and a child plays.",
       {{"kitchen", 'A'}, {"man", 'A'}, {"woman", 'I'}, {"child", 'A'}}, "AAAIAAAIIIIIAAAAI"},
      {"repeated absent object", "A bear and a bear.", {{"bear", 'I'}}, "IIIIII"},
      {"clean sentence after a mixed one", "A boat floats, a bird flies. It is calm.",
       {{"boat", 'I'}, {"bird", 'A'}}, "IIIIAAAIAAAA"},
      {"everything present", "A laptop, a mouse and a keyboard. A cup.",
       {{"laptop", 'A'}, {"mouse", 'A'}, {"keyboard", 'A'}, {"cup", 'A'}}, "AAAAAAAAAAAA"},
      {"present and absent in one phrase", "A toilet next to a sink, near a towel.",
       {{"toilet", 'I'}, {"sink", 'A'}, {"towel", 'I'}}, "AAAAAAIIIII"},
  };
}

// Whitespace split with "." and "," as separate tokens.
inline std::vector<std::string> FixtureTokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '.' || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
      if (c != ' ') out.push_back(std::string(1, c));
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Caption records and detector scores that make each present object score
// (1, 1, 1) and each absent one (0, 0, 0).
inline void FixtureCorpus(const std::vector<AnnotationFixture>& fixtures,
                          std::vector<annotate::CaptionRecord>* captions,
                          std::vector<fusion::DetectionScoreRecord>* scores) {
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& f = fixtures[i];
    const std::string id = "fixture-" + std::to_string(i);
    captions->push_back({id, id, f.text, {}, FixtureTokens(f.text)});
    for (const auto& [object, state] : f.objects) {
      if (state == '-') continue;
      const double c = state == 'A' ? 1.0 : 0.0;
      scores->push_back({id, object, c, c, c, state == 'A' ? 1 : 0});
    }
  }
}

inline std::string RenderLabels(const std::vector<annotate::Label>& labels) {
  std::string s;
  for (auto l : labels) s.push_back(l == annotate::Label::kAccurate ? 'A' : 'I');
  return s;
}

}  // namespace groundcap::testing

#endif  // GROUNDCAP_TESTS_TESTING_ANNOTATION_FIXTURES_H_
