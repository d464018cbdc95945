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

#ifndef GROUNDCAP_TESTS_TESTING_CHAIR_CORPUS_H_
#define GROUNDCAP_TESTS_TESTING_CHAIR_CORPUS_H_

#include <vector>

#include "groundcap/chair/chair.h"

namespace groundcap::testing {

// Ten captions over five images, with the expected totals worked out by hand
// below.
//
//   caption  mapped categories            hallucinated    gt  gt hit  words
//   c1       person dog bench             -                3   3       8
//   c2       dog bicycle  (tree unmapped) bicycle          3   1      10
//   c3       cat couch tv                 tv               2   2       9
//   c4       cat couch                    -                2   2       8
//   c5       car bus traffic light        -                4   3       9
//   c6       person bicycle elephant      bicycle elephant 4   1       8
//   c7       pizza dining table cup fork  fork             3   3      11
//   c8       (none)                       -                3   0       5
//   c9       zebra giraffe                -                2   2       7
//   c10      elephant zebra               elephant         2   1       6
//
//   CHAIR_s = 5/10, CHAIR_i = 6/24, recall = 18/28, length = 81/10.
struct ChairCorpus {
  chair::GroundTruth gt;
  chair::SynonymMap synonyms;
  std::vector<chair::ChairCaption> captions;
};

inline ChairCorpus HandChairCorpus() {
  ChairCorpus c;
  c.gt.images = {{"img1", {"dog", "person", "bench"}},
                 {"img2", {"cat", "couch"}},
                 {"img3", {"car", "bus", "traffic light", "person"}},
                 {"img4", {"pizza", "dining table", "cup"}},
                 {"img5", {"zebra", "giraffe"}}};
  c.synonyms = chair::SynonymMap::Parse(
      "puppy\tdog\ndog\tdog\nman\tperson\nwoman\tperson\nbench\tbench\ncat\tcat\n"
      "kitten\tcat\nsofa\tcouch\ncouch\tcouch\ncar\tcar\nbus\tbus\n"
      "traffic light\ttraffic light\npizza\tpizza\ntable\tdining table\ncup\tcup\n"
      "mug\tcup\nzebra\tzebra\ngiraffe\tgiraffe\nelephant\telephant\ntv\ttv\n"
      "bicycle\tbicycle\nfork\tfork\n");
  c.captions = {
      {"c1", "img1", "A man walks a puppy past a bench.", {"man", "puppy", "bench"}},
      {"c2", "img1", "A dog sits next to a bicycle and a tree.", {"dog", "bicycle", "tree"}},
      {"c3", "img2", "A kitten sleeps on a sofa near a tv.", {"kitten", "sofa", "tv"}},
      {"c4", "img2", "A cat and another cat on a couch.", {"cat", "cat", "couch"}},
      {"c5", "img3", "Cars and a bus wait at a traffic light.", {"car", "bus", "traffic light"}},
      {"c6", "img3", "A woman rides a bicycle beside an elephant.", {"woman", "bicycle", "elephant"}},
      {"c7", "img4", "A pizza on a table with a mug and a fork.", {"pizza", "table", "mug", "fork"}},
      {"c8", "img4", "Nothing but a blurry photo.", {}},
      {"c9", "img5", "A zebra and a giraffe graze together.", {"zebra", "giraffe"}},
      {"c10", "img5", "An elephant walks past a zebra.", {"elephant", "zebra"}},
  };
  return c;
}

}  // namespace groundcap::testing

#endif  // GROUNDCAP_TESTS_TESTING_CHAIR_CORPUS_H_
