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

#ifndef GROUNDCAP_TESTS_TESTING_MOCK_FEATURES_H_
#define GROUNDCAP_TESTS_TESTING_MOCK_FEATURES_H_

#include <vector>

#include "groundcap/mock/mock_lvlm.h"
#include "groundcap/protocol/types.h"

namespace groundcap::testing {

// Greedy caption of every scene (EOS dropped) with both hidden-state passes
// and the mock's own labels. Stops once `max_pairs` pairs are collected.
inline std::vector<HiddenStatePair> MockHiddenStatePairs(mock::MockLvlm& m,
                                                         std::size_t max_pairs) {
  std::vector<HiddenStatePair> out;
  const TokenId eos = m.Info().eos_id;
  for (const auto& s : m.scenes()) {
    const SequenceContext ctx{s.scene_id, kCaptionPrompt, {}};
    auto ids = PlainGreedyDecode(m, ctx).tokens;
    if (!ids.empty() && ids.back() == eos) ids.pop_back();
    const auto labels = m.Labels(s, ids);
    const auto x1 = m.FinalHiddenStates(ctx, ids, true);
    const auto x2 = m.FinalHiddenStates(ctx, ids, false);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out.push_back({x1[i], x2[i], i, ids[i], labels[i]});
      if (out.size() == max_pairs) return out;
    }
  }
  return out;
}

}  // namespace groundcap::testing

#endif  // GROUNDCAP_TESTS_TESTING_MOCK_FEATURES_H_
