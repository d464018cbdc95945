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

#ifndef GROUNDCAP_TESTS_TESTING_SCRIPTED_BACKEND_H_
#define GROUNDCAP_TESTS_TESTING_SCRIPTED_BACKEND_H_

#include <algorithm>
#include <atomic>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "groundcap/protocol/backend.h"
#include "groundcap/protocol/vocabulary.h"

namespace groundcap::testing {

// Backend whose next-token distribution is an arbitrary function of the
// prefix. Hidden states are a function of (token, position, with_image).
class ScriptedBackend : public Backend {
 public:
  using DistFn = std::function<std::vector<double>(const std::vector<TokenId>&, bool)>;
  using HiddenFn = std::function<std::vector<float>(TokenId, std::size_t, bool)>;

  ScriptedBackend(Vocabulary vocab, DistFn dist, std::size_t hidden_dim = 4)
      : vocab_(std::move(vocab)), dist_(std::move(dist)) {
    info_.name = "scripted";
    info_.vocab = vocab_.tokens();
    info_.period_id = vocab_.period_id();
    info_.comma_id = vocab_.comma_id();
    info_.eos_id = vocab_.eos_id();
    info_.hidden_dim = hidden_dim;
    info_.supports_without_image = true;
    hidden_ = [hidden_dim](TokenId t, std::size_t pos, bool with_image) {
      std::vector<float> h(hidden_dim, 0.0f);
      h[0] = static_cast<float>(t);
      h[1 % hidden_dim] = static_cast<float>(pos);
      if (with_image) h[hidden_dim - 1] += 1.0f;
      return h;
    };
  }

  const BackendInfo& Info() const override { return info_; }
  const Vocabulary& vocab() const { return vocab_; }
  void set_hidden(HiddenFn fn) { hidden_ = std::move(fn); }
  void set_reply(std::string reply) { reply_ = std::move(reply); }
  void set_supports_without_image(bool v) { info_.supports_without_image = v; }
  int top_k_calls() const { return top_k_calls_; }

  // Distribution with `probs` on the named tokens and zero elsewhere.
  std::vector<double> Dist(std::initializer_list<std::pair<const char*, double>> probs) const {
    std::vector<double> d(vocab_.size(), 0.0);
    for (const auto& [w, p] : probs) d[vocab_.Id(w)] = p;
    return d;
  }

 protected:
  StepResult DoTopKNext(const SequenceContext& ctx, std::size_t k, bool with_image) override {
    ++top_k_calls_;
    const auto d = dist_(ctx.prefix_tokens, with_image);
    std::vector<TokenId> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](TokenId a, TokenId b) { return d[a] > d[b]; });
    StepResult r;
    for (std::size_t i = 0; i < k; ++i) r.top_tokens.push_back({order[i], d[order[i]]});
    const auto& p = ctx.prefix_tokens;
    r.hidden = hidden_(p.empty() ? -1 : p.back(), p.empty() ? 0 : p.size() - 1, with_image);
    return r;
  }

  GreedyResult DoGreedyExtend(const SequenceContext& ctx, const std::vector<TokenId>& stops,
                              bool with_image, std::size_t max_new) override {
    GreedyResult r;
    auto prefix = ctx.prefix_tokens;
    while (r.tokens.size() < max_new) {
      const auto d = dist_(prefix, with_image);
      const auto next = static_cast<TokenId>(std::max_element(d.begin(), d.end()) - d.begin());
      r.tokens.push_back(next);
      prefix.push_back(next);
      if (std::find(stops.begin(), stops.end(), next) != stops.end()) return r;
    }
    r.truncated = true;
    return r;
  }

  std::vector<std::vector<float>> DoFinalHiddenStates(const SequenceContext& ctx,
                                                      std::span<const TokenId> tokens,
                                                      bool with_image) override {
    std::vector<std::vector<float>> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      out.push_back(hidden_(tokens[i], ctx.prefix_tokens.size() + i, with_image));
    }
    return out;
  }

  std::string DoDiscriminativeQuery(const std::string&, const std::string&,
                                    const std::string&) override {
    return reply_;
  }

 private:
  Vocabulary vocab_;
  DistFn dist_;
  HiddenFn hidden_;
  BackendInfo info_;
  std::string reply_ = "Yes";
  std::atomic<int> top_k_calls_{0};
};

}  // namespace groundcap::testing

#endif  // GROUNDCAP_TESTS_TESTING_SCRIPTED_BACKEND_H_
