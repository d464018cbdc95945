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

#include "groundcap/protocol/conformance.h"

#include <cmath>
#include <cstring>
#include <functional>

#include "groundcap/common/error.h"

namespace groundcap {
namespace {

bool BitEqual(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

}  // namespace

std::vector<ConformanceCheck> RunConformanceSuite(Backend& backend,
                                                  const ConformanceOptions& options) {
  std::vector<ConformanceCheck> checks;
  auto run = [&](const std::string& name, const std::function<std::string()>& body) {
    ConformanceCheck c{name, false, {}};
    try {
      c.detail = body();
      c.passed = c.detail.empty();
    } catch (const std::exception& e) {
      c.detail = std::string("threw: ") + e.what();
    }
    checks.push_back(std::move(c));
  };

  const BackendInfo& info = backend.Info();
  SequenceContext ctx;
  ctx.image_ref = options.image_ref;

  run("info", [&]() -> std::string {
    if (info.vocab.empty()) return "empty vocabulary";
    if (info.hidden_dim == 0) return "zero hidden_dim";
    for (TokenId id : {info.period_id, info.comma_id, info.eos_id}) {
      if (id < 0 || static_cast<std::size_t>(id) >= info.vocab.size()) {
        return "special token id out of range";
      }
    }
    return {};
  });

  run("top_k_prefix_stability", [&]() -> std::string {
    auto small = backend.TopKNext(ctx, 1, true);
    auto large = backend.TopKNext(ctx, std::min<std::size_t>(5, info.vocab.size()), true);
    if (small.top_tokens.front() != large.top_tokens.front()) return "k=1 is not a prefix of k=5";
    return {};
  });

  run("full_distribution_normalized", [&]() -> std::string {
    for (bool with_image : {true, false}) {
      if (!with_image && !info.supports_without_image) continue;
      auto r = backend.TopKNext(ctx, info.vocab.size(), with_image);
      double sum = 0.0;
      for (const auto& t : r.top_tokens) sum += t.probability;
      if (std::abs(sum - 1.0) > 1e-6) return "probabilities sum to " + std::to_string(sum);
    }
    return {};
  });

  run("top_k_repeatable", [&]() -> std::string {
    auto a = backend.TopKNext(ctx, 3, true);
    auto b = backend.TopKNext(ctx, 3, true);
    if (a.top_tokens != b.top_tokens || !BitEqual(a.hidden, b.hidden)) {
      return "identical requests gave different results";
    }
    return {};
  });

  std::vector<TokenId> greedy;
  run("greedy_matches_iterated_top1", [&]() -> std::string {
    const std::vector<TokenId> stops = {info.period_id, info.eos_id};
    auto g = backend.GreedyExtend(ctx, stops, true);
    greedy = g.tokens;
    SequenceContext cur = ctx;
    for (std::size_t i = 0; i < g.tokens.size(); ++i) {
      auto step = backend.TopKNext(cur, 1, true);
      if (step.top_tokens.front().token != g.tokens[i]) {
        return "mismatch at step " + std::to_string(i);
      }
      cur.prefix_tokens.push_back(g.tokens[i]);
    }
    if (!g.truncated && g.tokens.back() != info.period_id && g.tokens.back() != info.eos_id) {
      return "untruncated continuation does not end in a stop token";
    }
    auto again = backend.GreedyExtend(ctx, stops, true);
    if (again.tokens != g.tokens) return "greedy_extend is not repeatable";
    return {};
  });

  run("hidden_states_shape_and_repeatability", [&]() -> std::string {
    std::vector<TokenId> tokens = greedy;
    if (tokens.empty()) tokens = {info.period_id};
    for (bool with_image : {true, false}) {
      if (!with_image && !info.supports_without_image) continue;
      auto a = backend.FinalHiddenStates(ctx, tokens, with_image);
      auto b = backend.FinalHiddenStates(ctx, tokens, with_image);
      if (a.size() != tokens.size()) return "length not preserved";
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != info.hidden_dim) return "dimension differs from hidden_dim";
        if (!BitEqual(a[i], b[i])) return "hidden states not bit-identical on repeat";
      }
    }
    return {};
  });

  run("sequence_cap", [&]() -> std::string {
    SequenceContext full = ctx;
    full.prefix_tokens.assign(kMaxSequenceLen, info.period_id);
    auto g = backend.GreedyExtend(full, {info.period_id, info.eos_id}, true);
    if (!g.tokens.empty() || !g.truncated) return "full prefix should yield empty, truncated";
    return {};
  });

  run("discriminative_reply", [&]() -> std::string {
    bool a = backend.DiscriminativeQuery(options.image_ref, options.probe_object);
    bool b = backend.DiscriminativeQuery(options.image_ref, options.probe_object);
    if (a != b) return "discriminative answer not repeatable";
    return {};
  });

  return checks;
}

}  // namespace groundcap
