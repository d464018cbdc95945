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

#include "groundcap/protocol/backend.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "groundcap/common/error.h"

namespace groundcap {
namespace {

void CheckStepResult(const StepResult& r, std::size_t k, std::size_t dim) {
  if (r.top_tokens.size() != k) {
    throw Error(ErrorCode::kProtocol, "backend returned " +
                                          std::to_string(r.top_tokens.size()) +
                                          " tokens for k=" + std::to_string(k));
  }
  for (std::size_t i = 0; i < r.top_tokens.size(); ++i) {
    double p = r.top_tokens[i].probability;
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kProtocol, "probability outside [0,1]");
    }
    if (i > 0) {
      const auto& prev = r.top_tokens[i - 1];
      if (prev.probability < p ||
          (prev.probability == p && prev.token > r.top_tokens[i].token)) {
        throw Error(ErrorCode::kProtocol, "top-k tokens are not in canonical order");
      }
    }
  }
  if (r.hidden.size() != dim) {
    throw Error(ErrorCode::kProtocol, "hidden state dimension mismatch");
  }
}

}  // namespace

StepResult Backend::TopKNext(const SequenceContext& ctx, std::size_t k,
                             bool with_image) {
  ctx.Validate();
  const BackendInfo& info = Info();
  if (k < 1 || k > info.vocab.size()) {
    throw Error(ErrorCode::kInput, "k=" + std::to_string(k) +
                                       " outside [1, vocabulary size]");
  }
  StepResult r = DoTopKNext(ctx, k, with_image);
  CheckStepResult(r, k, info.hidden_dim);
  return r;
}

GreedyResult Backend::GreedyExtend(const SequenceContext& ctx,
                                   const std::vector<TokenId>& stop_tokens,
                                   bool with_image) {
  ctx.Validate();
  const BackendInfo& info = Info();
  auto has = [&](TokenId t) {
    return std::find(stop_tokens.begin(), stop_tokens.end(), t) != stop_tokens.end();
  };
  if (!has(info.period_id) || !has(info.eos_id)) {
    throw Error(ErrorCode::kInput, "stop tokens must include the period and EOS");
  }
  const std::size_t budget = kMaxSequenceLen - ctx.prefix_tokens.size();
  if (budget == 0) return GreedyResult{{}, true};
  GreedyResult r = DoGreedyExtend(ctx, stop_tokens, with_image, budget);
  if (r.tokens.size() > budget) {
    r.tokens.resize(budget);
    r.truncated = true;
  }
  if (r.tokens.empty() || !has(r.tokens.back())) r.truncated = true;
  return r;
}

std::vector<std::vector<float>> Backend::FinalHiddenStates(
    const SequenceContext& ctx, std::span<const TokenId> tokens, bool with_image) {
  ctx.Validate();
  if (tokens.empty()) throw Error(ErrorCode::kInput, "no tokens to encode");
  if (ctx.prefix_tokens.size() + tokens.size() > kMaxSequenceLen) {
    throw Error(ErrorCode::kInput, "prefix + tokens exceed the sequence cap");
  }
  auto states = DoFinalHiddenStates(ctx, tokens, with_image);
  if (states.size() != tokens.size()) {
    throw Error(ErrorCode::kProtocol, "hidden_states returned " +
                                          std::to_string(states.size()) +
                                          " vectors for " +
                                          std::to_string(tokens.size()) + " tokens");
  }
  for (const auto& s : states) {
    if (s.size() != states.front().size()) {
      throw Error(ErrorCode::kProtocol, "hidden state dimension varies across positions");
    }
  }
  return states;
}

bool Backend::DiscriminativeQuery(const std::string& image_ref,
                                  const std::string& object) {
  return ParseYesNo(DiscriminativeReply(image_ref, object));
}

std::string Backend::DiscriminativeReply(const std::string& image_ref,
                                         const std::string& object) {
  if (object.empty()) throw Error(ErrorCode::kInput, "empty object name");
  return DoDiscriminativeQuery(image_ref, object, DiscriminativeQuestion(object));
}

std::string DiscriminativeQuestion(const std::string& object) {
  const char first = static_cast<char>(std::tolower(static_cast<unsigned char>(object.front())));
  const bool vowel = std::string_view("aeiou").find(first) != std::string_view::npos;
  return std::string("Is there ") + (vowel ? "an " : "a ") + object +
         " in the image? Answer with only Yes or No.";
}

bool ParseYesNo(const std::string& reply) {
  std::string s;
  for (char c : reply) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n.");
  std::string core = b == std::string::npos || e < b ? "" : s.substr(b, e - b + 1);
  if (core == "yes") return true;
  if (core == "no") return false;
  throw Error(ErrorCode::kParse, "non-conforming yes/no reply", reply);
}

GreedyResult PlainGreedyDecode(Backend& backend, const SequenceContext& ctx) {
  const BackendInfo& info = backend.Info();
  SequenceContext cur = ctx;
  GreedyResult out;
  const std::vector<TokenId> stops = {info.period_id, info.eos_id};
  while (true) {
    GreedyResult step = backend.GreedyExtend(cur, stops, /*with_image=*/true);
    out.tokens.insert(out.tokens.end(), step.tokens.begin(), step.tokens.end());
    cur.prefix_tokens.insert(cur.prefix_tokens.end(), step.tokens.begin(),
                             step.tokens.end());
    if (step.truncated) {
      out.truncated = true;
      break;
    }
    if (step.tokens.back() == info.eos_id) break;
  }
  return out;
}

}  // namespace groundcap
