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

#include "groundcap/protocol/vocabulary.h"

#include "groundcap/common/error.h"

namespace groundcap {

void SequenceContext::Validate() const {
  if (prompt.empty()) throw Error(ErrorCode::kInput, "prompt must be non-empty");
  if (prefix_tokens.size() > kMaxSequenceLen) {
    throw Error(ErrorCode::kInput,
                "prefix of " + std::to_string(prefix_tokens.size()) +
                    " tokens exceeds the " + std::to_string(kMaxSequenceLen) +
                    "-token cap");
  }
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::string_view period,
                       std::string_view comma, std::string_view eos)
    : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw Error(ErrorCode::kConfiguration, "duplicate token '" + tokens_[i] + "'");
    }
  }
  auto special = [&](std::string_view t) {
    auto it = index_.find(std::string(t));
    if (it == index_.end()) {
      throw Error(ErrorCode::kConfiguration,
                  "vocabulary lacks special token '" + std::string(t) + "'");
    }
    return it->second;
  };
  period_id_ = special(period);
  comma_id_ = special(comma);
  eos_id_ = special(eos);
}

Vocabulary::Vocabulary(const BackendInfo& info) : tokens_(info.vocab) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    index_.emplace(tokens_[i], static_cast<TokenId>(i));
  }
  auto check = [&](TokenId id) {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw Error(ErrorCode::kProtocol, "special token id out of range");
    }
    return id;
  };
  period_id_ = check(info.period_id);
  comma_id_ = check(info.comma_id);
  eos_id_ = check(info.eos_id);
}

bool Vocabulary::Contains(std::string_view word) const {
  return index_.contains(std::string(word));
}

TokenId Vocabulary::Id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) {
    throw Error(ErrorCode::kInput, "unknown token '" + std::string(word) + "'");
  }
  return it->second;
}

const std::string& Vocabulary::Text(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error(ErrorCode::kInput, "token id " + std::to_string(id) + " out of range");
  }
  return tokens_[id];
}

std::vector<TokenId> Vocabulary::Tokenize(std::string_view text) const {
  std::vector<TokenId> ids;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) ids.push_back(Id(word));
    word.clear();
  };
  const std::string& period = tokens_[period_id_];
  const std::string& comma = tokens_[comma_id_];
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      flush();
    } else if (std::string_view(&c, 1) == period || std::string_view(&c, 1) == comma) {
      flush();
      ids.push_back(c == period[0] ? period_id_ : comma_id_);
    } else {
      word.push_back(c);
    }
  }
  flush();
  return ids;
}

std::string Vocabulary::Detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == eos_id_) continue;
    const std::string& t = Text(id);
    if (!out.empty() && id != period_id_ && id != comma_id_) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace groundcap
