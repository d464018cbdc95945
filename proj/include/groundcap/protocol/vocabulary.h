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

#ifndef GROUNDCAP_PROTOCOL_VOCABULARY_H_
#define GROUNDCAP_PROTOCOL_VOCABULARY_H_

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "groundcap/protocol/types.h"

namespace groundcap {

// Word-level token table shared by client and backend. Text is split on
// whitespace with "." and "," as separate tokens; detokenization attaches
// punctuation to the preceding word and renders EOS as nothing.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws Error(kConfiguration) on duplicates or when any of the three
  // special tokens is missing.
  Vocabulary(std::vector<std::string> tokens, std::string_view period,
             std::string_view comma, std::string_view eos);
  explicit Vocabulary(const BackendInfo& info);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  TokenId period_id() const { return period_id_; }
  TokenId comma_id() const { return comma_id_; }
  TokenId eos_id() const { return eos_id_; }

  bool Contains(std::string_view word) const;
  // Throws Error(kInput) for unknown words.
  TokenId Id(std::string_view word) const;
  const std::string& Text(TokenId id) const;

  std::vector<TokenId> Tokenize(std::string_view text) const;
  std::string Detokenize(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId period_id_ = -1;
  TokenId comma_id_ = -1;
  TokenId eos_id_ = -1;
};

}  // namespace groundcap

#endif  // GROUNDCAP_PROTOCOL_VOCABULARY_H_
