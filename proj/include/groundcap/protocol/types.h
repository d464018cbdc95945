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

#ifndef GROUNDCAP_PROTOCOL_TYPES_H_
#define GROUNDCAP_PROTOCOL_TYPES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace groundcap {

using TokenId = std::int32_t;

// Global cap on caption length, prompt excluded.
inline constexpr std::size_t kMaxSequenceLen = 512;

inline constexpr char kCaptionPrompt[] = "Describe the image in detail.";

struct SequenceContext {
  std::optional<std::string> image_ref;
  std::string prompt = kCaptionPrompt;
  std::vector<TokenId> prefix_tokens;

  // Throws Error(kInput) on an empty prompt or an over-long prefix.
  void Validate() const;
};

struct TokenProb {
  TokenId token = 0;
  double probability = 0.0;

  bool operator==(const TokenProb&) const = default;
};

struct StepResult {
  // Sorted by probability descending, ties by token id ascending.
  std::vector<TokenProb> top_tokens;
  // Final-layer state at the last prefix position.
  std::vector<float> hidden;
};

struct GreedyResult {
  std::vector<TokenId> tokens;
  // Set when the global cap stopped generation before a stop token.
  bool truncated = false;
};

// Final-layer states for one caption position, with (x1) and without (x2)
// the image.
struct HiddenStatePair {
  std::vector<float> x1;
  std::vector<float> x2;
  std::size_t position = 0;
  TokenId token_id = 0;
  // Training label when known: true for ACCURATE.
  std::optional<bool> accurate;
};

struct BackendInfo {
  std::string name;
  std::vector<std::string> vocab;
  TokenId period_id = 0;
  TokenId comma_id = 0;
  TokenId eos_id = 0;
  std::size_t hidden_dim = 0;
  bool supports_without_image = true;
};

}  // namespace groundcap

#endif  // GROUNDCAP_PROTOCOL_TYPES_H_
