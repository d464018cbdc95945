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

#ifndef GROUNDCAP_PROTOCOL_BACKEND_H_
#define GROUNDCAP_PROTOCOL_BACKEND_H_

#include <span>
#include <string>
#include <vector>

#include "groundcap/protocol/types.h"

namespace groundcap {

// A vision-language backend that can report next-token distributions, greedy
// continuations, final-layer hidden states with or without the image, and
// yes/no existence answers.
//
// The public methods validate arguments, enforce the global sequence cap and
// check the shape of whatever the implementation returns; implementations
// only provide the Do* hooks. Implementations must be safe to call from two
// threads at once (the with-image and without-image passes of a scoring step
// may be in flight together).
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const BackendInfo& Info() const = 0;

  // The k most probable next tokens. Requires 1 <= k <= vocabulary size.
  StepResult TopKNext(const SequenceContext& ctx, std::size_t k, bool with_image);

  // Argmax continuation until a stop token (included in the result) or the
  // cap. stop_tokens must contain the period and EOS ids.
  GreedyResult GreedyExtend(const SequenceContext& ctx,
                            const std::vector<TokenId>& stop_tokens,
                            bool with_image);

  // One state per token of `tokens`, computed over prefix + tokens.
  std::vector<std::vector<float>> FinalHiddenStates(const SequenceContext& ctx,
                                                    std::span<const TokenId> tokens,
                                                    bool with_image);

  // Asks the existence question for `object`; throws Error(kParse) carrying
  // the raw reply when it is neither yes nor no.
  bool DiscriminativeQuery(const std::string& image_ref, const std::string& object);

  // The unparsed reply behind DiscriminativeQuery.
  std::string DiscriminativeReply(const std::string& image_ref,
                                  const std::string& object);

 protected:
  virtual StepResult DoTopKNext(const SequenceContext& ctx, std::size_t k,
                                bool with_image) = 0;
  virtual GreedyResult DoGreedyExtend(const SequenceContext& ctx,
                                      const std::vector<TokenId>& stop_tokens,
                                      bool with_image,
                                      std::size_t max_new_tokens) = 0;
  virtual std::vector<std::vector<float>> DoFinalHiddenStates(
      const SequenceContext& ctx, std::span<const TokenId> tokens,
      bool with_image) = 0;
  // Returns the backend's raw reply text.
  virtual std::string DoDiscriminativeQuery(const std::string& image_ref,
                                            const std::string& object,
                                            const std::string& question) = 0;
};

// "Is there a dog in the image? Answer with only Yes or No."
std::string DiscriminativeQuestion(const std::string& object);

// Accepts yes/no in any case with optional trailing period and whitespace.
bool ParseYesNo(const std::string& reply);

// Plain greedy caption: repeated GreedyExtend until EOS or the cap. The EOS
// token, when produced, is included.
GreedyResult PlainGreedyDecode(Backend& backend, const SequenceContext& ctx);

}  // namespace groundcap

#endif  // GROUNDCAP_PROTOCOL_BACKEND_H_
