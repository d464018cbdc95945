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

#ifndef GROUNDCAP_DECODE_DECODER_H_
#define GROUNDCAP_DECODE_DECODER_H_

#include <memory>
#include <string>
#include <vector>

#include "groundcap/classifier/train.h"
#include "groundcap/common/jsonl.h"
#include "groundcap/protocol/backend.h"

namespace groundcap::decode {

// Per-token ACCURATE/INACCURATE decisions from paired hidden states.
class TokenClassifier {
 public:
  virtual ~TokenClassifier() = default;
  // 0 accepts any dimension.
  virtual std::size_t input_dim() const = 0;
  // One entry per row of x1/x2; true = ACCURATE. Must be reentrant.
  virtual std::vector<bool> Classify(const std::vector<std::vector<float>>& x1,
                                     const std::vector<std::vector<float>>& x2) const = 0;
  virtual std::string Describe() const = 0;
};

class EnsembleClassifier : public TokenClassifier {
 public:
  EnsembleClassifier(classifier::MlpEnsemble ensemble, classifier::FeatureMode mode);

  std::size_t input_dim() const override { return ensemble_.input_dim(); }
  std::vector<bool> Classify(const std::vector<std::vector<float>>& x1,
                             const std::vector<std::vector<float>>& x2) const override;
  std::string Describe() const override;

 private:
  classifier::MlpEnsemble ensemble_;
  classifier::FeatureMode mode_;
};

// Answers the same label for every token.
class ConstantClassifier : public TokenClassifier {
 public:
  explicit ConstantClassifier(bool accurate) : accurate_(accurate) {}
  std::size_t input_dim() const override { return 0; }
  std::vector<bool> Classify(const std::vector<std::vector<float>>& x1,
                             const std::vector<std::vector<float>>& x2) const override {
    (void)x2;
    return std::vector<bool>(x1.size(), accurate_);
  }
  std::string Describe() const override {
    return accurate_ ? "constant:accurate" : "constant:inaccurate";
  }

 private:
  bool accurate_;
};

// Ensemble file written by train-classifier: {"feature_mode", "ensemble"} or
// a bare ensemble (DIFF assumed).
std::unique_ptr<TokenClassifier> LoadClassifier(const std::filesystem::path& path);

struct DecodeConfig {
  std::size_t k = 1;
  double t = 0.5;
  std::size_t max_total_tokens = kMaxSequenceLen;
  std::string prompt = kCaptionPrompt;
  // Stop only when the selected candidate ends the caption.
  bool break_on_selected_eos = false;
  // Score the K candidates concurrently.
  bool parallel = true;

  // Throws Error(kConfiguration).
  void Validate() const;
  Json ToJson() const;
  static DecodeConfig FromJson(const Json& j);
};

struct CandidateSentence {
  std::vector<TokenId> tokens;  // EOS included when generated
  std::string text;
  double first_token_probability = 0.0;
  double accurate = 0.0;
  std::vector<bool> token_labels;  // scored tokens only (EOS excluded)
  bool contains_eos = false;
  bool truncated = false;  // hit the cap; treated as ending the caption
};

struct DecodeRound {
  std::vector<CandidateSentence> candidates;
  std::size_t selected = 0;
};

struct DecodeRun {
  DecodeConfig config;
  std::string image_ref;
  std::string backend;
  std::string classifier;
  std::vector<std::string> sents;
  std::vector<double> accu;
  std::vector<std::vector<TokenId>> sent_tokens;
  std::string final_caption;
  std::vector<DecodeRound> rounds;
  bool truncated = false;

  Json ToJson() const;
};

// One top-k step, then a greedy extension of each first token to a period or
// EOS. Zero-probability first tokens are dropped, so fewer than k candidates
// come back when the support is smaller. Candidates keep the backend's order
// (probability descending, ties by token id).
std::vector<CandidateSentence> TopKFirstTokenSampling(Backend& backend,
                                                      const SequenceContext& ctx, std::size_t k,
                                                      std::size_t max_total_tokens);

// Classifies every non-EOS token of the candidate in context and stores the
// labels and the accurate fraction on it. An EOS-only candidate scores 1.
// The with-image and without-image passes run concurrently.
double ComputeAccurate(Backend& backend, const TokenClassifier& classifier,
                       const SequenceContext& ctx, CandidateSentence& candidate);

// Sentences with score >= t, non-empty, joined by single spaces.
std::string FilterAndJoin(const std::vector<std::string>& sents,
                          const std::vector<double>& accu, double t);

// Throws Error(kConfiguration) when the classifier's input dimension differs
// from the backend's hidden size and Error(kDecode) when a round yields no
// candidates.
DecodeRun SentenceLevelDecode(Backend& backend, const TokenClassifier& classifier,
                              const std::string& image_ref, const DecodeConfig& config);

}  // namespace groundcap::decode

#endif  // GROUNDCAP_DECODE_DECODER_H_
