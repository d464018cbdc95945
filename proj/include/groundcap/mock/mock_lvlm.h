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

#ifndef GROUNDCAP_MOCK_MOCK_LVLM_H_
#define GROUNDCAP_MOCK_MOCK_LVLM_H_

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "groundcap/common/jsonl.h"
#include "groundcap/protocol/backend.h"
#include "groundcap/protocol/vocabulary.h"

namespace groundcap::mock {

// Token table plus the subset of tokens that name objects.
class MockVocab {
 public:
  MockVocab() = default;
  // Throws Error(kConfiguration) when a noun is not in the vocabulary.
  MockVocab(Vocabulary vocab, std::vector<std::string> nouns);

  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::string>& nouns() const { return nouns_; }
  bool IsNoun(TokenId id) const { return noun_ids_.contains(id); }

 private:
  Vocabulary vocab_;
  std::vector<std::string> nouns_;
  std::set<TokenId> noun_ids_;
};

// About 200 tokens: specials, template and filler words, and object nouns.
MockVocab DefaultMockVocab();

struct SceneSpec {
  std::string scene_id;
  std::vector<std::string> true_objects;
  std::uint64_t seed = 0;
};

// Piecewise-linear, right-continuous curve on [0, 1]. Repeating an x value
// encodes a jump.
class RateCurve {
 public:
  RateCurve() = default;
  explicit RateCurve(std::vector<std::pair<double, double>> points);

  static RateCurve Constant(double value);
  // `low` before x0, `high` from x0 on.
  static RateCurve Step(double x0, double low, double high);
  static RateCurve Linear(double at0, double at1);

  double At(double x) const;
  bool IsMonotone() const;
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_ = {{0.0, 0.0}};
};

std::vector<std::string> DefaultTemplates();

struct MockBehavior {
  // Probability that an object slot names an absent object, by the
  // sentence's relative position (sentence index / sentence count).
  RateCurve hallucination_rate = RateCurve::Constant(0.0);
  double grounded_signal_magnitude = 4.0;
  std::size_t hidden_dim = 64;
  // Sentence skeletons: space-separated tokens, "{obj}" marks an object slot,
  // the first token selects the template and must be unique, the last is ".".
  std::vector<std::string> templates = DefaultTemplates();
  // Seeds the parts shared by every scene (hidden-state bases, distractors).
  std::uint64_t model_seed = 7;
  std::size_t min_sentences = 3;
  std::size_t max_sentences = 6;
  // Mass on the scripted token inside a sentence.
  double main_token_mass = 0.82;
  // Without the image, grounded positions mix this much mass toward the
  // alternatives.
  double without_image_mix = 0.5;
};

struct ObjectSlot {
  std::size_t offset = 0;  // within the sentence
  std::string object;
  bool hallucinated = false;
};

struct PlannedSentence {
  std::size_t template_index = 0;
  std::vector<TokenId> tokens;
  std::vector<ObjectSlot> slots;
};

struct GroundTruthMention {
  std::size_t token_index = 0;
  std::string object;
  bool hallucinated = false;
};

struct GroundTruth {
  // true = ACCURATE, one per caption token.
  std::vector<bool> accurate;
  std::vector<std::string> objects;
  std::vector<GroundTruthMention> mentions;
};

// Deterministic simulated vision-language model. Every scene's caption is a
// sequence of template sentences whose object slots are filled with scene
// objects or, at the configured position-dependent rate, with absent ones.
// Hidden states differ between the with-image and without-image passes only
// on grounded (ACCURATE) tokens, and next-token distributions differ only
// where the planned token is grounded.
//
// Immutable after construction and safe for concurrent use.
class MockLvlm : public Backend {
 public:
  // Throws Error(kConfiguration) on an inconsistent vocabulary, scene or
  // behavior.
  MockLvlm(MockVocab vocab, std::vector<SceneSpec> scenes, MockBehavior behavior);

  const BackendInfo& Info() const override { return info_; }
  const MockVocab& vocab() const { return vocab_; }
  const MockBehavior& behavior() const { return behavior_; }
  const std::vector<SceneSpec>& scenes() const { return scenes_; }
  // Throws Error(kInput) for an unknown id.
  const SceneSpec& Scene(const std::string& scene_id) const;

  std::size_t SentenceCount(const SceneSpec& scene) const;
  double RelativePosition(const SceneSpec& scene, std::size_t sentence_index) const;
  PlannedSentence Plan(const SceneSpec& scene, std::size_t sentence_index,
                       std::size_t template_index) const;

  // Closed-form distribution over the whole vocabulary.
  std::vector<double> NextTokenDistribution(const SequenceContext& ctx,
                                            bool with_image) const;

  // base(token, position), plus signal * e(token, position) when both
  // grounded and with_image; e has unit norm.
  std::vector<float> HiddenState(TokenId token, std::size_t position, bool grounded,
                                 bool with_image) const;

  // Labels by sentence: any absent object marks its period-delimited sentence
  // INACCURATE, then each present object's comma/period-delimited phrase is
  // reset to ACCURATE. Delimiters belong to no phrase. EOS is ACCURATE.
  std::vector<bool> Labels(const SceneSpec& scene, std::span<const TokenId> tokens) const;

  GroundTruth ExportGroundTruth(const SceneSpec& scene,
                                std::span<const TokenId> caption) const;

 protected:
  StepResult DoTopKNext(const SequenceContext& ctx, std::size_t k,
                        bool with_image) override;
  GreedyResult DoGreedyExtend(const SequenceContext& ctx,
                              const std::vector<TokenId>& stop_tokens,
                              bool with_image, std::size_t max_new_tokens) override;
  std::vector<std::vector<float>> DoFinalHiddenStates(const SequenceContext& ctx,
                                                      std::span<const TokenId> tokens,
                                                      bool with_image) override;
  std::string DoDiscriminativeQuery(const std::string& image_ref,
                                    const std::string& object,
                                    const std::string& question) override;

 private:
  struct Template {
    std::vector<TokenId> tokens;
    std::vector<std::size_t> slot_offsets;
  };

  const SceneSpec* SceneFor(const SequenceContext& ctx, bool with_image) const;
  std::vector<double> StarterWeights(const SceneSpec& scene, std::size_t s) const;

  MockVocab vocab_;
  std::vector<SceneSpec> scenes_;
  std::unordered_map<std::string, std::size_t> scene_index_;
  std::unordered_map<std::string, std::set<std::string>> scene_objects_;
  MockBehavior behavior_;
  std::vector<Template> templates_;
  std::unordered_map<TokenId, std::size_t> starter_to_template_;
  std::vector<TokenId> distractor_pool_;
  BackendInfo info_;
};

std::unique_ptr<MockLvlm> BuildMock(SceneSpec scene, MockBehavior behavior,
                                    MockVocab vocab = DefaultMockVocab());

// `count` scenes with between min_objects and max_objects distinct nouns.
std::vector<SceneSpec> GenerateScenes(const MockVocab& vocab, std::size_t count,
                                      std::uint64_t seed, std::size_t min_objects = 3,
                                      std::size_t max_objects = 6);

// Mock configuration document:
//   {"scenes": [{"scene_id", "true_objects", "seed"}...]
//      or {"generate": {"count", "seed", "min_objects", "max_objects"}},
//    "behavior": {"hallucination_rate": [[x, y]...], "grounded_signal_magnitude",
//                 "hidden_dim", "templates", "model_seed", "min_sentences",
//                 "max_sentences", "main_token_mass", "without_image_mix"}}
// Missing behavior fields keep their defaults.
std::unique_ptr<MockLvlm> MockFromJson(const Json& config);
MockBehavior BehaviorFromJson(const Json& j);
Json BehaviorToJson(const MockBehavior& b);

}  // namespace groundcap::mock

#endif  // GROUNDCAP_MOCK_MOCK_LVLM_H_
