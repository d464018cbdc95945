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

#ifndef GROUNDCAP_ANALYSIS_ANALYSIS_H_
#define GROUNDCAP_ANALYSIS_ANALYSIS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "groundcap/annotate/annotator.h"
#include "groundcap/common/jsonl.h"
#include "groundcap/protocol/backend.h"

namespace groundcap::analysis {

// Jensen-Shannon divergence with base-2 logarithms, so the result lies in
// [0, 1]. Inputs are renormalized; 0 log 0 = 0. Throws Error(kInput) on
// negative or non-finite mass, a zero total, or a length mismatch.
double Jsd(std::span<const double> p, std::span<const double> q);

struct DivergenceStep {
  std::size_t position = 0;
  TokenId token = 0;
  double jsd = 0.0;
  double p_with_image = 0.0;
  double p_without_image = 0.0;
};

struct DivergenceProfile {
  std::string image_ref;
  std::vector<DivergenceStep> steps;

  std::vector<double> Values() const;
  Json ToJson() const;
};

// Forces the caption through the backend twice (with and without the image)
// and compares the full next-token distributions at every step. Throws
// Error(kCapability) when the backend cannot drop the image.
DivergenceProfile ComputeDivergenceProfile(Backend& backend, const std::string& image_ref,
                                           std::span<const TokenId> caption,
                                           const std::string& prompt = kCaptionPrompt);

struct PositionHistogram {
  std::size_t bins = 0;
  std::vector<std::size_t> accurate;
  std::vector<std::size_t> inaccurate;

  std::size_t Count(std::size_t bin) const { return accurate[bin] + inaccurate[bin]; }
  // Undefined for an empty bin.
  std::optional<double> AccurateShare(std::size_t bin) const;
  std::optional<double> InaccurateShare(std::size_t bin) const;
  Json ToJson() const;
};

// Token i of an n-token caption falls in bin floor(bins * i / n).
// `labels` holds one vector per caption, true = ACCURATE. Throws
// Error(kInput) when bins is 0.
PositionHistogram ComputePositionHistogram(std::span<const std::vector<bool>> labels,
                                           std::size_t bins);
PositionHistogram ComputePositionHistogram(std::span<const annotate::AnnotatedCaption> captions,
                                           std::size_t bins);

struct ConsistencyItem {
  std::string caption_id;
  std::string image_id;
  std::string object;
  std::optional<bool> answer;  // true = yes
  std::optional<double> p_exist;
  std::string reply;
  std::string error;
};

struct ConsistencyReport {
  std::vector<ConsistencyItem> items;
  std::size_t answered = 0;
  std::size_t no_answers = 0;
  std::size_t failures = 0;

  std::optional<double> NoRate() const;
  Json ToJson() const;
};

// One item per object mention, answered by the existence question for the
// caption's image_id (asked once per distinct image and object). Replies that
// are neither yes nor no are recorded and left out of the rates.
ConsistencyReport ConsistencyStudy(Backend& backend,
                                   std::span<const annotate::AnnotatedCaption> captions);

// Standalone SVG documents.
std::string ProfileSvg(const DivergenceProfile& profile);
std::string HistogramSvg(const PositionHistogram& histogram);

}  // namespace groundcap::analysis

#endif  // GROUNDCAP_ANALYSIS_ANALYSIS_H_
