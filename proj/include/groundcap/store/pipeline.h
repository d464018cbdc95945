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


#ifndef GROUNDCAP_STORE_PIPELINE_H_
#define GROUNDCAP_STORE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "groundcap/annotate/annotator.h"
#include "groundcap/classifier/train.h"
#include "groundcap/common/jsonl.h"
#include "groundcap/decode/decoder.h"
#include "groundcap/mock/mock_lvlm.h"
#include "groundcap/protocol/backend.h"
#include "groundcap/store/manifest.h"

namespace groundcap::store {

// The mock section of a config document with the scene-generation and model
// seeds derived from the root seed where not given.
Json ResolveMockConfig(const Json& mock, std::uint64_t root_seed);

// Config document with a "mock" section (or a bare mock document) plus HALU_
// overrides from the process environment.
std::unique_ptr<mock::MockLvlm> LoadMock(const std::filesystem::path& config);

// "mock:<config file>" (in process), "unix:<socket path>" or
// "stdio:<command line>".
std::unique_ptr<Backend> OpenBackend(const std::string& target);

// Both hidden-state passes for every token of each caption, labeled by the
// annotation. Tokens without ids are looked up in the backend vocabulary.
std::vector<HiddenStatePair> CollectHiddenStates(Backend& backend,
                                                 std::span<const annotate::AnnotatedCaption> captions,
                                                 const std::string& prompt = kCaptionPrompt);

// Resolved pipeline settings. Config document layout:
//   seed = <root seed>
//   [mock]        mock document (scenes or generate, behavior)
//   [pipeline]    train_fraction, detector_noise, thresholds
//   [annotate]    threshold, fusion_model, lexicon
//   [classifier]  feature_mode plus the training config keys
//   [decode]      K, max_total_tokens, prompt, break_on_selected_eos
//   [chair]       synonyms
struct PipelineConfig {
  std::uint64_t seed = 0;
  Json mock = Json::object();
  // Leading share of the scenes used for annotation and training; the rest
  // are decoded and evaluated.
  double train_fraction = 0.5;
  // Gaussian sigma of the simulated detector confidences.
  double detector_noise = 0.1;
  std::vector<double> thresholds = {0.5, 0.6, 0.7, 0.8};
  double existence_threshold = 0.5;
  std::optional<std::filesystem::path> fusion_model;
  std::optional<std::filesystem::path> lexicon;
  classifier::FeatureMode feature_mode = classifier::FeatureMode::kDiff;
  classifier::TrainConfig train;
  decode::DecodeConfig decode;
  std::optional<std::filesystem::path> synonyms;

  // Throws Error(kConfiguration).
  static PipelineConfig FromJson(const Json& config);
  // Round-trips through FromJson with every derived value filled in.
  Json ToJson() const;
};

struct StageRecord {
  std::string name;
  std::filesystem::path manifest;
  std::vector<FileRecord> outputs;  // paths relative to the run directory
  double seconds = 0.0;
};

struct PipelineResult {
  std::filesystem::path dir;
  std::vector<StageRecord> stages;
  // CHAIR rows and oracle token statistics per threshold.
  Json summary;
};

// captions -> annotate -> features -> classifier -> decode -> chair, each stage
// in a numbered subdirectory of `dir` with its own manifest whose inputs are
// the files it read from earlier stages. `dir`/manifest.json records the
// resolved config and every stage output. A failing stage throws its error
// prefixed with the stage name; earlier outputs stay in place.
PipelineResult RunPipeline(const Json& config, const std::filesystem::path& dir,
                           const std::vector<std::string>& argv = {},
                           const std::optional<std::filesystem::path>& config_file = {});

struct ReplayReport {
  PipelineResult result;
  std::vector<std::string> mismatches;  // one line per differing output
};

// Reruns from the config snapshot of a pipeline manifest into `dir` and
// compares output hashes with the recorded ones.
ReplayReport ReplayPipeline(const std::filesystem::path& manifest, const std::filesystem::path& dir,
                            const std::vector<std::string>& argv = {});

// Oracle statistics of one decode run at threshold t, from the mock's labels.
struct RetainedStats {
  std::size_t tokens = 0;
  std::size_t inaccurate_tokens = 0;
  std::size_t words = 0;
};
RetainedStats MeasureRetained(const mock::MockLvlm& mock, const decode::DecodeRun& run, double t);

}  // namespace groundcap::store

#endif  // GROUNDCAP_STORE_PIPELINE_H_
