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

#ifndef GROUNDCAP_CLASSIFIER_TRAIN_H_
#define GROUNDCAP_CLASSIFIER_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "groundcap/classifier/mlp.h"
#include "groundcap/common/jsonl.h"
#include "groundcap/protocol/types.h"

namespace groundcap::classifier {

enum class FeatureMode { kX1Only, kX2Only, kDiff };

// "X1_ONLY", "X2_ONLY", "DIFF".
std::string_view FeatureModeName(FeatureMode mode);
// Case-insensitive; also accepts "x1", "x2", "x1-x2". Throws Error(kInput).
FeatureMode ParseFeatureMode(std::string_view name);

// Dense float features with one label byte per row (1 = ACCURATE).
struct Dataset {
  std::size_t dim = 0;
  std::vector<float> features;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const float> Row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  void Append(std::span<const float> row, std::uint8_t label);
  Matrix Rows(std::span<const std::size_t> indices) const;
  std::vector<std::uint8_t> Labels(std::span<const std::size_t> indices) const;
  Matrix AllRows() const;
  std::size_t CountAccurate() const;
};

// Throws Error(kInput) on a missing label or mismatched dimensions.
Dataset BuildFeatures(std::span<const HiddenStatePair> pairs, FeatureMode mode);
std::vector<float> FeatureRow(const HiddenStatePair& pair, FeatureMode mode);

// "HSD1", u32 count, u32 dim, then count rows of dim f32 and a u8 label,
// all little-endian.
std::string EncodeHsd(const Dataset& data);
Dataset DecodeHsd(std::string_view bytes);
void WriteHsd(const std::filesystem::path& path, const Dataset& data);
Dataset ReadHsd(const std::filesystem::path& path);

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 1e-5;
  std::size_t batch = 512;
  std::size_t epochs = 40;
  double scheduler_factor = 0.1;
  int scheduler_patience = 3;
  double scheduler_threshold = 1e-4;
  std::size_t folds = 5;
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool parallel_folds = true;
  MlpConfig mlp;  // input_dim is taken from the dataset

  // Throws Error(kConfiguration).
  void Validate() const;
  Json ToJson() const;
  static TrainConfig FromJson(const Json& j);
};

// Seeded shuffle; the test rows come first, then validation, then training.
struct Split {
  std::vector<std::size_t> train, val, test;
};
Split SplitIndices(std::size_t n, const TrainConfig& config);

// Fold f of k over `rows`: contiguous block f held out.
std::vector<std::size_t> FoldHoldout(std::span<const std::size_t> rows, std::size_t k,
                                     std::size_t f);
std::vector<std::size_t> FoldTraining(std::span<const std::size_t> rows, std::size_t k,
                                      std::size_t f);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;  // mean over batches
  double val_loss = 0.0;    // shared validation split, eval mode
  double holdout_loss = 0.0;
  bool lr_reduced = false;
};

struct FoldHistory {
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  std::size_t train_rows = 0;
  std::size_t holdout_rows = 0;
  std::size_t skipped_batches = 0;
  std::vector<EpochRecord> epochs;
};

class MlpEnsemble {
 public:
  MlpEnsemble() = default;
  // Throws Error(kInput) when members disagree on input_dim or the list is empty.
  explicit MlpEnsemble(std::vector<Mlp> members, double threshold = 0.5);

  std::size_t input_dim() const;
  double threshold() const { return threshold_; }
  const std::vector<Mlp>& members() const { return members_; }

  // Mean member probability of ACCURATE.
  Vector Probabilities(const Matrix& x) const;
  // 1 = ACCURATE when the mean probability is at least the threshold.
  std::vector<std::uint8_t> Predict(const Matrix& x) const;

  Json ToJson() const;
  static MlpEnsemble FromJson(const Json& j);
  void Save(const std::filesystem::path& path) const;
  static MlpEnsemble Load(const std::filesystem::path& path);

 private:
  std::vector<Mlp> members_;
  double threshold_ = 0.5;
};

struct ClassMetrics {
  std::optional<double> precision;  // undefined without predictions of the class
  std::optional<double> recall;     // undefined when the class is absent
  std::optional<double> f1;         // undefined only when 2tp + fp + fn = 0
  std::size_t support = 0;
};

// Rows are truth, columns predictions; index 1 = ACCURATE.
struct Confusion {
  std::size_t counts[2][2] = {{0, 0}, {0, 0}};
  std::size_t total() const;
};

struct EvalReport {
  Confusion confusion;
  ClassMetrics accurate;
  ClassMetrics inaccurate;
  std::optional<double> accuracy;
};

EvalReport Evaluate(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted);
Json EvalToJson(const EvalReport& report);

// "<name> | P R F1 | P R F1" with four decimals, ACCURATE first; undefined
// values print as "n/a".
std::string FormatTableRow(std::string_view name, const EvalReport& report);

struct TrainResult {
  MlpEnsemble ensemble;
  std::vector<FoldHistory> history;
  Split split;
  EvalReport test;
  EvalReport majority;  // constant-ACCURATE predictor on the same test rows
};

// k-fold training over the training split. Each fold model trains on the
// other folds, the scheduler watches the shared validation split, and the
// fold models form the ensemble. Throws Error(kInput) when a class is
// missing and Error(kTraining) naming the epoch when the loss diverges.
TrainResult Train(const Dataset& data, const TrainConfig& config);

// One fold's model; `rows` and `val` index into `data`.
Mlp TrainModel(const Dataset& data, std::span<const std::size_t> rows,
               std::span<const std::size_t> val, std::span<const std::size_t> holdout,
               const TrainConfig& config, std::uint64_t seed, FoldHistory* history);

Json HistoryToJson(const std::vector<FoldHistory>& history);

}  // namespace groundcap::classifier

#endif  // GROUNDCAP_CLASSIFIER_TRAIN_H_
