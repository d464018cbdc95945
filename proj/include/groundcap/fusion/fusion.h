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

#ifndef GROUNDCAP_FUSION_FUSION_H_
#define GROUNDCAP_FUSION_FUSION_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "groundcap/common/jsonl.h"

namespace groundcap::fusion {

// Detector confidences for one object mentioned in one caption. A missing
// confidence marks the record partial; partial records are never scored.
struct DetectionScoreRecord {
  std::string caption_id;
  std::string object;
  std::optional<double> yolo_conf;
  std::optional<double> dino_conf;
  std::optional<double> tagclip_conf;
  std::optional<int> label;  // 1 = object present (accurate), 0 = absent

  bool complete() const { return yolo_conf && dino_conf && tagclip_conf; }
  std::array<double, 3> confs() const { return {*yolo_conf, *dino_conf, *tagclip_conf}; }
};

struct FusionModel {
  double intercept = 0.0;
  double w_yolo = 0.0;
  double w_dino = 0.0;
  double w_tag = 0.0;

  // Coefficients fit on the detector-score set shipped as the default.
  static FusionModel Default();
  double Logit(const std::array<double, 3>& conf) const {
    return intercept + w_yolo * conf[0] + w_dino * conf[1] + w_tag * conf[2];
  }
  std::array<double, 4> AsArray() const { return {intercept, w_yolo, w_dino, w_tag}; }
  static FusionModel FromArray(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
};

double Sigmoid(double z);

// Throws Error(kInput) for partial records or confidences that are not finite
// or lie outside [0, 1].
double PredictPExist(const FusionModel& model, const DetectionScoreRecord& rec);
double PredictPExist(const FusionModel& model, const std::array<double, 3>& conf);

// accurate iff p >= threshold.
bool ClassifyObject(double p_exist, double threshold);

// Mean Bernoulli log-likelihood and its gradient with respect to
// (intercept, w_yolo, w_dino, w_tag).
double MeanLogLikelihood(const FusionModel& model, std::span<const std::array<double, 3>> x,
                         std::span<const int> y);
std::array<double, 4> MeanLogLikelihoodGradient(const FusionModel& model,
                                                std::span<const std::array<double, 3>> x,
                                                std::span<const int> y);

struct FitOptions {
  int max_iter = 1000;
  double grad_tol = 1e-8;
};

struct FitResult {
  FusionModel model;
  int iterations = 0;
  bool converged = false;  // gradient norm fell below grad_tol
  double grad_norm = 0.0;
  double log_likelihood = 0.0;
};

// Gradient ascent from zero with Armijo backtracking.
FitResult FitLogistic(std::span<const std::array<double, 3>> x, std::span<const int> y,
                      const FitOptions& options = {});

struct FoldMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;     // 0 when the fold has no positives
  double train_accuracy = 0.0;
  int iterations = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct TrainOptions {
  int folds = 5;
  bool downsample = false;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  FitOptions fit;
};

struct TrainReport {
  FusionModel model;  // refit on every record used
  FitResult final_fit;
  std::vector<FoldMetrics> folds;
  MeanStd accuracy, precision, recall;
  std::size_t positives = 0;  // after downsampling
  std::size_t negatives = 0;
  std::size_t skipped = 0;  // partial or unlabeled records
};

// Cross-validates on seed-shuffled folds and refits on all records. Throws
// Error(kTraining) unless both classes have at least two records, and
// Error(kInput) when folds < 2 or exceeds the record count.
TrainReport TrainFusion(std::span<const DetectionScoreRecord> records,
                        const TrainOptions& options);

// Downsampling keeps, for each class, the first min(n_pos, n_neg) records in a
// seed-shuffled order. Returns indices in that order.
std::vector<std::size_t> BalancedSubset(std::span<const int> labels, std::uint64_t seed);

// Synthetic records with confidences uniform on [0,1]^3 and labels drawn from
// the model: one Bernoulli draw per record.
std::vector<DetectionScoreRecord> SampleRecordsIid(const FusionModel& model, std::size_t n,
                                                   std::uint64_t seed);
// `triples` confidence triples, each repeated `replicas` times with exactly
// floor(replicas * p + u) positives, u ~ U[0,1). Label frequencies match the
// model up to rounding, so the refit error is governed by the number of
// triples rather than by label noise.
std::vector<DetectionScoreRecord> SampleRecordsStratified(const FusionModel& model,
                                                          std::size_t triples,
                                                          std::size_t replicas,
                                                          std::uint64_t seed);

// Detector-like scores for a mention: present objects score high, absent ones
// low, each with Gaussian noise of the given sigma, clamped to [0, 1].
DetectionScoreRecord SyntheticDetectorScores(const std::string& caption_id,
                                             const std::string& object, bool present,
                                             double noise_sigma, std::uint64_t seed);

Json RecordToJson(const DetectionScoreRecord& r);
DetectionScoreRecord RecordFromJson(const Json& j);
std::vector<DetectionScoreRecord> ReadScoreRecords(const std::filesystem::path& path);
void WriteScoreRecords(const std::filesystem::path& path,
                       std::span<const DetectionScoreRecord> records);

// {"intercept", "weights": {"yolo", "dino", "tagclip"}, "metadata": {...}}
Json ModelToJson(const FusionModel& model, const Json& metadata = Json::object());
FusionModel ModelFromJson(const Json& j);
FusionModel LoadModel(const std::filesystem::path& path);
void SaveModel(const std::filesystem::path& path, const FusionModel& model,
               const Json& metadata = Json::object());

}  // namespace groundcap::fusion

#endif  // GROUNDCAP_FUSION_FUSION_H_
