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

#include "groundcap/fusion/fusion.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "groundcap/common/encoding.h"
#include "groundcap/common/error.h"
#include "groundcap/common/random.h"

namespace groundcap::fusion {
namespace {

// log(1 + e^z) without overflow.
double Softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double Norm(const std::array<double, 4>& g) {
  return std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
}

void CheckConfs(const std::array<double, 3>& conf) {
  for (double c : conf) {
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
      throw Error(ErrorCode::kInput, "detector confidence must be finite and in [0, 1]");
    }
  }
}

MeanStd Summarize(const std::vector<double>& v) {
  MeanStd m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(v.size()));
  return m;
}

std::optional<double> OptionalConf(const Json& j, const char* name) {
  if (!j.contains(name) || j[name].is_null()) return std::nullopt;
  return j[name].get<double>();
}

Json ConfToJson(const std::optional<double>& c) { return c ? Json(*c) : Json(nullptr); }

}  // namespace

FusionModel FusionModel::Default() { return {-1.7251, 2.6723, 1.6066, 2.2660}; }

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double PredictPExist(const FusionModel& model, const std::array<double, 3>& conf) {
  CheckConfs(conf);
  return Sigmoid(model.Logit(conf));
}

double PredictPExist(const FusionModel& model, const DetectionScoreRecord& rec) {
  if (!rec.complete()) {
    throw Error(ErrorCode::kInput, "record for '" + rec.object + "' in " + rec.caption_id +
                                       " is missing a detector confidence");
  }
  return PredictPExist(model, rec.confs());
}

bool ClassifyObject(double p_exist, double threshold) { return p_exist >= threshold; }

double MeanLogLikelihood(const FusionModel& model, std::span<const std::array<double, 3>> x,
                         std::span<const int> y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = model.Logit(x[i]);
    sum += y[i] * z - Softplus(z);
  }
  return sum / static_cast<double>(x.size());
}

std::array<double, 4> MeanLogLikelihoodGradient(const FusionModel& model,
                                                std::span<const std::array<double, 3>> x,
                                                std::span<const int> y) {
  std::array<double, 4> g{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - Sigmoid(model.Logit(x[i]));
    g[0] += r;
    for (int c = 0; c < 3; ++c) g[c + 1] += r * x[i][c];
  }
  for (double& v : g) v /= static_cast<double>(x.size());
  return g;
}

FitResult FitLogistic(std::span<const std::array<double, 3>> x, std::span<const int> y,
                      const FitOptions& options) {
  if (x.empty() || x.size() != y.size()) {
    throw Error(ErrorCode::kTraining, "logistic fit needs matching, non-empty inputs");
  }
  std::array<double, 4> w{};
  double f = MeanLogLikelihood(FusionModel::FromArray(w), x, y);
  auto g = MeanLogLikelihoodGradient(FusionModel::FromArray(w), x, y);
  double step = 1.0;
  FitResult res;
  for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
    const double gn = Norm(g);
    if (gn < options.grad_tol) {
      res.converged = true;
      break;
    }
    double t = std::min(step * 2.0, 1e8);
    bool moved = false;
    while (t > 1e-30) {
      std::array<double, 4> cand;
      for (int i = 0; i < 4; ++i) cand[i] = w[i] + t * g[i];
      const double fc = MeanLogLikelihood(FusionModel::FromArray(cand), x, y);
      bool accept = fc >= f + 1e-4 * t * gn * gn;
      std::array<double, 4> gc{};
      if (!accept && std::abs(fc - f) <= 1e-13 * std::max(1.0, std::abs(f))) {
        // Near the optimum the objective is flat to rounding; fall back to
        // requiring a smaller gradient.
        gc = MeanLogLikelihoodGradient(FusionModel::FromArray(cand), x, y);
        accept = Norm(gc) < gn;
      }
      if (accept) {
        w = cand;
        f = fc;
        g = MeanLogLikelihoodGradient(FusionModel::FromArray(w), x, y);
        step = t;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  res.model = FusionModel::FromArray(w);
  res.grad_norm = Norm(g);
  res.converged = res.converged || res.grad_norm < options.grad_tol;
  res.log_likelihood = f;
  if (!std::isfinite(f)) throw Error(ErrorCode::kNumeric, "logistic fit diverged");
  return res;
}

std::vector<std::size_t> BalancedSubset(std::span<const int> labels, std::uint64_t seed) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(SeedFrom(seed, 31));
  std::shuffle(order.begin(), order.end(), rng);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t per_class = std::min(pos, labels.size() - pos);
  std::size_t taken[2] = {0, 0};
  std::vector<std::size_t> out;
  for (std::size_t i : order) {
    const int c = labels[i] == 1;
    if (taken[c] < per_class) {
      ++taken[c];
      out.push_back(i);
    }
  }
  return out;
}

TrainReport TrainFusion(std::span<const DetectionScoreRecord> records,
                        const TrainOptions& options) {
  TrainReport report;
  std::vector<std::array<double, 3>> x_all;
  std::vector<int> y_all;
  for (const auto& r : records) {
    if (!r.complete() || !r.label) {
      ++report.skipped;
      continue;
    }
    CheckConfs(r.confs());
    if (*r.label != 0 && *r.label != 1) throw Error(ErrorCode::kInput, "label must be 0 or 1");
    x_all.push_back(r.confs());
    y_all.push_back(*r.label);
  }

  std::vector<std::size_t> order;
  if (options.downsample) {
    order = BalancedSubset(y_all, options.seed);
  } else {
    order.resize(x_all.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(SeedFrom(options.seed, 37));
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::array<double, 3>> x;
  std::vector<int> y;
  for (std::size_t i : order) {
    x.push_back(x_all[i]);
    y.push_back(y_all[i]);
  }
  report.positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  report.negatives = y.size() - report.positives;
  if (report.positives < 2 || report.negatives < 2) {
    throw Error(ErrorCode::kTraining,
                "fusion training needs at least two records of each class (got " +
                    std::to_string(report.positives) + " positive, " +
                    std::to_string(report.negatives) + " negative)");
  }
  const auto k = static_cast<std::size_t>(options.folds);
  if (options.folds < 2 || k > x.size()) {
    throw Error(ErrorCode::kInput, "folds must lie in [2, number of records]");
  }

  auto run_fold = [&](std::size_t f) {
    const std::size_t n = x.size();
    const std::size_t begin = f * (n / k) + std::min(f, n % k);
    const std::size_t end = begin + n / k + (f < n % k ? 1 : 0);
    std::vector<std::array<double, 3>> xt;
    std::vector<int> yt;
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= begin && i < end) continue;
      xt.push_back(x[i]);
      yt.push_back(y[i]);
    }
    FoldMetrics m;
    const FitResult fit = FitLogistic(xt, yt, options.fit);
    m.iterations = fit.iterations;
    std::size_t train_correct = 0;
    for (std::size_t i = 0; i < xt.size(); ++i) {
      train_correct += ClassifyObject(Sigmoid(fit.model.Logit(xt[i])), options.threshold) == (yt[i] == 1);
    }
    m.train_accuracy = double(train_correct) / double(xt.size());
    std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const bool pred = ClassifyObject(Sigmoid(fit.model.Logit(x[i])), options.threshold);
      const bool truth = y[i] == 1;
      correct += pred == truth;
      tp += pred && truth;
      fp += pred && !truth;
      fn += !pred && truth;
    }
    m.accuracy = double(correct) / double(end - begin);
    m.precision = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    m.recall = tp + fn ? double(tp) / double(tp + fn) : 0.0;
    return m;
  };
  std::vector<std::future<FoldMetrics>> futures;
  for (std::size_t f = 0; f < k; ++f) futures.push_back(std::async(std::launch::async, run_fold, f));
  std::vector<double> acc, prec, rec;
  for (auto& fut : futures) {
    report.folds.push_back(fut.get());
    acc.push_back(report.folds.back().accuracy);
    prec.push_back(report.folds.back().precision);
    rec.push_back(report.folds.back().recall);
  }
  report.accuracy = Summarize(acc);
  report.precision = Summarize(prec);
  report.recall = Summarize(rec);
  report.final_fit = FitLogistic(x, y, options.fit);
  report.model = report.final_fit.model;
  return report;
}

std::vector<DetectionScoreRecord> SampleRecordsIid(const FusionModel& model, std::size_t n,
                                                   std::uint64_t seed) {
  std::vector<DetectionScoreRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 3> c;
    for (int j = 0; j < 3; ++j) c[j] = UnitUniform(SeedFrom(seed, i, j));
    const double p = Sigmoid(model.Logit(c));
    DetectionScoreRecord r{"synthetic-" + std::to_string(i), "object", c[0], c[1], c[2],
                           UnitUniform(SeedFrom(seed, i, 3)) < p ? 1 : 0};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DetectionScoreRecord> SampleRecordsStratified(const FusionModel& model,
                                                          std::size_t triples,
                                                          std::size_t replicas,
                                                          std::uint64_t seed) {
  std::vector<DetectionScoreRecord> out;
  out.reserve(triples * replicas);
  for (std::size_t i = 0; i < triples; ++i) {
    std::array<double, 3> c;
    for (int j = 0; j < 3; ++j) c[j] = UnitUniform(SeedFrom(seed, i, j));
    const double p = Sigmoid(model.Logit(c));
    const auto positives = static_cast<std::size_t>(
        std::floor(static_cast<double>(replicas) * p + UnitUniform(SeedFrom(seed, i, 3))));
    for (std::size_t r = 0; r < replicas; ++r) {
      out.push_back({"synthetic-" + std::to_string(i), "object", c[0], c[1], c[2],
                     r < positives ? 1 : 0});
    }
  }
  return out;
}

DetectionScoreRecord SyntheticDetectorScores(const std::string& caption_id,
                                             const std::string& object, bool present,
                                             double noise_sigma, std::uint64_t seed) {
  static constexpr std::array<double, 3> kPresent = {0.88, 0.82, 0.78};
  static constexpr std::array<double, 3> kAbsent = {0.06, 0.12, 0.05};
  std::mt19937_64 rng(SeedFrom(seed, HashString(caption_id), HashString(object)));
  std::normal_distribution<double> noise(0.0, noise_sigma);
  std::array<double, 3> c = present ? kPresent : kAbsent;
  for (double& v : c) v = std::clamp(v + (noise_sigma > 0 ? noise(rng) : 0.0), 0.0, 1.0);
  return {caption_id, object, c[0], c[1], c[2], present ? 1 : 0};
}

Json RecordToJson(const DetectionScoreRecord& r) {
  Json j = {{"caption_id", r.caption_id},
            {"object", r.object},
            {"yolo_conf", ConfToJson(r.yolo_conf)},
            {"dino_conf", ConfToJson(r.dino_conf)},
            {"tagclip_conf", ConfToJson(r.tagclip_conf)}};
  if (r.label) j["label"] = *r.label;
  return j;
}

DetectionScoreRecord RecordFromJson(const Json& j) {
  try {
    DetectionScoreRecord r;
    r.caption_id = j.at("caption_id").get<std::string>();
    r.object = j.at("object").get<std::string>();
    r.yolo_conf = OptionalConf(j, "yolo_conf");
    r.dino_conf = OptionalConf(j, "dino_conf");
    r.tagclip_conf = OptionalConf(j, "tagclip_conf");
    if (j.contains("label") && !j["label"].is_null()) r.label = j["label"].get<int>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("bad score record: ") + e.what());
  }
}

std::vector<DetectionScoreRecord> ReadScoreRecords(const std::filesystem::path& path) {
  std::vector<DetectionScoreRecord> out;
  for (const auto& j : ReadJsonl(path)) out.push_back(RecordFromJson(j));
  return out;
}

void WriteScoreRecords(const std::filesystem::path& path,
                       std::span<const DetectionScoreRecord> records) {
  std::vector<Json> docs;
  for (const auto& r : records) docs.push_back(RecordToJson(r));
  WriteFile(path, ToJsonl(docs));
}

Json ModelToJson(const FusionModel& model, const Json& metadata) {
  return {{"intercept", model.intercept},
          {"weights", {{"yolo", model.w_yolo}, {"dino", model.w_dino}, {"tagclip", model.w_tag}}},
          {"metadata", metadata}};
}

FusionModel ModelFromJson(const Json& j) {
  try {
    const Json& w = j.at("weights");
    FusionModel m{j.at("intercept").get<double>(), w.at("yolo").get<double>(),
                  w.at("dino").get<double>(), w.at("tagclip").get<double>()};
    for (double v : m.AsArray()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInput, "fusion model has non-finite coefficients");
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("bad fusion model: ") + e.what());
  }
}

FusionModel LoadModel(const std::filesystem::path& path) { return ModelFromJson(ReadJsonFile(path)); }

void SaveModel(const std::filesystem::path& path, const FusionModel& model, const Json& metadata) {
  WriteJsonFile(path, ModelToJson(model, metadata));
}

}  // namespace groundcap::fusion
