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

#include "groundcap/classifier/train.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "groundcap/common/encoding.h"
#include "groundcap/common/error.h"
#include "groundcap/common/random.h"

namespace groundcap::classifier {
namespace {

constexpr std::uint64_t kSplitKey = 0x53504c4954ULL;

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t GetU32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

std::string Fixed4(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

Json OptionalJson(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

ClassMetrics ClassFrom(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.support = tp + fn;
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (2 * tp + fp + fn > 0) {
    m.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  }
  return m;
}

double EvalLoss(const Mlp& model, const Matrix& x, const std::vector<std::uint8_t>& y) {
  if (y.empty()) return 0.0;
  return BceWithLogits(model.Logits(x), y, nullptr);
}

}  // namespace

std::string_view FeatureModeName(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kX1Only:
      return "X1_ONLY";
    case FeatureMode::kX2Only:
      return "X2_ONLY";
    case FeatureMode::kDiff:
      return "DIFF";
  }
  return "DIFF";
}

FeatureMode ParseFeatureMode(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "X1_ONLY" || s == "X1") return FeatureMode::kX1Only;
  if (s == "X2_ONLY" || s == "X2") return FeatureMode::kX2Only;
  if (s == "DIFF" || s == "X1-X2") return FeatureMode::kDiff;
  throw Error(ErrorCode::kInput, "unknown feature mode '" + std::string(name) + "'");
}

void Dataset::Append(std::span<const float> row, std::uint8_t label) {
  if (labels.empty() && features.empty() && dim == 0) dim = row.size();
  if (row.size() != dim) {
    throw Error(ErrorCode::kInput, "feature row has dimension " + std::to_string(row.size()) +
                                       ", expected " + std::to_string(dim));
  }
  features.insert(features.end(), row.begin(), row.end());
  labels.push_back(label);
}

Matrix Dataset::Rows(std::span<const std::size_t> indices) const {
  Matrix m(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const float* src = features.data() + indices[r] * dim;
    for (std::size_t c = 0; c < dim; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = src[c];
  }
  return m;
}

std::vector<std::uint8_t> Dataset::Labels(std::span<const std::size_t> indices) const {
  std::vector<std::uint8_t> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels[i]);
  return out;
}

Matrix Dataset::AllRows() const {
  std::vector<std::size_t> all(size());
  std::iota(all.begin(), all.end(), 0);
  return Rows(all);
}

std::size_t Dataset::CountAccurate() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

std::vector<float> FeatureRow(const HiddenStatePair& pair, FeatureMode mode) {
  if (pair.x1.size() != pair.x2.size()) {
    throw Error(ErrorCode::kInput, "hidden state pair at position " +
                                       std::to_string(pair.position) + " has x1 dim " +
                                       std::to_string(pair.x1.size()) + " and x2 dim " +
                                       std::to_string(pair.x2.size()));
  }
  switch (mode) {
    case FeatureMode::kX1Only:
      return pair.x1;
    case FeatureMode::kX2Only:
      return pair.x2;
    case FeatureMode::kDiff: {
      std::vector<float> d(pair.x1.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = pair.x1[i] - pair.x2[i];
      return d;
    }
  }
  return {};
}

Dataset BuildFeatures(std::span<const HiddenStatePair> pairs, FeatureMode mode) {
  Dataset data;
  if (!pairs.empty()) data.dim = pairs.front().x1.size();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].accurate) {
      throw Error(ErrorCode::kInput, "hidden state pair " + std::to_string(i) + " has no label");
    }
    data.Append(FeatureRow(pairs[i], mode), *pairs[i].accurate ? 1 : 0);
  }
  return data;
}

std::string EncodeHsd(const Dataset& data) {
  std::string out = "HSD1";
  out.reserve(12 + data.size() * (data.dim * 4 + 1));
  PutU32(out, static_cast<std::uint32_t>(data.size()));
  PutU32(out, static_cast<std::uint32_t>(data.dim));
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (float f : data.Row(r)) PutU32(out, std::bit_cast<std::uint32_t>(f));
    out.push_back(static_cast<char>(data.labels[r]));
  }
  return out;
}

Dataset DecodeHsd(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "HSD1") {
    throw Error(ErrorCode::kInput, "not an HSD1 feature file");
  }
  const std::size_t count = GetU32(bytes, 4);
  const std::size_t dim = GetU32(bytes, 8);
  if (bytes.size() != 12 + count * (dim * 4 + 1)) {
    throw Error(ErrorCode::kInput, "HSD1 file size " + std::to_string(bytes.size()) +
                                       " does not match " + std::to_string(count) + " rows of dim " +
                                       std::to_string(dim));
  }
  Dataset data;
  data.dim = dim;
  data.features.resize(count * dim);
  data.labels.resize(count);
  std::size_t at = 12;
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t c = 0; c < dim; ++c, at += 4) {
      data.features[r * dim + c] = std::bit_cast<float>(GetU32(bytes, at));
    }
    const auto label = static_cast<std::uint8_t>(bytes[at++]);
    if (label > 1) {
      throw Error(ErrorCode::kInput, "HSD1 row " + std::to_string(r) + " has label " +
                                         std::to_string(label));
    }
    data.labels[r] = label;
  }
  return data;
}

void WriteHsd(const std::filesystem::path& path, const Dataset& data) {
  WriteFile(path, EncodeHsd(data));
}

Dataset ReadHsd(const std::filesystem::path& path) { return DecodeHsd(ReadFile(path)); }

void TrainConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kConfiguration, "invalid training config: " + what);
  };
  if (!(lr > 0)) fail("lr must be positive");
  if (weight_decay < 0) fail("weight_decay must be non-negative");
  if (batch < 2) fail("batch must be at least 2");
  if (epochs == 0) fail("epochs must be positive");
  if (!(scheduler_factor > 0 && scheduler_factor < 1)) fail("scheduler factor must be in (0, 1)");
  if (scheduler_patience < 1) fail("scheduler patience must be positive");
  if (folds < 2) fail("folds must be at least 2");
  if (!(train_fraction > 0 && val_fraction > 0 && test_fraction > 0)) {
    fail("split fractions must be positive");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    fail("split fractions must sum to 1");
  }
  if (mlp.hidden.empty()) fail("at least one hidden layer is required");
  if (!(mlp.dropout >= 0 && mlp.dropout < 1)) fail("dropout must be in [0, 1)");
}

Json TrainConfig::ToJson() const {
  return {{"lr", lr},
          {"weight_decay", weight_decay},
          {"batch", batch},
          {"epochs", epochs},
          {"scheduler", {{"factor", scheduler_factor},
                         {"patience", scheduler_patience},
                         {"threshold", scheduler_threshold}}},
          {"folds", folds},
          {"split", {train_fraction, val_fraction, test_fraction}},
          {"seed", seed},
          {"parallel_folds", parallel_folds},
          {"hidden", mlp.hidden},
          {"dropout", mlp.dropout},
          {"bn_momentum", mlp.bn_momentum},
          {"bn_eps", mlp.bn_eps}};
}

TrainConfig TrainConfig::FromJson(const Json& j) {
  TrainConfig c;
  try {
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.batch = j.value("batch", c.batch);
    c.epochs = j.value("epochs", c.epochs);
    if (j.contains("scheduler")) {
      const Json& s = j.at("scheduler");
      c.scheduler_factor = s.value("factor", c.scheduler_factor);
      c.scheduler_patience = s.value("patience", c.scheduler_patience);
      c.scheduler_threshold = s.value("threshold", c.scheduler_threshold);
    }
    c.folds = j.value("folds", c.folds);
    if (j.contains("split")) {
      const auto s = j.at("split").get<std::vector<double>>();
      if (s.size() != 3) throw Error(ErrorCode::kConfiguration, "split needs three fractions");
      c.train_fraction = s[0];
      c.val_fraction = s[1];
      c.test_fraction = s[2];
    }
    c.seed = j.value("seed", c.seed);
    c.parallel_folds = j.value("parallel_folds", c.parallel_folds);
    c.mlp.hidden = j.value("hidden", c.mlp.hidden);
    c.mlp.dropout = j.value("dropout", c.mlp.dropout);
    c.mlp.bn_momentum = j.value("bn_momentum", c.mlp.bn_momentum);
    c.mlp.bn_eps = j.value("bn_eps", c.mlp.bn_eps);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfiguration, std::string("bad training config: ") + e.what());
  }
  c.Validate();
  return c;
}

Split SplitIndices(std::size_t n, const TrainConfig& config) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(SeedFrom(config.seed, kSplitKey));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(n)));
  Split s;
  s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n, n_test)));
  const std::size_t val_end = std::min(n, n_test + n_val);
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(s.test.size()),
               order.begin() + static_cast<std::ptrdiff_t>(val_end));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(val_end), order.end());
  return s;
}

std::vector<std::size_t> FoldHoldout(std::span<const std::size_t> rows, std::size_t k,
                                     std::size_t f) {
  const std::size_t n = rows.size();
  return {rows.begin() + static_cast<std::ptrdiff_t>(f * n / k),
          rows.begin() + static_cast<std::ptrdiff_t>((f + 1) * n / k)};
}

std::vector<std::size_t> FoldTraining(std::span<const std::size_t> rows, std::size_t k,
                                      std::size_t f) {
  const std::size_t n = rows.size();
  std::vector<std::size_t> out(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(f * n / k));
  out.insert(out.end(), rows.begin() + static_cast<std::ptrdiff_t>((f + 1) * n / k), rows.end());
  return out;
}

MlpEnsemble::MlpEnsemble(std::vector<Mlp> members, double threshold)
    : members_(std::move(members)), threshold_(threshold) {
  if (members_.empty()) throw Error(ErrorCode::kInput, "an ensemble needs at least one model");
  for (const auto& m : members_) {
    if (m.config().input_dim != members_.front().config().input_dim) {
      throw Error(ErrorCode::kInput, "ensemble members disagree on input dimension");
    }
  }
  if (!(threshold_ >= 0 && threshold_ <= 1)) {
    throw Error(ErrorCode::kInput, "ensemble threshold must be in [0, 1]");
  }
}

std::size_t MlpEnsemble::input_dim() const {
  return members_.empty() ? 0 : members_.front().config().input_dim;
}

Vector MlpEnsemble::Probabilities(const Matrix& x) const {
  if (members_.empty()) throw Error(ErrorCode::kInput, "empty ensemble");
  Vector sum = Vector::Zero(x.rows());
  for (const auto& m : members_) {
    const Vector z = m.Logits(x);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      sum(i) += z(i) >= 0 ? 1.0 / (1.0 + std::exp(-z(i))) : std::exp(z(i)) / (1.0 + std::exp(z(i)));
    }
  }
  return sum / static_cast<double>(members_.size());
}

std::vector<std::uint8_t> MlpEnsemble::Predict(const Matrix& x) const {
  const Vector p = Probabilities(x);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p(i) >= threshold_ ? 1 : 0;
  return out;
}

Json MlpEnsemble::ToJson() const {
  Json members = Json::array();
  for (const auto& m : members_) members.push_back(m.ToJson());
  return {{"format", "groundcap-mlp-ensemble"},
          {"threshold", threshold_},
          {"positive_class", "ACCURATE"},
          {"members", members}};
}

MlpEnsemble MlpEnsemble::FromJson(const Json& j) {
  try {
    std::vector<Mlp> members;
    for (const auto& m : j.at("members")) members.push_back(Mlp::FromJson(m));
    return MlpEnsemble(std::move(members), j.value("threshold", 0.5));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("bad ensemble file: ") + e.what());
  }
}

void MlpEnsemble::Save(const std::filesystem::path& path) const { WriteJsonFile(path, ToJson()); }

MlpEnsemble MlpEnsemble::Load(const std::filesystem::path& path) {
  return FromJson(ReadJsonFile(path));
}

std::size_t Confusion::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

EvalReport Evaluate(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kInput, "truth and prediction lengths differ");
  }
  EvalReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion.counts[truth[i] ? 1 : 0][predicted[i] ? 1 : 0];
  }
  const auto& c = r.confusion.counts;
  r.accurate = ClassFrom(c[1][1], c[0][1], c[1][0]);
  r.inaccurate = ClassFrom(c[0][0], c[1][0], c[0][1]);
  if (!truth.empty()) {
    r.accuracy = static_cast<double>(c[0][0] + c[1][1]) / static_cast<double>(truth.size());
  }
  return r;
}

Json EvalToJson(const EvalReport& report) {
  auto cls = [](const ClassMetrics& m) {
    return Json{{"precision", OptionalJson(m.precision)},
                {"recall", OptionalJson(m.recall)},
                {"f1", OptionalJson(m.f1)},
                {"support", m.support}};
  };
  const auto& c = report.confusion.counts;
  return {{"accurate", cls(report.accurate)},
          {"inaccurate", cls(report.inaccurate)},
          {"accuracy", OptionalJson(report.accuracy)},
          {"confusion", {{"true_accurate_pred_accurate", c[1][1]},
                         {"true_accurate_pred_inaccurate", c[1][0]},
                         {"true_inaccurate_pred_accurate", c[0][1]},
                         {"true_inaccurate_pred_inaccurate", c[0][0]}}}};
}

std::string FormatTableRow(std::string_view name, const EvalReport& report) {
  const auto& a = report.accurate;
  const auto& i = report.inaccurate;
  return std::string(name) + " | " + Fixed4(a.precision) + " " + Fixed4(a.recall) + " " +
         Fixed4(a.f1) + " | " + Fixed4(i.precision) + " " + Fixed4(i.recall) + " " + Fixed4(i.f1);
}

Mlp TrainModel(const Dataset& data, std::span<const std::size_t> rows,
               std::span<const std::size_t> val, std::span<const std::size_t> holdout,
               const TrainConfig& config, std::uint64_t seed, FoldHistory* history) {
  MlpConfig mc = config.mlp;
  mc.input_dim = data.dim;
  std::mt19937_64 rng(seed);
  Mlp model(mc, rng());
  AdamW opt(model.params(), config.lr, config.weight_decay);
  PlateauScheduler scheduler(config.scheduler_factor, config.scheduler_patience,
                             config.scheduler_threshold);
  const Matrix val_x = data.Rows(val);
  const auto val_y = data.Labels(val);
  const Matrix hold_x = data.Rows(holdout);
  const auto hold_y = data.Labels(holdout);

  FoldHistory local;
  FoldHistory& h = history ? *history : local;
  h.seed = seed;
  h.train_rows = rows.size();
  h.holdout_rows = holdout.size();

  std::vector<std::size_t> order(rows.begin(), rows.end());
  ForwardCache cache;
  Vector dlogits;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) try {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      if (idx.size() < 2) {
        spdlog::warn("epoch {}: skipping a final batch of size 1", epoch);
        ++h.skipped_batches;
        continue;
      }
      const Matrix x = data.Rows(idx);
      const auto y = data.Labels(idx);
      const auto masks = model.SampleDropoutMasks(idx.size(), rng);
      const Vector logits = model.ForwardTrain(x, masks, &cache, true);
      const double loss = BceWithLogits(logits, y, &dlogits);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kTraining, "training loss diverged at epoch " + std::to_string(epoch));
      }
      opt.Step(model.params(), model.Backward(cache, dlogits));
      loss_sum += loss * static_cast<double>(idx.size());
      seen += idx.size();
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = opt.lr();
    rec.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    rec.val_loss = EvalLoss(model, val_x, val_y);
    rec.holdout_loss = EvalLoss(model, hold_x, hold_y);
    if (!std::isfinite(rec.val_loss)) {
      throw Error(ErrorCode::kTraining, "validation loss diverged at epoch " + std::to_string(epoch));
    }
    double lr = opt.lr();
    rec.lr_reduced = scheduler.Step(rec.val_loss, lr);
    opt.set_lr(lr);
    h.epochs.push_back(rec);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumeric) throw;
    throw Error(ErrorCode::kTraining,
                "training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
  }
  model.QuantizeToFloat();
  return model;
}

TrainResult Train(const Dataset& data, const TrainConfig& config) {
  config.Validate();
  const std::size_t positives = data.CountAccurate();
  if (positives == 0 || positives == data.size()) {
    throw Error(ErrorCode::kInput, "training data must contain both ACCURATE and INACCURATE rows");
  }
  TrainResult result;
  result.split = SplitIndices(data.size(), config);
  const auto& split = result.split;
  if (split.train.size() < config.folds * 2 || split.val.empty()) {
    throw Error(ErrorCode::kInput, "too few rows for the requested split and folds");
  }

  auto run_fold = [&](std::size_t f) {
    FoldHistory h;
    h.fold = f;
    const auto rows = FoldTraining(split.train, config.folds, f);
    const auto hold = FoldHoldout(split.train, config.folds, f);
    Mlp m = TrainModel(data, rows, split.val, hold, config, SeedFrom(config.seed, f), &h);
    return std::make_pair(std::move(m), std::move(h));
  };

  std::vector<Mlp> members;
  if (config.parallel_folds) {
    std::vector<std::future<std::pair<Mlp, FoldHistory>>> futures;
    for (std::size_t f = 0; f < config.folds; ++f) {
      futures.push_back(std::async(std::launch::async, run_fold, f));
    }
    for (auto& fut : futures) {
      auto [m, h] = fut.get();
      members.push_back(std::move(m));
      result.history.push_back(std::move(h));
    }
  } else {
    for (std::size_t f = 0; f < config.folds; ++f) {
      auto [m, h] = run_fold(f);
      members.push_back(std::move(m));
      result.history.push_back(std::move(h));
    }
  }
  result.ensemble = MlpEnsemble(std::move(members));

  const auto truth = data.Labels(split.test);
  result.test = Evaluate(truth, result.ensemble.Predict(data.Rows(split.test)));
  result.majority = Evaluate(truth, std::vector<std::uint8_t>(truth.size(), 1));
  return result;
}

Json HistoryToJson(const std::vector<FoldHistory>& history) {
  Json out = Json::array();
  for (const auto& h : history) {
    Json epochs = Json::array();
    for (const auto& e : h.epochs) {
      epochs.push_back({{"epoch", e.epoch},
                        {"lr", e.lr},
                        {"train_loss", e.train_loss},
                        {"val_loss", e.val_loss},
                        {"holdout_loss", e.holdout_loss},
                        {"lr_reduced", e.lr_reduced}});
    }
    out.push_back({{"fold", h.fold},
                   {"seed", h.seed},
                   {"train_rows", h.train_rows},
                   {"holdout_rows", h.holdout_rows},
                   {"skipped_batches", h.skipped_batches},
                   {"epochs", epochs}});
  }
  return out;
}

}  // namespace groundcap::classifier
