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

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "groundcap/common/error.h"
#include "groundcap/common/random.h"
#include "groundcap/fusion/fusion.h"

namespace groundcap::fusion {
namespace {

// Independent extended-precision evaluation of the logistic model.
long double OracleP(const std::array<long double, 4>& w, const std::array<long double, 3>& c) {
  const long double z = w[0] + w[1] * c[0] + w[2] * c[1] + w[3] * c[2];
  return 1.0L / (1.0L + std::exp(-z));
}

constexpr std::array<long double, 4> kDefaultW = {-1.7251L, 2.6723L, 1.6066L, 2.2660L};

double UnitUniformFor(int s, int i, int j) {
  return UnitUniform(SeedFrom(1000 + s, i, j));
}

DetectionScoreRecord Rec(double a, double b, double c, std::optional<int> label = {}) {
  return {"c", "dog", a, b, c, label};
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("prediction with the default model") {
  const auto m = FusionModel::Default();
  const double p0 = PredictPExist(m, Rec(0, 0, 0));
  const double p1 = PredictPExist(m, Rec(1, 1, 1));
  CHECK(m.Logit({0, 0, 0}) == doctest::Approx(-1.7251).epsilon(1e-12));
  CHECK(m.Logit({1, 1, 1}) == doctest::Approx(4.8198).epsilon(1e-12));
  CHECK(std::abs(p0 - static_cast<double>(OracleP(kDefaultW, {0, 0, 0}))) < 1e-12);
  CHECK(std::abs(p1 - static_cast<double>(OracleP(kDefaultW, {1, 1, 1}))) < 1e-12);
  // The quoted approximations are 0.15124 and 0.99199; the exact values are
  // 0.1512154 and 0.9919962.
  CHECK(std::abs(p0 - 0.15124) < 5e-5);
  CHECK(std::abs(p1 - 0.99199) < 5e-5);
  CHECK_FALSE(ClassifyObject(p0, 0.5));
  CHECK(PredictPExist(FusionModel{}, Rec(0.3, 0.9, 0.1)) == 0.5);
}

TEST_CASE("classification boundary") {
  CHECK(ClassifyObject(0.9, 0.5));
  CHECK(ClassifyObject(0.5, 0.5));
  CHECK_FALSE(ClassifyObject(0.4999, 0.5));
}

TEST_CASE("invalid confidences") {
  const auto m = FusionModel::Default();
  CHECK_THROWS_AS(PredictPExist(m, Rec(NAN, 0, 0)), Error);
  CHECK_THROWS_AS(PredictPExist(m, Rec(0, INFINITY, 0)), Error);
  CHECK_THROWS_AS(PredictPExist(m, Rec(0, 0, 1.2)), Error);
  DetectionScoreRecord partial = Rec(0.1, 0.2, 0.3);
  partial.dino_conf.reset();
  CHECK_THROWS_AS(PredictPExist(m, partial), Error);
}

TEST_CASE("monotone in each confidence and logit round trip") {
  const auto m = FusionModel::Default();
  for (int dim = 0; dim < 3; ++dim) {
    double prev = -1.0;
    for (int i = 0; i <= 20; ++i) {
      std::array<double, 3> c = {0.3, 0.4, 0.5};
      c[dim] = i / 20.0;
      const double p = PredictPExist(m, c);
      CHECK(p > prev);
      prev = p;
      const double logit = std::log(p / (1 - p));
      CHECK(std::abs(logit - m.Logit(c)) < 1e-9);
    }
  }
}

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto recs = SampleRecordsIid(FusionModel::Default(), 40, seed);
    std::vector<std::array<double, 3>> x;
    std::vector<int> y;
    for (const auto& r : recs) {
      x.push_back(r.confs());
      y.push_back(*r.label);
    }
    const std::array<double, 4> w = {0.3 * seed, -0.7, 1.1, 0.2 * seed};
    const auto g = MeanLogLikelihoodGradient(FusionModel::FromArray(w), x, y);
    double num = 0, den = 0;
    for (int i = 0; i < 4; ++i) {
      auto hi = w, lo = w;
      hi[i] += 1e-6;
      lo[i] -= 1e-6;
      const double fd = (MeanLogLikelihood(FusionModel::FromArray(hi), x, y) -
                         MeanLogLikelihood(FusionModel::FromArray(lo), x, y)) / 2e-6;
      num += (fd - g[i]) * (fd - g[i]);
      den += g[i] * g[i];
    }
    CHECK(std::sqrt(num / den) < 1e-4);
  }
}

TEST_CASE("refit on stratified synthetic data recovers the model") {
  auto recs = SampleRecordsStratified(FusionModel::Default(), 1000, 50, 2026);
  CHECK(recs.size() == 50000);
  TrainOptions opts;
  auto report = TrainFusion(recs, opts);
  const auto got = report.model.AsArray();
  const auto want = FusionModel::Default().AsArray();
  for (int i = 0; i < 4; ++i) {
    INFO("coefficient " << i << " got " << got[i]);
    CHECK(std::abs(got[i] - want[i]) <= 0.05);
  }
  CHECK(report.final_fit.converged);
  CHECK(report.folds.size() == 5);
}

TEST_CASE("refit on i.i.d. synthetic data is within sampling error") {
  // Standard errors at this size are 0.03 to 0.045; allow about 4 sigma.
  auto recs = SampleRecordsIid(FusionModel::Default(), 50000, 77);
  auto fit = TrainFusion(recs, {}).model.AsArray();
  const auto want = FusionModel::Default().AsArray();
  for (int i = 0; i < 4; ++i) CHECK(std::abs(fit[i] - want[i]) <= 0.18);
}

TEST_CASE("separable data runs to the iteration cap") {
  std::vector<DetectionScoreRecord> recs;
  for (int i = 0; i < 40; ++i) {
    const double v = (i % 20) / 40.0;
    recs.push_back(i < 20 ? Rec(v, v, v, 0) : Rec(0.5 + v, 0.5 + v, 0.5 + v, 1));
  }
  auto report = TrainFusion(recs, {});
  for (const auto& f : report.folds) {
    CHECK(f.iterations == 1000);
    CHECK(f.train_accuracy == 1.0);
  }
  CHECK_FALSE(report.final_fit.converged);
}

TEST_CASE("random labels give chance accuracy") {
  double total = 0.0;
  const int seeds = 8;
  for (int s = 0; s < seeds; ++s) {
    std::vector<DetectionScoreRecord> recs;
    for (int i = 0; i < 1000; ++i) {
      recs.push_back(Rec(UnitUniformFor(s, i, 0), UnitUniformFor(s, i, 1), UnitUniformFor(s, i, 2),
                         i % 2));
    }
    TrainOptions opts;
    opts.seed = s;
    total += TrainFusion(recs, opts).accuracy.mean;
  }
  CHECK(std::abs(total / seeds - 0.5) <= 0.05);
}

TEST_CASE("training errors") {
  std::vector<DetectionScoreRecord> one_class = {Rec(0.1, 0.1, 0.1, 1), Rec(0.2, 0.2, 0.2, 1),
                                                 Rec(0.3, 0.3, 0.3, 1), Rec(0.9, 0.9, 0.9, 0)};
  try {
    TrainFusion(one_class, {});
    FAIL("expected a training error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTraining);
  }
}

TEST_CASE("downsampling balances classes deterministically") {
  auto recs = SampleRecordsIid(FusionModel::Default(), 3000, 5);
  TrainOptions opts;
  opts.downsample = true;
  opts.seed = 11;
  auto a = TrainFusion(recs, opts);
  auto b = TrainFusion(recs, opts);
  CHECK(a.positives == a.negatives);
  CHECK(a.model.AsArray() == b.model.AsArray());
  std::vector<int> labels = {1, 1, 1, 0, 1, 0, 1};
  auto subset = BalancedSubset(labels, 3);
  CHECK(subset.size() == 4);
  CHECK(subset == BalancedSubset(labels, 3));
}

TEST_CASE("partial and unlabeled records are skipped") {
  auto recs = SampleRecordsIid(FusionModel::Default(), 200, 8);
  recs[0].yolo_conf.reset();
  recs[1].label.reset();
  auto report = TrainFusion(recs, {});
  CHECK(report.skipped == 2);
  CHECK(report.positives + report.negatives == 198);
}

TEST_CASE("records and models round trip through JSON") {
  auto dir = std::filesystem::temp_directory_path() / "groundcap_fusion_test";
  DetectionScoreRecord partial = Rec(0.25, 0.5, 0.75, 1);
  partial.tagclip_conf.reset();
  std::vector<DetectionScoreRecord> recs = {Rec(0.1, 0.2, 0.3, 0), partial, Rec(1, 1, 1)};
  WriteScoreRecords(dir / "scores.jsonl", recs);
  auto back = ReadScoreRecords(dir / "scores.jsonl");
  REQUIRE(back.size() == 3);
  CHECK(back[0].confs() == recs[0].confs());
  CHECK_FALSE(back[1].complete());
  CHECK_FALSE(back[2].label.has_value());

  SaveModel(dir / "model.json", FusionModel::Default(), {{"seed", 3}});
  CHECK(LoadModel(dir / "model.json").AsArray() == FusionModel::Default().AsArray());
  CHECK_THROWS_AS(ModelFromJson(Json::parse(R"({"intercept": 1})")), Error);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE

}  // namespace groundcap::fusion
