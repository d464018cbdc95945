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


#ifndef GROUNDCAP_TESTS_TESTING_GRADIENT_CHECK_H_
#define GROUNDCAP_TESTS_TESTING_GRADIENT_CHECK_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "groundcap/classifier/mlp.h"
#include "groundcap/common/random.h"

namespace groundcap::testing {

struct GradientCheckResult {
  double worst_relative_error = 0.0;  // norm-wise, per instance
  std::size_t skipped = 0;            // coordinates at ReLU kinks
  std::size_t total = 0;
  bool shapes_ok = true;
};

inline double VectorNorm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Backward() against central differences (step 1e-4) of the mean BCE loss in
// training mode, on `instances` random networks with input dimension 8 and a
// batch of 16. Batch-norm affine parameters are moved off their identity
// init. Central differences are not a valid oracle for a coordinate whose
// stencil moves a ReLU input across zero; those coordinates are left out.
inline GradientCheckResult RunGradientCheck(std::size_t instances, std::uint64_t seed) {
  using classifier::ForwardCache;
  using classifier::Matrix;
  using classifier::Vector;
  classifier::MlpConfig cfg;
  cfg.input_dim = 8;
  cfg.hidden = {12, 8, 6};
  GradientCheckResult result;
  for (std::uint64_t inst = 0; inst < instances; ++inst) {
    std::mt19937_64 rng(SeedFrom(seed, inst));
    classifier::Mlp m(cfg, rng());
    for (auto& l : m.params().layers) {
      for (Eigen::Index i = 0; i < l.gamma.size(); ++i) {
        l.gamma(i) = 0.5 + UnitUniform(rng());
        l.beta(i) = UnitUniform(rng()) - 0.5;
      }
    }
    const std::size_t batch = 16;
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(static_cast<Eigen::Index>(batch), 8);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    std::vector<std::uint8_t> y(batch);
    for (auto& v : y) v = rng() & 1;
    const auto masks = m.SampleDropoutMasks(batch, rng);

    ForwardCache cache;
    Vector dl;
    classifier::BceWithLogits(m.ForwardTrain(x, masks, &cache, false), y, &dl);
    std::vector<double> analytic;
    for (auto b : m.Backward(cache, dl).Blocks()) analytic.insert(analytic.end(), b.begin(), b.end());

    std::vector<double> numeric, kept;
    std::size_t k = 0;
    ForwardCache c_up, c_down;
    for (auto block : m.params().Blocks()) {
      for (double& w : block) {
        const double saved = w;
        w = saved + 1e-4;
        const double up = classifier::BceWithLogits(m.ForwardTrain(x, masks, &c_up, false), y, nullptr);
        w = saved - 1e-4;
        const double down =
            classifier::BceWithLogits(m.ForwardTrain(x, masks, &c_down, false), y, nullptr);
        w = saved;
        if (c_up.relu_mask == c_down.relu_mask && c_up.relu_mask == cache.relu_mask) {
          numeric.push_back((up - down) / 2e-4);
          kept.push_back(analytic[k]);
        } else {
          ++result.skipped;
        }
        ++k;
        ++result.total;
      }
    }
    result.shapes_ok = result.shapes_ok && k == analytic.size();
    std::vector<double> diff(numeric.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = kept[i] - numeric[i];
    const double rel = VectorNorm(diff) / std::max({VectorNorm(kept), VectorNorm(numeric), 1e-12});
    result.worst_relative_error = std::max(result.worst_relative_error, rel);
  }
  return result;
}

}  // namespace groundcap::testing

#endif  // GROUNDCAP_TESTS_TESTING_GRADIENT_CHECK_H_
