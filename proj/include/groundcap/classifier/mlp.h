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

#ifndef GROUNDCAP_CLASSIFIER_MLP_H_
#define GROUNDCAP_CLASSIFIER_MLP_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "groundcap/common/jsonl.h"

namespace groundcap::classifier {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct MlpConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden = {256, 128, 64};
  double dropout = 0.5;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
};

// Linear -> BatchNorm1d -> ReLU -> Dropout.
struct HiddenLayer {
  Matrix weight;  // out x in
  Vector bias, gamma, beta;
  Vector running_mean, running_var;
};

// Trainable parameters in a fixed order; also used for gradients, where the
// running statistics are unused.
struct MlpParams {
  std::vector<HiddenLayer> layers;
  Matrix out_weight;  // 1 x last hidden
  Vector out_bias;    // size 1

  // weight, bias, gamma, beta per hidden layer, then the output layer.
  std::vector<std::span<double>> Blocks();
  std::vector<std::span<const double>> Blocks() const;
  std::size_t Count() const;
};

// Activations kept by a train-mode forward pass for Backward.
struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each hidden layer's Linear
  std::vector<Matrix> xhat;    // normalized pre-activations
  std::vector<Vector> inv_std;
  std::vector<Matrix> relu_mask;  // 1 where the pre-dropout activation > 0
  std::vector<Matrix> dropout;    // 0 or 1/(1-p)
  Matrix last;                    // input to the output layer
};

class Mlp {
 public:
  Mlp() = default;
  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); gamma 1, beta 0,
  // running mean 0, running variance 1.
  Mlp(const MlpConfig& config, std::uint64_t seed);
  Mlp(const MlpConfig& config, MlpParams params);

  const MlpConfig& config() const { return config_; }
  MlpParams& params() { return params_; }
  const MlpParams& params() const { return params_; }

  // Eval mode: running statistics, no dropout. Throws Error(kNumeric) naming
  // the layer when a non-finite value appears.
  Vector Logits(const Matrix& x) const;

  // Train mode with batch statistics and the given dropout masks (one per
  // hidden layer, batch x width). Updates running statistics when asked.
  Vector ForwardTrain(const Matrix& x, const std::vector<Matrix>& dropout_masks,
                      ForwardCache* cache, bool update_running);
  // Gradients of sum(dlogits .* logits) with respect to every parameter.
  MlpParams Backward(const ForwardCache& cache, const Vector& dlogits) const;

  // Masks with entries 0 or 1/(1-p), drawn from `rng`.
  std::vector<Matrix> SampleDropoutMasks(std::size_t batch, std::mt19937_64& rng) const;
  // All-ones masks.
  std::vector<Matrix> NoDropout(std::size_t batch) const;

  // Rounds every parameter and running statistic to float precision.
  void QuantizeToFloat();

  Json ToJson() const;
  static Mlp FromJson(const Json& j);

 private:
  MlpConfig config_;
  MlpParams params_;
};

// Mean BCE-with-logits loss and its gradient with respect to the logits.
// labels are 0/1.
double BceWithLogits(const Vector& logits, std::span<const std::uint8_t> labels,
                     Vector* dlogits);

// Decoupled weight decay (AdamW): p -= lr * wd * p, then the Adam update.
class AdamW {
 public:
  AdamW(const MlpParams& like, double lr, double weight_decay, double beta1 = 0.9,
        double beta2 = 0.999, double eps = 1e-8);
  void Step(MlpParams& params, const MlpParams& grads);
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, wd_, b1_, b2_, eps_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Classic Adam with L2 folded into the gradient.
class Adam {
 public:
  Adam(const MlpParams& like, double lr, double weight_decay, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);
  void Step(MlpParams& params, const MlpParams& grads);

 private:
  double lr_, wd_, b1_, b2_, eps_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Multiplies the learning rate by `factor` once validation loss has failed to
// improve on the best value by more than `threshold` for `patience`
// consecutive epochs; the count then restarts.
class PlateauScheduler {
 public:
  PlateauScheduler(double factor, int patience, double threshold)
      : factor_(factor), patience_(patience), threshold_(threshold) {}
  // Returns true when the learning rate was reduced.
  bool Step(double val_loss, double& lr);
  int bad_epochs() const { return bad_epochs_; }

 private:
  double factor_;
  int patience_;
  double threshold_;
  double best_ = 0.0;
  bool has_best_ = false;
  int bad_epochs_ = 0;
};

}  // namespace groundcap::classifier

#endif  // GROUNDCAP_CLASSIFIER_MLP_H_
