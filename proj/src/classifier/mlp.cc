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

#include "groundcap/classifier/mlp.h"

#include <cmath>

#include "groundcap/common/encoding.h"
#include "groundcap/common/error.h"

namespace groundcap::classifier {
namespace {

double Uniform(std::mt19937_64& rng, double bound) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * bound;
}

template <typename M>
void FillUniform(M& m, std::mt19937_64& rng, double bound) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Uniform(rng, bound);
}

template <typename M>
void Quantize(M& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<double>(static_cast<float>(m.data()[i]));
  }
}

template <typename M>
std::string EncodeBlock(const M& m) {
  std::vector<float> f(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) f[i] = static_cast<float>(m.data()[i]);
  return EncodeFloatsBase64(f);
}

template <typename M>
void DecodeBlock(const Json& j, const char* name, M& m) {
  const auto f = DecodeFloatsBase64(j.at(name).get<std::string>());
  if (f.size() != static_cast<std::size_t>(m.size())) {
    throw Error(ErrorCode::kInput, std::string("model block '") + name + "' has the wrong size");
  }
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f[i];
}

std::span<double> Span(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> Span(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void AdamUpdate(std::span<double> p, std::span<const double> g, std::vector<double>& m,
                std::vector<double>& v, double lr, double b1, double b2, double eps,
                long step, double l2) {
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));
  const double step_size = lr / bc1;
  const double sqrt_bc2 = std::sqrt(bc2);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double gi = g[i] + l2 * p[i];
    m[i] = b1 * m[i] + (1.0 - b1) * gi;
    v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
    p[i] -= step_size * m[i] / (std::sqrt(v[i]) / sqrt_bc2 + eps);
  }
}

std::vector<std::vector<double>> ZerosLike(const MlpParams& like) {
  std::vector<std::vector<double>> out;
  for (auto b : like.Blocks()) out.emplace_back(b.size(), 0.0);
  return out;
}

}  // namespace

std::vector<std::span<double>> MlpParams::Blocks() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.push_back(Span(l.weight));
    out.push_back(Span(l.bias));
    out.push_back(Span(l.gamma));
    out.push_back(Span(l.beta));
  }
  out.push_back(Span(out_weight));
  out.push_back(Span(out_bias));
  return out;
}

std::vector<std::span<const double>> MlpParams::Blocks() const {
  std::vector<std::span<const double>> out;
  for (auto b : const_cast<MlpParams*>(this)->Blocks()) out.emplace_back(b.data(), b.size());
  return out;
}

std::size_t MlpParams::Count() const {
  std::size_t n = 0;
  for (auto b : Blocks()) n += b.size();
  return n;
}

Mlp::Mlp(const MlpConfig& config, std::uint64_t seed) : config_(config) {
  if (config.input_dim == 0 || config.hidden.empty()) {
    throw Error(ErrorCode::kConfiguration, "MLP needs an input dimension and hidden layers");
  }
  std::mt19937_64 rng(seed);
  std::size_t in = config.input_dim;
  for (std::size_t width : config.hidden) {
    HiddenLayer l;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    l.weight.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(in));
    l.bias.resize(static_cast<Eigen::Index>(width));
    FillUniform(l.weight, rng, bound);
    FillUniform(l.bias, rng, bound);
    l.gamma = Vector::Ones(static_cast<Eigen::Index>(width));
    l.beta = Vector::Zero(static_cast<Eigen::Index>(width));
    l.running_mean = Vector::Zero(static_cast<Eigen::Index>(width));
    l.running_var = Vector::Ones(static_cast<Eigen::Index>(width));
    params_.layers.push_back(std::move(l));
    in = width;
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  params_.out_weight.resize(1, static_cast<Eigen::Index>(in));
  params_.out_bias.resize(1);
  FillUniform(params_.out_weight, rng, bound);
  FillUniform(params_.out_bias, rng, bound);
}

Mlp::Mlp(const MlpConfig& config, MlpParams params)
    : config_(config), params_(std::move(params)) {
  std::size_t in = config.input_dim;
  if (params_.layers.size() != config.hidden.size()) {
    throw Error(ErrorCode::kInput, "layer count does not match the configuration");
  }
  for (std::size_t i = 0; i < params_.layers.size(); ++i) {
    const auto& l = params_.layers[i];
    const auto w = static_cast<Eigen::Index>(config.hidden[i]);
    if (l.weight.rows() != w || l.weight.cols() != static_cast<Eigen::Index>(in) ||
        l.bias.size() != w || l.gamma.size() != w || l.beta.size() != w ||
        l.running_mean.size() != w || l.running_var.size() != w) {
      throw Error(ErrorCode::kInput, "hidden layer " + std::to_string(i) + " has inconsistent shapes");
    }
    if ((l.running_var.array() <= 0.0).any()) {
      throw Error(ErrorCode::kInput, "running variance must be positive");
    }
    in = config.hidden[i];
  }
  if (params_.out_weight.rows() != 1 || params_.out_weight.cols() != static_cast<Eigen::Index>(in) ||
      params_.out_bias.size() != 1) {
    throw Error(ErrorCode::kInput, "output layer has inconsistent shapes");
  }
}

Vector Mlp::Logits(const Matrix& x) const {
  if (x.cols() != static_cast<Eigen::Index>(config_.input_dim)) {
    throw Error(ErrorCode::kInput, "feature dimension " + std::to_string(x.cols()) +
                                       " does not match model input " +
                                       std::to_string(config_.input_dim));
  }
  Matrix cur = x;
  for (std::size_t i = 0; i < params_.layers.size(); ++i) {
    const auto& l = params_.layers[i];
    Matrix z = cur * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    const Eigen::ArrayXd scale =
        l.gamma.array() / (l.running_var.array() + config_.bn_eps).sqrt();
    const Eigen::ArrayXd shift = l.beta.array() - l.running_mean.array() * scale;
    z = ((z.array().rowwise() * scale.transpose()).rowwise() + shift.transpose()).cwiseMax(0.0);
    if (!z.allFinite()) {
      throw Error(ErrorCode::kNumeric, "non-finite activation in hidden layer " + std::to_string(i));
    }
    cur = std::move(z);
  }
  Vector logits = cur * params_.out_weight.transpose();
  logits.array() += params_.out_bias(0);
  if (!logits.allFinite()) throw Error(ErrorCode::kNumeric, "non-finite activation in output layer");
  return logits;
}

Vector Mlp::ForwardTrain(const Matrix& x, const std::vector<Matrix>& dropout_masks,
                         ForwardCache* cache, bool update_running) {
  const auto batch = x.rows();
  if (batch < 2) throw Error(ErrorCode::kInput, "train-mode batch norm needs at least 2 rows");
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c = ForwardCache{};
  Matrix cur = x;
  for (std::size_t i = 0; i < params_.layers.size(); ++i) {
    auto& l = params_.layers[i];
    c.inputs.push_back(cur);
    Matrix z = cur * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    const Vector mean = z.colwise().mean().transpose();
    z.rowwise() -= mean.transpose();
    const Vector var = z.array().square().colwise().mean().transpose();
    const Vector inv_std = (var.array() + config_.bn_eps).rsqrt();
    Matrix xhat = z.array().rowwise() * inv_std.transpose().array();
    Matrix y = (xhat.array().rowwise() * l.gamma.transpose().array()).rowwise() +
               l.beta.transpose().array();
    Matrix relu = (y.array() > 0.0).cast<double>();
    cur = y.cwiseProduct(relu).cwiseProduct(dropout_masks.at(i));
    if (!cur.allFinite()) {
      throw Error(ErrorCode::kNumeric, "non-finite activation in hidden layer " + std::to_string(i));
    }
    if (update_running) {
      const double m = config_.bn_momentum;
      const double unbias = static_cast<double>(batch) / static_cast<double>(batch - 1);
      l.running_mean = (1.0 - m) * l.running_mean + m * mean;
      l.running_var = (1.0 - m) * l.running_var + m * unbias * var;
    }
    c.xhat.push_back(std::move(xhat));
    c.inv_std.push_back(inv_std);
    c.relu_mask.push_back(std::move(relu));
    c.dropout.push_back(dropout_masks.at(i));
  }
  c.last = cur;
  Vector logits = cur * params_.out_weight.transpose();
  logits.array() += params_.out_bias(0);
  if (!logits.allFinite()) throw Error(ErrorCode::kNumeric, "non-finite activation in output layer");
  return logits;
}

MlpParams Mlp::Backward(const ForwardCache& c, const Vector& dlogits) const {
  MlpParams g;
  g.layers.resize(params_.layers.size());
  g.out_weight = dlogits.transpose() * c.last;
  g.out_bias = Vector::Constant(1, dlogits.sum());
  Matrix dcur = dlogits * params_.out_weight;
  for (std::size_t k = params_.layers.size(); k-- > 0;) {
    const auto& l = params_.layers[k];
    Matrix dy = dcur.cwiseProduct(c.dropout[k]).cwiseProduct(c.relu_mask[k]);
    auto& gl = g.layers[k];
    gl.gamma = dy.cwiseProduct(c.xhat[k]).colwise().sum().transpose();
    gl.beta = dy.colwise().sum().transpose();
    Matrix dxhat = dy.array().rowwise() * l.gamma.transpose().array();
    const Vector mean_dxhat = dxhat.colwise().mean().transpose();
    const Vector mean_dxhat_xhat = dxhat.cwiseProduct(c.xhat[k]).colwise().mean().transpose();
    Matrix dz = dxhat;
    dz.rowwise() -= mean_dxhat.transpose();
    dz -= (c.xhat[k].array().rowwise() * mean_dxhat_xhat.transpose().array()).matrix();
    dz = dz.array().rowwise() * c.inv_std[k].transpose().array();
    gl.weight = dz.transpose() * c.inputs[k];
    gl.bias = dz.colwise().sum().transpose();
    dcur = dz * l.weight;
  }
  return g;
}

std::vector<Matrix> Mlp::SampleDropoutMasks(std::size_t batch, std::mt19937_64& rng) const {
  const double keep = 1.0 - config_.dropout;
  const double scale = keep > 0 ? 1.0 / keep : 0.0;
  std::vector<Matrix> masks;
  for (std::size_t width : config_.hidden) {
    Matrix m(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(width));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53 < keep ? scale : 0.0;
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

std::vector<Matrix> Mlp::NoDropout(std::size_t batch) const {
  std::vector<Matrix> masks;
  for (std::size_t width : config_.hidden) {
    masks.push_back(Matrix::Ones(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(width)));
  }
  return masks;
}

void Mlp::QuantizeToFloat() {
  for (auto& l : params_.layers) {
    Quantize(l.weight);
    Quantize(l.bias);
    Quantize(l.gamma);
    Quantize(l.beta);
    Quantize(l.running_mean);
    Quantize(l.running_var);
  }
  Quantize(params_.out_weight);
  Quantize(params_.out_bias);
}

Json Mlp::ToJson() const {
  Json layers = Json::array();
  for (const auto& l : params_.layers) {
    layers.push_back({{"weight", EncodeBlock(l.weight)},
                      {"bias", EncodeBlock(l.bias)},
                      {"gamma", EncodeBlock(l.gamma)},
                      {"beta", EncodeBlock(l.beta)},
                      {"running_mean", EncodeBlock(l.running_mean)},
                      {"running_var", EncodeBlock(l.running_var)}});
  }
  return {{"input_dim", config_.input_dim},
          {"hidden", config_.hidden},
          {"dropout", config_.dropout},
          {"bn_momentum", config_.bn_momentum},
          {"bn_eps", config_.bn_eps},
          {"layers", layers},
          {"output", {{"weight", EncodeBlock(params_.out_weight)},
                      {"bias", EncodeBlock(params_.out_bias)}}}};
}

Mlp Mlp::FromJson(const Json& j) {
  try {
    MlpConfig cfg;
    cfg.input_dim = j.at("input_dim").get<std::size_t>();
    cfg.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.bn_momentum = j.at("bn_momentum").get<double>();
    cfg.bn_eps = j.at("bn_eps").get<double>();
    const Json& layers = j.at("layers");
    if (layers.size() != cfg.hidden.size()) {
      throw Error(ErrorCode::kInput, "layer count does not match the hidden sizes");
    }
    MlpParams p;
    std::size_t in = cfg.input_dim;
    for (std::size_t i = 0; i < cfg.hidden.size(); ++i) {
      const auto w = static_cast<Eigen::Index>(cfg.hidden[i]);
      HiddenLayer l;
      l.weight.resize(w, static_cast<Eigen::Index>(in));
      l.bias.resize(w);
      l.gamma.resize(w);
      l.beta.resize(w);
      l.running_mean.resize(w);
      l.running_var.resize(w);
      DecodeBlock(layers[i], "weight", l.weight);
      DecodeBlock(layers[i], "bias", l.bias);
      DecodeBlock(layers[i], "gamma", l.gamma);
      DecodeBlock(layers[i], "beta", l.beta);
      DecodeBlock(layers[i], "running_mean", l.running_mean);
      DecodeBlock(layers[i], "running_var", l.running_var);
      p.layers.push_back(std::move(l));
      in = cfg.hidden[i];
    }
    p.out_weight.resize(1, static_cast<Eigen::Index>(in));
    p.out_bias.resize(1);
    DecodeBlock(j.at("output"), "weight", p.out_weight);
    DecodeBlock(j.at("output"), "bias", p.out_bias);
    return Mlp(cfg, std::move(p));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("bad MLP model: ") + e.what());
  }
}

double BceWithLogits(const Vector& logits, std::span<const std::uint8_t> labels,
                     Vector* dlogits) {
  const auto n = logits.size();
  double loss = 0.0;
  if (dlogits) dlogits->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = logits(i);
    const double y = labels[static_cast<std::size_t>(i)];
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    loss += softplus - y * z;
    if (dlogits) {
      const double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      (*dlogits)(i) = (sig - y) / static_cast<double>(n);
    }
  }
  return loss / static_cast<double>(n);
}

AdamW::AdamW(const MlpParams& like, double lr, double weight_decay, double beta1, double beta2,
             double eps)
    : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps), m_(ZerosLike(like)),
      v_(ZerosLike(like)) {}

void AdamW::Step(MlpParams& params, const MlpParams& grads) {
  ++step_;
  auto p = params.Blocks();
  const auto g = grads.Blocks();
  for (std::size_t b = 0; b < p.size(); ++b) {
    const double decay = 1.0 - lr_ * wd_;
    for (double& x : p[b]) x *= decay;
    AdamUpdate(p[b], g[b], m_[b], v_[b], lr_, b1_, b2_, eps_, step_, 0.0);
  }
}

Adam::Adam(const MlpParams& like, double lr, double weight_decay, double beta1, double beta2,
           double eps)
    : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps), m_(ZerosLike(like)),
      v_(ZerosLike(like)) {}

void Adam::Step(MlpParams& params, const MlpParams& grads) {
  ++step_;
  auto p = params.Blocks();
  const auto g = grads.Blocks();
  for (std::size_t b = 0; b < p.size(); ++b) {
    AdamUpdate(p[b], g[b], m_[b], v_[b], lr_, b1_, b2_, eps_, step_, wd_);
  }
}

bool PlateauScheduler::Step(double val_loss, double& lr) {
  if (!has_best_ || val_loss < best_ - threshold_) {
    best_ = val_loss;
    has_best_ = true;
    bad_epochs_ = 0;
    return false;
  }
  if (++bad_epochs_ < patience_) return false;
  lr *= factor_;
  bad_epochs_ = 0;
  return true;
}

}  // namespace groundcap::classifier
