// Copyright 2026 The DAPrompt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "daprompt/nn.h"

#include <cmath>
#include <limits>

namespace daprompt {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void RowSoftmaxInPlace(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

}  // namespace

Parameter::Parameter(std::string name, int rows, int cols)
    : name(std::move(name)),
      value(Matrix::Zero(rows, cols)),
      grad(Matrix::Zero(rows, cols)),
      adam_m(Matrix::Zero(rows, cols)),
      adam_v(Matrix::Zero(rows, cols)) {}

void Parameter::InitNormal(std::mt19937_64& gen, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < value.size(); ++i) value.data()[i] = dist(gen);
}

void Parameter::AppendRows(const Matrix& rows) {
  const Eigen::Index old = value.rows();
  Matrix grown(old + rows.rows(), value.cols());
  grown.topRows(old) = value;
  grown.bottomRows(rows.rows()) = rows;
  value = std::move(grown);
  auto grow_zero = [&](Matrix& m) {
    Matrix g = Matrix::Zero(value.rows(), value.cols());
    g.topRows(old) = m;
    m = std::move(g);
  };
  grow_zero(grad);
  grow_zero(adam_m);
  grow_zero(adam_v);
}

double Gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double GeluDerivative(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) +
         x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Linear::Linear(const std::string& name, int in, int out)
    : weight(name + ".weight", in, out), bias(name + ".bias", 1, out) {}

void Linear::Init(std::mt19937_64& gen, double stddev) {
  weight.InitNormal(gen, stddev);
  bias.value.setZero();
}

Matrix Linear::Forward(const Matrix& x) const {
  Matrix y = x * weight.value;
  y.rowwise() += bias.value.row(0);
  return y;
}

Matrix Linear::Backward(const Matrix& x, const Matrix& dy) {
  weight.grad.noalias() += x.transpose() * dy;
  bias.grad.row(0) += dy.colwise().sum();
  return dy * weight.value.transpose();
}

void Linear::Collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

LayerNorm::LayerNorm(const std::string& name, int dim)
    : gain(name + ".gain", 1, dim), bias(name + ".bias", 1, dim) {
  gain.value.setOnes();
}

Matrix LayerNorm::Forward(const Matrix& x, Cache* cache) const {
  const Eigen::Index n = x.cols();
  Matrix normalized(x.rows(), n);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const RowVector centered = x.row(r).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(n);
    inv_std(r) = 1.0 / std::sqrt(var + epsilon);
    normalized.row(r) = centered * inv_std(r);
  }
  Matrix y = normalized.array().rowwise() * gain.value.row(0).array();
  y.rowwise() += bias.value.row(0);
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix LayerNorm::Backward(const Cache& cache, const Matrix& dy) {
  const Matrix& xhat = cache.normalized;
  gain.grad.row(0) += (dy.array() * xhat.array()).matrix().colwise().sum();
  bias.grad.row(0) += dy.colwise().sum();
  const double n = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const RowVector dxhat = dy.row(r).array() * gain.value.row(0).array();
    const double mean_dxhat = dxhat.sum() / n;
    const double mean_dxhat_xhat = dxhat.dot(xhat.row(r)) / n;
    dx.row(r) = cache.inv_std(r) *
                (dxhat.array() - mean_dxhat - xhat.row(r).array() * mean_dxhat_xhat)
                    .matrix();
  }
  return dx;
}

void LayerNorm::Collect(std::vector<Parameter*>& out) {
  out.push_back(&gain);
  out.push_back(&bias);
}

SelfAttention::SelfAttention(const std::string& name, int dim, int heads)
    : dim_(dim),
      heads_(heads),
      qkv_(name + ".qkv", dim, 3 * dim),
      out_(name + ".out", dim, dim) {}

void SelfAttention::Init(std::mt19937_64& gen, double stddev) {
  qkv_.Init(gen, stddev);
  out_.Init(gen, stddev);
}

Matrix SelfAttention::Forward(const Matrix& x, Cache* cache) const {
  const int head_dim = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Matrix qkv = qkv_.Forward(x);
  Matrix context(x.rows(), dim_);
  std::vector<Matrix> probs(heads_);
  for (int h = 0; h < heads_; ++h) {
    const auto q = qkv.middleCols(h * head_dim, head_dim);
    const auto k = qkv.middleCols(dim_ + h * head_dim, head_dim);
    const auto v = qkv.middleCols(2 * dim_ + h * head_dim, head_dim);
    probs[h].noalias() = q * k.transpose();
    probs[h] *= scale;
    RowSoftmaxInPlace(probs[h]);
    context.middleCols(h * head_dim, head_dim).noalias() = probs[h] * v;
  }
  Matrix y = out_.Forward(context);
  if (cache != nullptr) {
    cache->input = x;
    cache->qkv = std::move(qkv);
    cache->context = std::move(context);
    cache->probs = std::move(probs);
  }
  return y;
}

Matrix SelfAttention::Backward(const Cache& cache, const Matrix& dy) {
  const int head_dim = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const Matrix d_context = out_.Backward(cache.context, dy);
  Matrix d_qkv(cache.qkv.rows(), cache.qkv.cols());
  for (int h = 0; h < heads_; ++h) {
    const auto q = cache.qkv.middleCols(h * head_dim, head_dim);
    const auto k = cache.qkv.middleCols(dim_ + h * head_dim, head_dim);
    const auto v = cache.qkv.middleCols(2 * dim_ + h * head_dim, head_dim);
    const Matrix& p = cache.probs[h];
    const auto d_out = d_context.middleCols(h * head_dim, head_dim);
    const Matrix d_p = d_out * v.transpose();
    d_qkv.middleCols(2 * dim_ + h * head_dim, head_dim).noalias() =
        p.transpose() * d_out;
    const Eigen::VectorXd row_dot = (d_p.array() * p.array()).rowwise().sum();
    Matrix d_s = p.array() * (d_p.colwise() - row_dot).array();
    d_s *= scale;
    d_qkv.middleCols(h * head_dim, head_dim).noalias() = d_s * k;
    d_qkv.middleCols(dim_ + h * head_dim, head_dim).noalias() =
        d_s.transpose() * q;
  }
  return qkv_.Backward(cache.input, d_qkv);
}

void SelfAttention::Collect(std::vector<Parameter*>& out) {
  qkv_.Collect(out);
  out_.Collect(out);
}

EncoderLayer::EncoderLayer(const std::string& name, int dim, int heads,
                           int ff_dim)
    : attention_(name + ".attention", dim, heads),
      norm1_(name + ".norm1", dim),
      ff_in_(name + ".ff_in", dim, ff_dim),
      ff_out_(name + ".ff_out", ff_dim, dim),
      norm2_(name + ".norm2", dim) {}

void EncoderLayer::Init(std::mt19937_64& gen, double stddev) {
  attention_.Init(gen, stddev);
  ff_in_.Init(gen, stddev);
  ff_out_.Init(gen, stddev);
}

Matrix EncoderLayer::Forward(const Matrix& x, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  Matrix hidden1 =
      norm1_.Forward(x + attention_.Forward(x, &c.attention), &c.norm1);
  Matrix ff_pre = ff_in_.Forward(hidden1);
  Matrix ff_act = ff_pre.unaryExpr(&Gelu);
  Matrix y = norm2_.Forward(hidden1 + ff_out_.Forward(ff_act), &c.norm2);
  if (cache != nullptr) {
    c.hidden1 = std::move(hidden1);
    c.ff_pre = std::move(ff_pre);
    c.ff_act = std::move(ff_act);
  }
  return y;
}

Matrix EncoderLayer::Backward(const Cache& cache, const Matrix& dy) {
  const Matrix d_res2 = norm2_.Backward(cache.norm2, dy);
  const Matrix d_act = ff_out_.Backward(cache.ff_act, d_res2);
  const Matrix d_pre =
      d_act.array() * cache.ff_pre.unaryExpr(&GeluDerivative).array();
  const Matrix d_hidden1 = d_res2 + ff_in_.Backward(cache.hidden1, d_pre);
  const Matrix d_res1 = norm1_.Backward(cache.norm1, d_hidden1);
  return d_res1 + attention_.Backward(cache.attention, d_res1);
}

void EncoderLayer::Collect(std::vector<Parameter*>& out) {
  attention_.Collect(out);
  norm1_.Collect(out);
  ff_in_.Collect(out);
  ff_out_.Collect(out);
  norm2_.Collect(out);
}

Encoder::Encoder(const EncoderShape& shape)
    : shape_(shape),
      token_embedding_("encoder.token_embedding", shape.vocab_size, shape.dim),
      position_embedding_("encoder.position_embedding", shape.max_len,
                          shape.dim),
      embedding_norm_("encoder.embedding_norm", shape.dim) {
  for (int l = 0; l < shape.layers; ++l) {
    layers_.emplace_back("encoder.layer" + std::to_string(l), shape.dim,
                         shape.heads, shape.ff_dim);
  }
}

void Encoder::Init(std::mt19937_64& gen, double stddev) {
  token_embedding_.InitNormal(gen, stddev);
  position_embedding_.InitNormal(gen, stddev);
  for (auto& layer : layers_) layer.Init(gen, stddev);
}

Matrix Encoder::Forward(const std::vector<int>& ids, Trace* trace) const {
  const int len = static_cast<int>(ids.size());
  Matrix x(len, shape_.dim);
  for (int i = 0; i < len; ++i) {
    x.row(i) = token_embedding_.value.row(ids[i]) +
               position_embedding_.value.row(i);
  }
  if (trace != nullptr) {
    trace->ids = ids;
    trace->layers.assign(layers_.size(), {});
  }
  x = embedding_norm_.Forward(x,
                              trace != nullptr ? &trace->embedding_norm : nullptr);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    x = layers_[l].Forward(x, trace != nullptr ? &trace->layers[l] : nullptr);
  }
  return x;
}

void Encoder::Backward(const Trace& trace, const Matrix& d_hidden) {
  Matrix d = d_hidden;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    d = layers_[l].Backward(trace.layers[l], d);
  }
  d = embedding_norm_.Backward(trace.embedding_norm, d);
  for (std::size_t i = 0; i < trace.ids.size(); ++i) {
    token_embedding_.grad.row(trace.ids[i]) += d.row(i);
    position_embedding_.grad.row(i) += d.row(i);
  }
}

void Encoder::Collect(std::vector<Parameter*>& out) {
  out.push_back(&token_embedding_);
  out.push_back(&position_embedding_);
  embedding_norm_.Collect(out);
  for (auto& layer : layers_) layer.Collect(out);
}

void Encoder::AppendTokenRows(const Matrix& rows) {
  token_embedding_.AppendRows(rows);
  shape_.vocab_size = static_cast<int>(token_embedding_.value.rows());
}

MlmHead::MlmHead(const std::string& name, int dim, int vocab_size)
    : transform_(name + ".transform", dim, dim),
      norm_(name + ".norm", dim),
      decoder_(name + ".decoder", vocab_size, dim),
      decoder_bias_(name + ".decoder_bias", 1, vocab_size) {}

void MlmHead::Init(std::mt19937_64& gen, double stddev) {
  transform_.Init(gen, stddev);
  decoder_.InitNormal(gen, stddev);
  decoder_bias_.value.setZero();
}

Matrix MlmHead::Forward(const Matrix& hidden, Cache* cache) const {
  Matrix pre = transform_.Forward(hidden);
  Matrix act = pre.unaryExpr(&Gelu);
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  const Matrix t = norm_.Forward(act, &c.norm);
  Matrix logits = t * decoder_.value.transpose();
  logits.rowwise() += decoder_bias_.value.row(0);
  if (cache != nullptr) {
    c.input = hidden;
    c.pre = std::move(pre);
    c.act = std::move(act);
  }
  return logits;
}

Matrix MlmHead::Backward(const Cache& cache, const Matrix& d_logits) {
  // The normalized activations are needed for the decoder gradient.
  Matrix t = cache.norm.normalized.array().rowwise() * norm_.gain.value.row(0).array();
  t.rowwise() += norm_.bias.value.row(0);
  decoder_.grad.noalias() += d_logits.transpose() * t;
  decoder_bias_.grad.row(0) += d_logits.colwise().sum();
  const Matrix d_t = d_logits * decoder_.value;
  const Matrix d_act = norm_.Backward(cache.norm, d_t);
  const Matrix d_pre =
      d_act.array() * cache.pre.unaryExpr(&GeluDerivative).array();
  return transform_.Backward(cache.input, d_pre);
}

void MlmHead::Collect(std::vector<Parameter*>& out) {
  transform_.Collect(out);
  norm_.Collect(out);
  out.push_back(&decoder_);
  out.push_back(&decoder_bias_);
}

void MlmHead::Rename(const std::string& name) {
  std::vector<Parameter*> params;
  Collect(params);
  for (Parameter* p : params) {
    const auto dot = p->name.find('.');
    p->name = name + (dot == std::string::npos ? "" : p->name.substr(dot));
  }
}

void MlmHead::AppendOutputRows(const Matrix& rows, const RowVector& biases) {
  decoder_.AppendRows(rows);
  Matrix bias_rows = decoder_bias_.value;
  Matrix grown(1, bias_rows.cols() + biases.size());
  grown << bias_rows, biases;
  Parameter resized(decoder_bias_.name, 1, static_cast<int>(grown.cols()));
  resized.value = grown;
  resized.trainable = decoder_bias_.trainable;
  decoder_bias_ = std::move(resized);
}

RowVector RestrictedSoftmax(const RowVector& logits,
                            const std::vector<bool>& allowed) {
  const bool all = allowed.empty();
  double max_logit = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (all || allowed[i]) max_logit = std::max(max_logit, logits(i));
  }
  RowVector probs = RowVector::Zero(logits.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (all || allowed[i]) {
      probs(i) = std::exp(logits(i) - max_logit);
      total += probs(i);
    }
  }
  return probs / total;
}

}  // namespace daprompt
