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

#ifndef DAPROMPT_NN_H_
#define DAPROMPT_NN_H_

// Minimal transformer building blocks with explicit forward caches and
// backward passes. Everything is double precision; one sequence at a time
// (rows are positions).

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace daprompt {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

struct Parameter {
  Parameter() = default;
  Parameter(std::string name, int rows, int cols);

  void ZeroGrad() { grad.setZero(); }
  void InitNormal(std::mt19937_64& gen, double stddev);
  // Grows the row count; new rows are zero and their optimizer state reset.
  void AppendRows(const Matrix& rows);
  double SquaredNorm() const { return value.squaredNorm(); }

  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  bool trainable = true;
  // Rows below this index are frozen even when `trainable` is set.
  int first_trainable_row = 0;
};

double Gelu(double x);
double GeluDerivative(double x);

class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out);

  void Init(std::mt19937_64& gen, double stddev);
  Matrix Forward(const Matrix& x) const;
  // Accumulates parameter gradients and returns d(loss)/d(x).
  Matrix Backward(const Matrix& x, const Matrix& dy);
  void Collect(std::vector<Parameter*>& out);

  Parameter weight;  // in x out
  Parameter bias;    // 1 x out
};

class LayerNorm {
 public:
  struct Cache {
    Matrix normalized;
    Eigen::VectorXd inv_std;
  };

  LayerNorm() = default;
  LayerNorm(const std::string& name, int dim);

  Matrix Forward(const Matrix& x, Cache* cache) const;
  Matrix Backward(const Cache& cache, const Matrix& dy);
  void Collect(std::vector<Parameter*>& out);

  Parameter gain;
  Parameter bias;
  double epsilon = 1e-12;
};

class SelfAttention {
 public:
  struct Cache {
    Matrix input;
    Matrix qkv;
    Matrix context;
    std::vector<Matrix> probs;  // one L x L matrix per head
  };

  SelfAttention() = default;
  SelfAttention(const std::string& name, int dim, int heads);

  void Init(std::mt19937_64& gen, double stddev);
  Matrix Forward(const Matrix& x, Cache* cache) const;
  Matrix Backward(const Cache& cache, const Matrix& dy);
  void Collect(std::vector<Parameter*>& out);

 private:
  int dim_ = 0;
  int heads_ = 1;
  Linear qkv_;
  Linear out_;
};

// Post-norm block: LN(x + Attn(x)) then LN(h + FF(h)).
class EncoderLayer {
 public:
  struct Cache {
    SelfAttention::Cache attention;
    LayerNorm::Cache norm1;
    Matrix hidden1;
    Matrix ff_pre;
    Matrix ff_act;
    LayerNorm::Cache norm2;
  };

  EncoderLayer() = default;
  EncoderLayer(const std::string& name, int dim, int heads, int ff_dim);

  void Init(std::mt19937_64& gen, double stddev);
  Matrix Forward(const Matrix& x, Cache* cache) const;
  Matrix Backward(const Cache& cache, const Matrix& dy);
  void Collect(std::vector<Parameter*>& out);

 private:
  SelfAttention attention_;
  LayerNorm norm1_;
  Linear ff_in_;
  Linear ff_out_;
  LayerNorm norm2_;
};

struct EncoderShape {
  int vocab_size = 0;
  int dim = 64;
  int layers = 2;
  int heads = 4;
  int ff_dim = 128;
  int max_len = 96;
};

class Encoder {
 public:
  struct Trace {
    std::vector<int> ids;
    LayerNorm::Cache embedding_norm;
    std::vector<EncoderLayer::Cache> layers;
  };

  Encoder() = default;
  explicit Encoder(const EncoderShape& shape);

  void Init(std::mt19937_64& gen, double stddev);
  // Returns hidden states (len x dim). `trace` may be null for inference.
  Matrix Forward(const std::vector<int>& ids, Trace* trace) const;
  void Backward(const Trace& trace, const Matrix& d_hidden);
  void Collect(std::vector<Parameter*>& out);

  const EncoderShape& shape() const { return shape_; }
  Parameter& token_embedding() { return token_embedding_; }
  const Parameter& token_embedding() const { return token_embedding_; }
  void AppendTokenRows(const Matrix& rows);

 private:
  EncoderShape shape_;
  Parameter token_embedding_;
  Parameter position_embedding_;
  LayerNorm embedding_norm_;
  std::vector<EncoderLayer> layers_;
};

// Masked-language-model head: dense + GELU + LayerNorm, then an (untied)
// output row and bias per vocabulary entry.
class MlmHead {
 public:
  struct Cache {
    Matrix input;
    Matrix pre;
    Matrix act;
    LayerNorm::Cache norm;
  };

  MlmHead() = default;
  MlmHead(const std::string& name, int dim, int vocab_size);

  void Init(std::mt19937_64& gen, double stddev);
  // `hidden` holds one row per scored position; returns rows x vocab logits.
  Matrix Forward(const Matrix& hidden, Cache* cache) const;
  Matrix Backward(const Cache& cache, const Matrix& d_logits);
  void Collect(std::vector<Parameter*>& out);
  // Re-prefixes every parameter name (used when copying a head).
  void Rename(const std::string& name);

  Parameter& decoder() { return decoder_; }
  const Parameter& decoder() const { return decoder_; }
  Parameter& decoder_bias() { return decoder_bias_; }
  const Parameter& decoder_bias() const { return decoder_bias_; }
  void AppendOutputRows(const Matrix& rows, const RowVector& biases);
  int vocab_size() const { return static_cast<int>(decoder_.value.rows()); }

 private:
  Linear transform_;
  LayerNorm norm_;
  Parameter decoder_;       // vocab x dim
  Parameter decoder_bias_;  // 1 x vocab
};

// Softmax over the entries where `allowed` is true; others get exactly 0.
// An empty `allowed` means every entry.
RowVector RestrictedSoftmax(const RowVector& logits,
                            const std::vector<bool>& allowed);

}  // namespace daprompt

#endif  // DAPROMPT_NN_H_
