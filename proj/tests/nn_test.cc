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
#include <random>

#include "gtest/gtest.h"
#include "daprompt/optimizer.h"

namespace daprompt {
namespace {

double RelativeError(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / scale;
}

TEST(NnTest, GeluMatchesErfFormAndDerivative) {
  for (double x : {-3.0, -1.0, -0.1, 0.0, 0.5, 2.0}) {
    EXPECT_NEAR(Gelu(x), 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))), 1e-15);
    const double h = 1e-6;
    const double numeric = (Gelu(x + h) - Gelu(x - h)) / (2 * h);
    EXPECT_NEAR(GeluDerivative(x), numeric, 1e-8);
  }
}

TEST(NnTest, RestrictedSoftmaxZerosOutsideTheSet) {
  RowVector logits(5);
  logits << 1.0, 2.0, 3.0, 4.0, 1000.0;
  const std::vector<bool> allowed = {true, false, true, false, false};
  const RowVector p = RestrictedSoftmax(logits, allowed);
  EXPECT_EQ(p(1), 0.0);
  EXPECT_EQ(p(3), 0.0);
  EXPECT_EQ(p(4), 0.0);
  const double e0 = std::exp(1.0), e2 = std::exp(3.0);
  EXPECT_NEAR(p(0), e0 / (e0 + e2), 1e-15);
  EXPECT_NEAR(p(2), e2 / (e0 + e2), 1e-15);
  EXPECT_NEAR(RestrictedSoftmax(logits, {}).sum(), 1.0, 1e-12);
}

TEST(NnTest, EncoderAndHeadGradientsMatchFiniteDifferences) {
  EncoderShape shape;
  shape.vocab_size = 11;
  shape.dim = 8;
  shape.layers = 2;
  shape.heads = 2;
  shape.ff_dim = 12;
  shape.max_len = 16;
  std::mt19937_64 gen(3);
  Encoder encoder(shape);
  encoder.Init(gen, 0.3);
  MlmHead head("h", shape.dim, shape.vocab_size);
  head.Init(gen, 0.3);
  const std::vector<int> ids = {2, 5, 7, 4, 9, 3};
  Matrix weights = Matrix::Random(1, shape.vocab_size);

  auto loss = [&]() {
    const Matrix hidden = encoder.Forward(ids, nullptr);
    return (head.Forward(hidden.row(3), nullptr).array() * weights.array()).sum();
  };
  std::vector<Parameter*> params;
  encoder.Collect(params);
  head.Collect(params);
  for (Parameter* p : params) p->ZeroGrad();
  Encoder::Trace trace;
  const Matrix hidden = encoder.Forward(ids, &trace);
  MlmHead::Cache cache;
  head.Forward(hidden.row(3), &cache);
  Matrix d_hidden = Matrix::Zero(hidden.rows(), hidden.cols());
  d_hidden.row(3) = head.Backward(cache, weights).row(0);
  encoder.Backward(trace, d_hidden);

  int checked = 0;
  for (Parameter* p : params) {
    for (Eigen::Index k = 0; k < p->value.size(); k += 7) {
      double& v = p->value.data()[k];
      const double saved = v;
      const double h = 1e-5;
      v = saved + h;
      const double up = loss();
      v = saved - h;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p->grad.data()[k];
      if (std::abs(numeric) < 1e-9 && std::abs(analytic) < 1e-9) continue;
      EXPECT_LT(RelativeError(analytic, numeric), 1e-4)
          << p->name << "[" << k << "] analytic " << analytic << " numeric "
          << numeric;
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

// Single AdamW step against the closed form of the first update.
TEST(OptimizerTest, FirstStepMatchesClosedForm) {
  Parameter p("p", 1, 3);
  p.value << 1.0, -2.0, 0.5;
  p.grad << 0.1, -0.3, 0.0;
  AdamW::Options o;
  o.learning_rate = 0.01;
  o.weight_decay = 0.1;
  AdamW adam(o);
  const Matrix before = p.value;
  adam.Step({&p});
  for (int i = 0; i < 3; ++i) {
    const double g = before(0, i) == 0.5 ? 0.0 : (i == 0 ? 0.1 : -0.3);
    const double decayed = before(0, i) * (1.0 - 0.01 * 0.1);
    // m_hat = g, v_hat = g^2 after one step.
    const double update = g == 0.0 ? 0.0 : 0.01 * g / (std::abs(g) + 1e-8);
    EXPECT_NEAR(p.value(0, i), decayed - update, 1e-12);
  }
  EXPECT_EQ(adam.steps(), 1);
}

TEST(OptimizerTest, FrozenRowsStayPut) {
  Parameter p("p", 3, 2);
  p.value.setConstant(1.0);
  p.grad.setConstant(1.0);
  p.first_trainable_row = 2;
  AdamW adam(AdamW::Options{});
  adam.Step({&p});
  EXPECT_EQ(p.value(0, 0), 1.0);
  EXPECT_EQ(p.value(1, 1), 1.0);
  EXPECT_NE(p.value(2, 0), 1.0);
  p.trainable = false;
  const Matrix before = p.value;
  adam.Step({&p});
  EXPECT_EQ(p.value, before);
}

}  // namespace
}  // namespace daprompt
