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

#include "daprompt/optimizer.h"

#include <cmath>

namespace daprompt {

void AdamW::Step(const std::vector<Parameter*>& params) {
  ++steps_;
  const double lr = options_.learning_rate;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    const Eigen::Index first = p->first_trainable_row;
    const Eigen::Index rows = p->value.rows() - first;
    if (rows <= 0) continue;
    auto value = p->value.bottomRows(rows).array();
    auto grad = p->grad.bottomRows(rows).array();
    auto m = p->adam_m.bottomRows(rows).array();
    auto v = p->adam_v.bottomRows(rows).array();
    value *= 1.0 - lr * options_.weight_decay;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.square();
    value -= lr * (m / correction1) /
             ((v / correction2).sqrt() + options_.epsilon);
  }
}

}  // namespace daprompt
