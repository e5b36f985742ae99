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

#ifndef DAPROMPT_OPTIMIZER_H_
#define DAPROMPT_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "daprompt/nn.h"

namespace daprompt {

// Adam with decoupled weight decay (AdamW). Decay is applied to every
// trainable parameter; rows below `first_trainable_row` are left untouched.
class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
  };

  explicit AdamW(const Options& options) : options_(options) {}

  void Step(const std::vector<Parameter*>& params);

  std::int64_t steps() const { return steps_; }
  void set_steps(std::int64_t steps) { steps_ = steps; }
  const Options& options() const { return options_; }

 private:
  Options options_;
  std::int64_t steps_ = 0;
};

}  // namespace daprompt

#endif  // DAPROMPT_OPTIMIZER_H_
