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

#ifndef DAPROMPT_TRAINING_H_
#define DAPROMPT_TRAINING_H_

// Fine-tuning of the encoder and both heads: cross-entropy on the answer of
// each mask with <E1>/<E2> as positive and <None> as negative labels, AdamW
// with decoupled weight decay, seeded mini-batch shuffling and dev-F1 early
// stopping.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "daprompt/corpus.h"
#include "daprompt/decision.h"
#include "daprompt/model.h"

namespace daprompt {

struct TrainingConfig {
  std::string backbone_name;
  double learning_rate = 1e-5;
  int batch_size = 16;
  double weight_decay = 0.01;
  int epochs = 10;
  // Epochs without dev improvement before stopping.
  int patience = 3;
  std::uint64_t seed = 42;
  double neg_sample_p = 0.2;
  // Draw a fresh negative sample every epoch instead of once.
  bool resample_negatives = false;
  double rho = 0.6;
  // Pick rho on the dev set from `grid` instead of using `rho`.
  bool select_rho = true;
  std::string grid = "0:2:0.1";
  VariantConfig variant;
  bool freeze_backbone = false;
  ScopeFilter scope = ScopeFilter::kAll;
  // MLM pre-training of a freshly built preset backbone.
  int pretrain_steps = 0;
  double pretrain_learning_rate = 1e-3;
  // Experiment plumbing used by the command line.
  std::string corpus;
  std::string fold_scheme = "esc";  // esc, ctb or none
  int fold = 0;
  bool micro_average = false;

  // Throws ConfigError naming the offending field.
  void Validate() const;
};

nlohmann::json ConfigToJson(const TrainingConfig& config);
// Unknown keys are rejected. Throws ConfigError.
TrainingConfig ConfigFromJson(const nlohmann::json& j);

struct TrainState {
  std::int64_t step = 0;
  // Completed epochs.
  int epoch = 0;
  std::vector<double> loss_history;
  std::int64_t optimizer_steps = 0;
  double best_dev_f1 = -1.0;
  int best_epoch = 0;
  int epochs_without_improvement = 0;
  double rho = 0.6;
  bool stopped_early = false;
};

nlohmann::json StateToJson(const TrainState& state);
TrainState StateFromJson(const nlohmann::json& j);

// Answer symbols of a pair under a variant, one per mask slot.
std::vector<Answer> LabelOf(PairLabel label, const VariantConfig& variant);

struct LossBreakdown {
  double ce1 = 0.0;
  double ce2 = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double total = 0.0;
};

// Batch-mean cross-entropy of each head plus lambda * squared norm of the
// parameters the head's term regularizes: the encoder and head 1 for L1,
// head 2 for L2 (nothing when it aliases head 1). When `accumulate` is set
// the cross-entropy gradients are added to the parameters.
LossBreakdown ComputeLoss(DaPromptModel& model,
                          const std::vector<const PromptInstance*>& batch,
                          double lambda, bool accumulate);

struct TrainHooks {
  // After each optimizer step.
  std::function<void(const TrainState&, const LossBreakdown&)> on_step;
  // After each epoch; `improved` is set when dev F1 reached a new best.
  std::function<void(const TrainState&, DaPromptModel&, bool improved)>
      on_epoch_end;
};

struct TrainData {
  const Corpus* corpus = nullptr;
  std::vector<EventPair> train;
  // Optional; enables early stopping and rho selection.
  std::vector<EventPair> dev;
};

struct TrainResult {
  TrainState state;
  std::size_t skipped_instances = 0;
};

// Trains in place. On return the model holds the best dev-epoch weights (or
// the last epoch's without a dev set). `resume` continues a previous run
// whose optimizer moments are already loaded into the model; `best` carries
// that run's best weights. Throws DivergenceError on a non-finite loss and
// ContractViolation when no training instance remains.
TrainResult Train(DaPromptModel& model, const TrainData& data,
                  const TrainingConfig& config, const TrainHooks& hooks = {},
                  const TrainState* resume = nullptr,
                  const ParameterSnapshot* best = nullptr);

// Scores pairs with the model. Pairs whose instance cannot be built are
// scored as rejected.
std::vector<ScoredPair> PredictPairs(const DaPromptModel& model,
                                     const Corpus& corpus,
                                     const std::vector<EventPair>& pairs);

// Grid value with the highest overall F1; ties go to the smallest value.
// Throws ContractViolation on empty predictions or grid.
double SelectThreshold(const std::vector<ScoredPair>& dev,
                       const std::vector<double>& grid);

}  // namespace daprompt

#endif  // DAPROMPT_TRAINING_H_
