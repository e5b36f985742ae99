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

#ifndef DAPROMPT_EXPERIMENT_H_
#define DAPROMPT_EXPERIMENT_H_

// K-fold experiments and the ablation matrix.

#include <functional>
#include <string>
#include <vector>

#include "daprompt/backbone.h"
#include "daprompt/corpus.h"
#include "daprompt/evaluation.h"
#include "daprompt/training.h"

namespace daprompt {

struct FoldOutcome {
  int fold_id = 0;
  ScopedConfusion confusion;
  double rho = 0.0;
  TrainState state;
};

struct CrossValidationResult {
  std::vector<FoldOutcome> folds;
  // Per-fold rows followed by the averaged rows.
  std::vector<MetricsReport> reports;

  std::vector<MetricsReport> Averaged() const;
  // Averaged row of one scope.
  MetricsReport Averaged(ReportScope scope) const;
};

struct CrossValidationOptions {
  // Folds to run; empty runs all of them.
  std::vector<int> only_folds;
  std::function<void(const std::string&)> progress;
};

// Trains a fresh model per fold from a copy of `backbone`, picks rho on the
// dev units when the plan has them and `config.select_rho` is set (otherwise
// uses config.rho), scores the fold's unsampled test pairs and averages the
// per-fold metrics (macro by default, pooled with config.micro_average).
CrossValidationResult CrossValidate(const Corpus& corpus, const FoldPlan& plan,
                                    const TrainingConfig& config,
                                    const Backbone& backbone,
                                    const CrossValidationOptions& options = {});

// Rows restricted to a scope filter: intra or cross keep that scope only;
// all keeps every row.
std::vector<MetricsReport> FilterReports(const std::vector<MetricsReport>& rows,
                                         ScopeFilter scope);

struct AblationRow {
  std::string variant;
  VariantConfig config;
  std::vector<MetricsReport> reports;  // averaged intra, cross, overall
};

std::vector<VariantConfig> DefaultAblationVariants();

// Runs every variant on the same plan, seed and backbone.
std::vector<AblationRow> RunAblation(const Corpus& corpus, const FoldPlan& plan,
                                     const TrainingConfig& base,
                                     const Backbone& backbone,
                                     const std::vector<VariantConfig>& variants,
                                     const CrossValidationOptions& options = {});

// variant,scope,precision,recall,f1,n_pairs
std::string AblationCsv(const std::vector<AblationRow>& rows);

}  // namespace daprompt

#endif  // DAPROMPT_EXPERIMENT_H_
