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

#include "daprompt/experiment.h"

#include <algorithm>

#include <fmt/format.h>

#include "daprompt/errors.h"

namespace daprompt {

std::vector<MetricsReport> CrossValidationResult::Averaged() const {
  std::vector<MetricsReport> out;
  for (const auto& r : reports) {
    if (!r.fold_id) out.push_back(r);
  }
  return out;
}

MetricsReport CrossValidationResult::Averaged(ReportScope scope) const {
  for (const auto& r : reports) {
    if (!r.fold_id && r.scope == scope) return r;
  }
  MetricsReport empty;
  empty.scope = scope;
  return empty;
}

CrossValidationResult CrossValidate(const Corpus& corpus, const FoldPlan& plan,
                                    const TrainingConfig& config,
                                    const Backbone& backbone,
                                    const CrossValidationOptions& options) {
  config.Validate();
  if (plan.folds.empty()) throw ConfigError("fold plan has no folds");
  const std::vector<EventPair> dev =
      plan.dev_units.empty() ? std::vector<EventPair>{}
                             : EnumeratePairs(corpus, plan.dev_units, plan.unit);
  CrossValidationResult result;
  std::vector<ScopedConfusion> confusions;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const int fold_id = static_cast<int>(f);
    if (!options.only_folds.empty() &&
        std::find(options.only_folds.begin(), options.only_folds.end(),
                  fold_id) == options.only_folds.end()) {
      continue;
    }
    const Fold& fold = plan.folds[f];
    TrainData data;
    data.corpus = &corpus;
    data.train = EnumeratePairs(corpus, fold.train_units, plan.unit);
    if (config.select_rho) data.dev = dev;

    DaPromptModel model = DaPromptModel::Create(backbone, config.variant, config.seed);
    FoldOutcome outcome;
    outcome.fold_id = fold_id;
    outcome.state = Train(model, data, config).state;
    outcome.rho = data.dev.empty() ? config.rho : outcome.state.rho;

    const std::vector<EventPair> test = FilterScope(
        EnumeratePairs(corpus, fold.test_units, plan.unit), config.scope);
    outcome.confusion = ScoreByScope(PredictPairs(model, corpus, test),
                                     DecisionRule::Joint(outcome.rho));
    const MetricsReport overall = Prf1(outcome.confusion.overall());
    if (options.progress) {
      options.progress(fmt::format(
          "fold {}: epochs {} rho {:.2f} overall P {:.4f} R {:.4f} F1 {:.4f}",
          fold_id, outcome.state.epoch, outcome.rho, overall.precision,
          overall.recall, overall.f1));
    }
    for (const auto& r : FoldReports(outcome.confusion, fold_id)) {
      result.reports.push_back(r);
    }
    confusions.push_back(outcome.confusion);
    result.folds.push_back(std::move(outcome));
  }
  for (const auto& r : config.micro_average ? MicroAverage(confusions)
                                            : MacroAverage(confusions)) {
    result.reports.push_back(r);
  }
  return result;
}

std::vector<MetricsReport> FilterReports(const std::vector<MetricsReport>& rows,
                                         ScopeFilter scope) {
  if (scope == ScopeFilter::kAll) return rows;
  const ReportScope keep =
      scope == ScopeFilter::kIntra ? ReportScope::kIntra : ReportScope::kCross;
  std::vector<MetricsReport> out;
  for (const auto& r : rows) {
    if (r.scope == keep) out.push_back(r);
  }
  return out;
}

std::vector<VariantConfig> DefaultAblationVariants() {
  std::vector<VariantConfig> out;
  for (const char* name : {"full", "sim", "shm", "et", "prompt"}) {
    out.push_back(VariantConfig::FromName(name));
  }
  return out;
}

std::vector<AblationRow> RunAblation(const Corpus& corpus, const FoldPlan& plan,
                                     const TrainingConfig& base,
                                     const Backbone& backbone,
                                     const std::vector<VariantConfig>& variants,
                                     const CrossValidationOptions& options) {
  std::vector<AblationRow> rows;
  for (const VariantConfig& v : variants) {
    TrainingConfig config = base;
    config.variant = v;
    CrossValidationOptions opts = options;
    if (options.progress) {
      opts.progress = [&](const std::string& msg) {
        options.progress(v.Name() + " " + msg);
      };
    }
    const CrossValidationResult cv =
        CrossValidate(corpus, plan, config, backbone, opts);
    rows.push_back({v.Name(), v, cv.Averaged()});
  }
  return rows;
}

std::string AblationCsv(const std::vector<AblationRow>& rows) {
  std::string out = "variant,scope,precision,recall,f1,n_pairs\n";
  for (const auto& row : rows) {
    for (const auto& r : row.reports) {
      out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{}\n", row.variant,
                         ToString(r.scope), r.precision, r.recall, r.f1,
                         r.n_pairs);
    }
  }
  return out;
}

}  // namespace daprompt
