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

#ifndef DAPROMPT_EVALUATION_H_
#define DAPROMPT_EVALUATION_H_

// Confusion counts, precision/recall/F1 by scope, fold averaging and report
// emission.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "daprompt/corpus.h"
#include "daprompt/decision.h"

namespace daprompt {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  void Add(Verdict verdict, PairLabel gold);
  std::size_t Total() const { return tp + fp + fn + tn; }
  Confusion& operator+=(const Confusion& other);
  bool operator==(const Confusion&) const = default;
};

Confusion operator+(Confusion a, const Confusion& b);

enum class ReportScope { kIntra, kCross, kOverall };
const char* ToString(ReportScope scope);

struct MetricsReport {
  ReportScope scope = ReportScope::kOverall;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_pairs = 0;
  // Empty for rows that cover every fold ("all" in reports).
  std::optional<int> fold_id;
};

// Throws ContractViolation on length mismatch.
Confusion ComputeConfusion(const std::vector<Verdict>& decisions,
                           const std::vector<PairLabel>& golds);

// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R); each 0 when its
// denominator is 0.
MetricsReport Prf1(const Confusion& c, ReportScope scope = ReportScope::kOverall);

struct ScopedConfusion {
  Confusion intra;
  Confusion cross;

  Confusion overall() const { return intra + cross; }
  const Confusion& operator[](Scope s) const {
    return s == Scope::kIntra ? intra : cross;
  }
};

ScopedConfusion ScoreByScope(const std::vector<ScoredPair>& predictions,
                             const DecisionRule& rule);

// Intra, cross and overall rows for one fold. Overall pools intra + cross.
std::vector<MetricsReport> FoldReports(const ScopedConfusion& c,
                                       std::optional<int> fold_id);

// Arithmetic mean of precision, recall and F1 across folds per scope; folds
// with no pairs of a scope are left out of that scope's mean. n_pairs sums.
std::vector<MetricsReport> MacroAverage(
    const std::vector<ScopedConfusion>& folds);
// Pools confusions across folds before computing the metrics.
std::vector<MetricsReport> MicroAverage(
    const std::vector<ScopedConfusion>& folds);

// Rows are ordered by scope (intra, cross, overall) and then fold, with the
// averaged row last. Doubles are printed with six decimals.
std::string ReportCsv(const std::vector<MetricsReport>& reports);
nlohmann::json ReportJson(const std::vector<MetricsReport>& reports);

enum class ReportFormat { kCsv, kJson };
// Throws std::runtime_error naming the path on I/O failure.
void EmitReport(const std::vector<MetricsReport>& reports,
                const std::filesystem::path& path, ReportFormat format);

// threshold,precision,recall,f1,scope
std::string SweepCsv(const std::vector<SweepPoint>& points,
                     ScopeFilter scope);

}  // namespace daprompt

#endif  // DAPROMPT_EVALUATION_H_
