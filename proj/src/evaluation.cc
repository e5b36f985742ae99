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

#include "daprompt/evaluation.h"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "daprompt/errors.h"

namespace daprompt {

namespace {

int ScopeRank(ReportScope s) { return static_cast<int>(s); }

std::string FoldLabel(const MetricsReport& r) {
  return r.fold_id ? std::to_string(*r.fold_id) : "all";
}

std::vector<ScopedConfusion>::size_type CountNonEmpty(
    const std::vector<ScopedConfusion>& folds, ReportScope scope) {
  return std::count_if(folds.begin(), folds.end(), [&](const auto& f) {
    switch (scope) {
      case ReportScope::kIntra:
        return f.intra.Total() > 0;
      case ReportScope::kCross:
        return f.cross.Total() > 0;
      case ReportScope::kOverall:
        return f.overall().Total() > 0;
    }
    return false;
  });
}

Confusion Select(const ScopedConfusion& c, ReportScope scope) {
  switch (scope) {
    case ReportScope::kIntra:
      return c.intra;
    case ReportScope::kCross:
      return c.cross;
    case ReportScope::kOverall:
      return c.overall();
  }
  return {};
}

constexpr ReportScope kScopes[] = {ReportScope::kIntra, ReportScope::kCross,
                                   ReportScope::kOverall};

}  // namespace

void Confusion::Add(Verdict verdict, PairLabel gold) {
  const bool accept = verdict == Verdict::kAccept;
  const bool causal = gold == PairLabel::kCausal;
  if (accept && causal) {
    ++tp;
  } else if (accept) {
    ++fp;
  } else if (causal) {
    ++fn;
  } else {
    ++tn;
  }
}

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

Confusion operator+(Confusion a, const Confusion& b) { return a += b; }

const char* ToString(ReportScope scope) {
  switch (scope) {
    case ReportScope::kIntra:
      return "intra";
    case ReportScope::kCross:
      return "cross";
    case ReportScope::kOverall:
      return "overall";
  }
  return "overall";
}

Confusion ComputeConfusion(const std::vector<Verdict>& decisions,
                           const std::vector<PairLabel>& golds) {
  if (decisions.size() != golds.size()) {
    throw ContractViolation("decisions and gold labels differ in length");
  }
  Confusion c;
  for (std::size_t i = 0; i < decisions.size(); ++i) c.Add(decisions[i], golds[i]);
  return c;
}

MetricsReport Prf1(const Confusion& c, ReportScope scope) {
  MetricsReport r;
  r.scope = scope;
  r.n_pairs = c.Total();
  r.precision = c.tp + c.fp == 0 ? 0.0 : double(c.tp) / double(c.tp + c.fp);
  r.recall = c.tp + c.fn == 0 ? 0.0 : double(c.tp) / double(c.tp + c.fn);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

ScopedConfusion ScoreByScope(const std::vector<ScoredPair>& predictions,
                             const DecisionRule& rule) {
  ScopedConfusion c;
  for (const auto& s : predictions) {
    (s.scope == Scope::kIntra ? c.intra : c.cross).Add(Decide(s, rule), s.gold);
  }
  return c;
}

std::vector<MetricsReport> FoldReports(const ScopedConfusion& c,
                                       std::optional<int> fold_id) {
  std::vector<MetricsReport> out;
  for (ReportScope scope : kScopes) {
    MetricsReport r = Prf1(Select(c, scope), scope);
    r.fold_id = fold_id;
    out.push_back(r);
  }
  return out;
}

std::vector<MetricsReport> MacroAverage(const std::vector<ScopedConfusion>& folds) {
  std::vector<MetricsReport> out;
  for (ReportScope scope : kScopes) {
    MetricsReport avg;
    avg.scope = scope;
    const auto used = CountNonEmpty(folds, scope);
    for (const auto& f : folds) {
      const Confusion c = Select(f, scope);
      avg.n_pairs += c.Total();
      if (c.Total() == 0) continue;
      const MetricsReport r = Prf1(c, scope);
      avg.precision += r.precision;
      avg.recall += r.recall;
      avg.f1 += r.f1;
    }
    if (used > 0) {
      avg.precision /= static_cast<double>(used);
      avg.recall /= static_cast<double>(used);
      avg.f1 /= static_cast<double>(used);
    }
    out.push_back(avg);
  }
  return out;
}

std::vector<MetricsReport> MicroAverage(const std::vector<ScopedConfusion>& folds) {
  ScopedConfusion pooled;
  for (const auto& f : folds) {
    pooled.intra += f.intra;
    pooled.cross += f.cross;
  }
  return FoldReports(pooled, std::nullopt);
}

namespace {

std::vector<MetricsReport> Ordered(std::vector<MetricsReport> reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const MetricsReport& a, const MetricsReport& b) {
                     if (a.scope != b.scope) {
                       return ScopeRank(a.scope) < ScopeRank(b.scope);
                     }
                     // Per-fold rows first, the averaged row last.
                     const int fa = a.fold_id.value_or(1 << 30);
                     const int fb = b.fold_id.value_or(1 << 30);
                     return fa < fb;
                   });
  return reports;
}

}  // namespace

std::string ReportCsv(const std::vector<MetricsReport>& reports) {
  std::string out = "scope,fold,precision,recall,f1,n_pairs\n";
  for (const auto& r : Ordered(reports)) {
    out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{}\n", ToString(r.scope),
                       FoldLabel(r), r.precision, r.recall, r.f1, r.n_pairs);
  }
  return out;
}

nlohmann::json ReportJson(const std::vector<MetricsReport>& reports) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : Ordered(reports)) {
    rows.push_back({{"scope", ToString(r.scope)},
                    {"fold", FoldLabel(r)},
                    {"precision", std::stod(fmt::format("{:.6f}", r.precision))},
                    {"recall", std::stod(fmt::format("{:.6f}", r.recall))},
                    {"f1", std::stod(fmt::format("{:.6f}", r.f1))},
                    {"n_pairs", r.n_pairs}});
  }
  return rows;
}

void EmitReport(const std::vector<MetricsReport>& reports,
                const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open report file " + path.string());
  if (format == ReportFormat::kCsv) {
    out << ReportCsv(reports);
  } else {
    out << ReportJson(reports).dump(2) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing report file " + path.string());
}

std::string SweepCsv(const std::vector<SweepPoint>& points, ScopeFilter scope) {
  const char* label = scope == ScopeFilter::kAll ? "overall" : ToString(scope);
  std::string out = "threshold,precision,recall,f1,scope\n";
  for (const auto& p : points) {
    out += fmt::format("{:.2f},{:.6f},{:.6f},{:.6f},{}\n", p.threshold,
                       p.precision, p.recall, p.f1, label);
  }
  return out;
}

}  // namespace daprompt
