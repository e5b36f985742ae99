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
#include <random>

#include "gtest/gtest.h"
#include "daprompt/errors.h"
#include "test_util.h"

namespace daprompt {
namespace {

Confusion Cells(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Confusion c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  c.tn = tn;
  return c;
}

TEST(ConfusionTest, TrivialCases) {
  const std::vector<Verdict> accept(5, Verdict::kAccept);
  const std::vector<PairLabel> causal(5, PairLabel::kCausal);
  EXPECT_EQ(ComputeConfusion(accept, causal), Cells(5, 0, 0, 0));
  EXPECT_EQ(ComputeConfusion({}, {}), Cells(0, 0, 0, 0));
  EXPECT_THROW(ComputeConfusion(accept, {PairLabel::kNone}), ContractViolation);
}

// Recount oracle: each cell counted by its own predicate.
TEST(ConfusionTest, MatchesIndependentRecount) {
  std::mt19937_64 gen(17);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = gen() % 200;
    std::vector<Verdict> d;
    std::vector<PairLabel> g;
    for (std::size_t i = 0; i < n; ++i) {
      d.push_back(coin(gen) ? Verdict::kAccept : Verdict::kReject);
      g.push_back(coin(gen) ? PairLabel::kCausal : PairLabel::kNone);
    }
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] == Verdict::kAccept && g[i] == PairLabel::kCausal) ++tp;
      if (d[i] == Verdict::kAccept && g[i] == PairLabel::kNone) ++fp;
      if (d[i] == Verdict::kReject && g[i] == PairLabel::kCausal) ++fn;
      if (d[i] == Verdict::kReject && g[i] == PairLabel::kNone) ++tn;
    }
    const Confusion c = ComputeConfusion(d, g);
    ASSERT_EQ(c, Cells(tp, fp, fn, tn));
    ASSERT_EQ(c.Total(), n);
    const MetricsReport r = Prf1(c);
    const double p = tp + fp ? double(tp) / (tp + fp) : 0.0;
    const double rec = tp + fn ? double(tp) / (tp + fn) : 0.0;
    ASSERT_DOUBLE_EQ(r.precision, p);
    ASSERT_DOUBLE_EQ(r.recall, rec);
    ASSERT_DOUBLE_EQ(r.f1, p + rec > 0 ? 2 * p * rec / (p + rec) : 0.0);
  }
}

TEST(Prf1Test, WorkedExampleAndZeroConventions) {
  const MetricsReport r = Prf1(Cells(64, 36, 26, 874));
  EXPECT_DOUBLE_EQ(r.precision, 0.64);
  EXPECT_NEAR(r.recall, 64.0 / 90.0, 1e-12);
  EXPECT_NEAR(r.recall, 0.711, 1e-3);
  EXPECT_NEAR(r.f1, 0.674, 1e-3);
  EXPECT_EQ(r.n_pairs, 1000u);
  const MetricsReport one = Prf1(Cells(1, 0, 0, 0));
  EXPECT_EQ(one.precision, 1.0);
  EXPECT_EQ(one.recall, 1.0);
  EXPECT_EQ(one.f1, 1.0);
  const MetricsReport zero = Prf1(Cells(0, 0, 5, 5));
  EXPECT_EQ(zero.precision, 0.0);
  EXPECT_EQ(zero.recall, 0.0);
  EXPECT_EQ(zero.f1, 0.0);
}

TEST(ScopeTest, OverallIsIntraPlusCross) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredPair> preds;
  for (int i = 0; i < 300; ++i) {
    preds.push_back({u(gen), u(gen), u(gen) < 0.3 ? PairLabel::kCausal : PairLabel::kNone,
                     u(gen) < 0.5 ? Scope::kIntra : Scope::kCross,
                     ScoreKind::kTwoMask});
  }
  const ScopedConfusion c = ScoreByScope(preds, DecisionRule::Joint(0.9));
  const Confusion o = c.overall();
  EXPECT_EQ(o.tp, c.intra.tp + c.cross.tp);
  EXPECT_EQ(o.fp, c.intra.fp + c.cross.fp);
  EXPECT_EQ(o.fn, c.intra.fn + c.cross.fn);
  EXPECT_EQ(o.tn, c.intra.tn + c.cross.tn);
  EXPECT_EQ(o.Total(), preds.size());
}

ScopedConfusion Fold(Confusion intra, Confusion cross) { return {intra, cross}; }

double OverallF1(const std::vector<MetricsReport>& rows) {
  for (const auto& r : rows) {
    if (r.scope == ReportScope::kOverall) return r.f1;
  }
  return -1.0;
}

TEST(AverageTest, IdenticalFoldsAverageToTheCommonValue) {
  const ScopedConfusion f = Fold(Cells(3, 1, 2, 10), Cells(4, 4, 1, 20));
  const auto avg = MacroAverage({f, f, f});
  EXPECT_DOUBLE_EQ(OverallF1(avg), Prf1(f.overall()).f1);
}

TEST(AverageTest, TwoFoldMeanOfF1) {
  // Fold A: F1 1.0. Fold B: P = R = 0.5, so F1 0.5.
  const ScopedConfusion a = Fold(Cells(2, 0, 0, 1), Confusion{});
  const ScopedConfusion b = Fold(Cells(1, 1, 1, 1), Confusion{});
  const auto avg = MacroAverage({a, b});
  EXPECT_DOUBLE_EQ(OverallF1(avg), 0.75);
  // Folds without cross pairs stay out of the cross mean.
  for (const auto& r : avg) {
    if (r.scope == ReportScope::kCross) {
      EXPECT_EQ(r.n_pairs, 0u);
      EXPECT_EQ(r.f1, 0.0);
    }
    if (r.scope == ReportScope::kIntra) EXPECT_EQ(r.n_pairs, 7u);
  }
}

TEST(AverageTest, EmptyScopeFoldIsSkipped) {
  const ScopedConfusion a = Fold(Cells(1, 0, 0, 0), Cells(1, 1, 1, 1));
  const ScopedConfusion b = Fold(Cells(1, 1, 0, 0), Confusion{});
  for (const auto& r : MacroAverage({a, b})) {
    if (r.scope == ReportScope::kCross) EXPECT_DOUBLE_EQ(r.f1, 0.5);
  }
}

TEST(AverageTest, PermutationInvariantAndMicroPools) {
  std::mt19937_64 gen(12);
  std::vector<ScopedConfusion> folds;
  for (int i = 0; i < 5; ++i) {
    folds.push_back(Fold(Cells(gen() % 9, gen() % 9, gen() % 9, gen() % 50),
                         Cells(gen() % 9, gen() % 9, gen() % 9, gen() % 50)));
  }
  const auto base = MacroAverage(folds);
  std::reverse(folds.begin(), folds.end());
  const auto reversed = MacroAverage(folds);
  for (std::size_t k = 0; k < base.size(); ++k) {
    EXPECT_NEAR(base[k].f1, reversed[k].f1, 1e-15);
    EXPECT_NEAR(base[k].precision, reversed[k].precision, 1e-15);
  }
  Confusion pooled;
  for (const auto& f : folds) pooled += f.overall();
  EXPECT_DOUBLE_EQ(OverallF1(MicroAverage(folds)), Prf1(pooled).f1);
}

TEST(ReportTest, HeaderOnlyForEmptyResults) {
  EXPECT_EQ(ReportCsv({}), "scope,fold,precision,recall,f1,n_pairs\n");
}

TEST(ReportTest, OrderedByScopeThenFold) {
  const ScopedConfusion a = Fold(Cells(1, 0, 0, 0), Cells(0, 1, 1, 0));
  std::vector<MetricsReport> rows = FoldReports(a, 1);
  for (const auto& r : FoldReports(a, 0)) rows.push_back(r);
  for (const auto& r : MacroAverage({a, a})) rows.push_back(r);
  const std::string csv = ReportCsv(rows);
  EXPECT_EQ(csv,
            "scope,fold,precision,recall,f1,n_pairs\n"
            "intra,0,1.000000,1.000000,1.000000,1\n"
            "intra,1,1.000000,1.000000,1.000000,1\n"
            "intra,all,1.000000,1.000000,1.000000,2\n"
            "cross,0,0.000000,0.000000,0.000000,2\n"
            "cross,1,0.000000,0.000000,0.000000,2\n"
            "cross,all,0.000000,0.000000,0.000000,4\n"
            "overall,0,0.500000,0.500000,0.500000,3\n"
            "overall,1,0.500000,0.500000,0.500000,3\n"
            "overall,all,0.500000,0.500000,0.500000,6\n");
  const auto j = ReportJson(rows);
  ASSERT_EQ(j.size(), 9u);
  EXPECT_EQ(j[2]["fold"], "all");
}

TEST(ReportTest, EmitIsByteStableAndNamesPathOnFailure) {
  const auto dir = testing_util::TempDir("report");
  const auto rows = FoldReports(Fold(Cells(3, 1, 2, 4), Cells(1, 0, 1, 9)), 0);
  for (ReportFormat format : {ReportFormat::kCsv, ReportFormat::kJson}) {
    EmitReport(rows, dir / "a", format);
    EmitReport(rows, dir / "b", format);
    std::ifstream a(dir / "a"), b(dir / "b");
    const std::string sa((std::istreambuf_iterator<char>(a)), {});
    const std::string sb((std::istreambuf_iterator<char>(b)), {});
    EXPECT_FALSE(sa.empty());
    EXPECT_EQ(sa, sb);
  }
  try {
    EmitReport(rows, dir / "missing" / "x.csv", ReportFormat::kCsv);
    FAIL() << "expected an I/O error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST(ReportTest, SweepCsvColumns) {
  const std::string csv = SweepCsv({{0.6, 0.5, 0.25, 1.0 / 3.0, 4}}, ScopeFilter::kAll);
  EXPECT_EQ(csv,
            "threshold,precision,recall,f1,scope\n"
            "0.60,0.500000,0.250000,0.333333,overall\n");
}

}  // namespace
}  // namespace daprompt
