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

#ifndef DAPROMPT_DECISION_H_
#define DAPROMPT_DECISION_H_

// Rationality evaluation: accept or reject the causal assumption from the
// answer probabilities P1 = P(<E1>) and P2 = P(<E2>).

#include <string>
#include <vector>

#include "daprompt/corpus.h"

namespace daprompt {

enum class Verdict { kAccept, kReject };
enum class RuleMode { kJoint, kIndividual };

struct DecisionRule {
  RuleMode mode = RuleMode::kJoint;
  double rho = 0.6;   // joint: accept iff P1 + P2 >= rho, rho in [0, 2]
  double rho1 = 0.3;  // individual: accept iff P1 >= rho1 and P2 >= rho2
  double rho2 = 0.3;

  static DecisionRule Joint(double rho);
  static DecisionRule Individual(double rho1, double rho2);
};

struct Decision {
  Verdict verdict = Verdict::kReject;
  double p1 = 0.0;
  double p2 = 0.0;
  DecisionRule rule;
};

// Throw ContractViolation for probabilities outside [0, 1] or thresholds
// outside their ranges.
Decision JointDecide(double p1, double p2, double rho);
Decision IndividualDecide(double p1, double p2, double rho1, double rho2);
Decision Decide(double p1, double p2, const DecisionRule& rule);

// How a prediction's probabilities map onto a verdict.
enum class ScoreKind {
  // p1 and p2 from two masks.
  kTwoMask,
  // Only p2 exists; the joint variable is 2 * p2 so rho keeps its [0, 2]
  // scale, and the individual rule tests p2 >= rho2.
  kSingleMask,
  // p1 = P(cause), p2 = P(none); argmax with ties to None, thresholds unused.
  kAnswerWord,
};

struct ScoredPair {
  double p1 = 0.0;
  double p2 = 0.0;
  PairLabel gold = PairLabel::kNone;
  Scope scope = Scope::kIntra;
  ScoreKind kind = ScoreKind::kTwoMask;
};

Verdict Decide(const ScoredPair& scored, const DecisionRule& rule);

// Thresholds from `lo` to `hi` inclusive in `step` increments, rounded to
// suppress floating-point drift.
std::vector<double> ThresholdGrid(double lo = 0.0, double hi = 2.0,
                                  double step = 0.1);
// "lo:hi:step" or a comma-separated list.
std::vector<double> ParseGrid(const std::string& text);

enum class RuleFamily {
  kJoint,
  // Equal individual thresholds rho1 = rho2 = t / 2 for grid value t.
  kIndividualEqual,
};

DecisionRule RuleAt(RuleFamily family, double threshold);

struct SweepPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t accepted = 0;
};

// Metrics at every grid value over predictions in `scope`. The grid must be
// sorted ascending; empty predictions give an empty result.
std::vector<SweepPoint> Sweep(const std::vector<ScoredPair>& predictions,
                              RuleFamily family, const std::vector<double>& grid,
                              ScopeFilter scope = ScopeFilter::kAll);

}  // namespace daprompt

#endif  // DAPROMPT_DECISION_H_
