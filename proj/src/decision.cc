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

#include "daprompt/decision.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "daprompt/errors.h"
#include "daprompt/evaluation.h"

namespace daprompt {

namespace {

void CheckProbability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ContractViolation(std::string(name) + " must lie in [0, 1], got " +
                            std::to_string(p));
  }
}

void CheckRule(const DecisionRule& rule) {
  if (rule.mode == RuleMode::kJoint) {
    if (!(rule.rho >= 0.0 && rule.rho <= 2.0)) {
      throw ContractViolation("rho must lie in [0, 2], got " +
                              std::to_string(rule.rho));
    }
  } else {
    CheckProbability(rule.rho1, "rho1");
    CheckProbability(rule.rho2, "rho2");
  }
}

}  // namespace

DecisionRule DecisionRule::Joint(double rho) {
  DecisionRule r;
  r.mode = RuleMode::kJoint;
  r.rho = rho;
  return r;
}

DecisionRule DecisionRule::Individual(double rho1, double rho2) {
  DecisionRule r;
  r.mode = RuleMode::kIndividual;
  r.rho1 = rho1;
  r.rho2 = rho2;
  return r;
}

Decision Decide(double p1, double p2, const DecisionRule& rule) {
  CheckProbability(p1, "p1");
  CheckProbability(p2, "p2");
  CheckRule(rule);
  const bool accept = rule.mode == RuleMode::kJoint
                          ? p1 + p2 >= rule.rho
                          : p1 >= rule.rho1 && p2 >= rule.rho2;
  return {accept ? Verdict::kAccept : Verdict::kReject, p1, p2, rule};
}

Decision JointDecide(double p1, double p2, double rho) {
  return Decide(p1, p2, DecisionRule::Joint(rho));
}

Decision IndividualDecide(double p1, double p2, double rho1, double rho2) {
  return Decide(p1, p2, DecisionRule::Individual(rho1, rho2));
}

Verdict Decide(const ScoredPair& s, const DecisionRule& rule) {
  switch (s.kind) {
    case ScoreKind::kTwoMask:
      return Decide(s.p1, s.p2, rule).verdict;
    case ScoreKind::kSingleMask: {
      CheckProbability(s.p2, "p2");
      CheckRule(rule);
      const bool accept = rule.mode == RuleMode::kJoint ? 2.0 * s.p2 >= rule.rho
                                                        : s.p2 >= rule.rho2;
      return accept ? Verdict::kAccept : Verdict::kReject;
    }
    case ScoreKind::kAnswerWord:
      return s.p1 > s.p2 ? Verdict::kAccept : Verdict::kReject;
  }
  return Verdict::kReject;
}

std::vector<double> ThresholdGrid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) {
    throw ContractViolation("invalid threshold grid");
  }
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    grid.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  }
  return grid;
}

std::vector<double> ParseGrid(const std::string& text) {
  try {
    if (text.find(':') != std::string::npos) {
      std::stringstream ss(text);
      std::string lo, hi, step;
      std::getline(ss, lo, ':');
      std::getline(ss, hi, ':');
      std::getline(ss, step, ':');
      return ThresholdGrid(std::stod(lo), std::stod(hi), std::stod(step));
    }
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
    if (!std::is_sorted(grid.begin(), grid.end())) {
      throw ContractViolation("threshold grid must be sorted ascending");
    }
    return grid;
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ContractViolation*>(&e)) throw;
    throw ContractViolation("cannot parse threshold grid '" + text + "'");
  }
}

DecisionRule RuleAt(RuleFamily family, double threshold) {
  return family == RuleFamily::kJoint
             ? DecisionRule::Joint(threshold)
             : DecisionRule::Individual(threshold / 2.0, threshold / 2.0);
}

std::vector<SweepPoint> Sweep(const std::vector<ScoredPair>& predictions,
                              RuleFamily family, const std::vector<double>& grid,
                              ScopeFilter scope) {
  std::vector<SweepPoint> out;
  if (predictions.empty()) return out;
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw ContractViolation("threshold grid must be sorted ascending");
  }
  for (double t : grid) {
    const DecisionRule rule = RuleAt(family, t);
    Confusion c;
    for (const auto& s : predictions) {
      if (scope == ScopeFilter::kIntra && s.scope != Scope::kIntra) continue;
      if (scope == ScopeFilter::kCross && s.scope != Scope::kCross) continue;
      c.Add(Decide(s, rule), s.gold);
    }
    const MetricsReport m = Prf1(c);
    out.push_back({t, m.precision, m.recall, m.f1, c.tp + c.fp});
  }
  return out;
}

}  // namespace daprompt
