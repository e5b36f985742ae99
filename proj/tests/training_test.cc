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

#include "daprompt/training.h"

#include <cmath>
#include <limits>
#include <random>

#include "gtest/gtest.h"
#include "daprompt/errors.h"
#include "daprompt/evaluation.h"
#include "daprompt/optimizer.h"
#include "test_util.h"

namespace daprompt {
namespace {

using testing_util::MicroBackbone;
using testing_util::SmallSynthetic;

TrainingConfig FastConfig(const std::string& variant = "full") {
  TrainingConfig c;
  c.backbone_name = "mlm-d16-l1-h2-f32-n64";
  c.learning_rate = 3e-3;
  c.batch_size = 8;
  c.epochs = 2;
  c.neg_sample_p = 0.3;
  c.variant = VariantConfig::FromName(variant);
  c.fold_scheme = "none";
  return c;
}

struct Bench {
  Corpus corpus = SmallSynthetic();
  std::vector<EventPair> pairs = EnumeratePairs(corpus);

  DaPromptModel Model(const std::string& variant = "full") const {
    return DaPromptModel::Create(MicroBackbone(corpus), VariantConfig::FromName(variant), 9);
  }
  PromptInstance First(const DaPromptModel& m, PairLabel label) const {
    for (const auto& p : pairs) {
      if (p.label == label) return m.BuildInstance(*corpus.FindDocument(p.doc_id), p);
    }
    throw std::logic_error("no pair with that label");
  }
};

TEST(LabelTest, AnswersPerVariant) {
  using A = std::vector<Answer>;
  const VariantConfig full;
  EXPECT_EQ(LabelOf(PairLabel::kCausal, full), (A{Answer::kE1, Answer::kE2}));
  EXPECT_EQ(LabelOf(PairLabel::kNone, full), (A{Answer::kNone, Answer::kNone}));
  EXPECT_EQ(LabelOf(PairLabel::kCausal, VariantConfig::FromName("sim")),
            (A{Answer::kE2}));
  EXPECT_EQ(LabelOf(PairLabel::kNone, VariantConfig::FromName("sim")),
            (A{Answer::kNone}));
  EXPECT_EQ(LabelOf(PairLabel::kCausal, VariantConfig::FromName("shm")),
            (A{Answer::kE1, Answer::kE2}));
  EXPECT_EQ(LabelOf(PairLabel::kCausal, VariantConfig::FromName("et")),
            (A{Answer::kEventSurface, Answer::kEventSurface}));
  EXPECT_EQ(LabelOf(PairLabel::kCausal, VariantConfig::FromName("prompt")),
            (A{Answer::kCauseWord}));
}

TEST(LossTest, UniformHeadGivesLogOfCandidateCount) {
  const Bench s;
  DaPromptModel m = s.Model();
  for (int h = 0; h < 2; ++h) {
    m.head(h).decoder().value.setZero();
    m.head(h).decoder_bias().value.setZero();
  }
  const PromptInstance pos = s.First(m, PairLabel::kCausal);
  const LossBreakdown l = ComputeLoss(m, {&pos}, 0.0, false);
  const auto& set1 = m.vocabulary().candidate_set_1;
  const double n = static_cast<double>(std::count(set1.begin(), set1.end(), true));
  EXPECT_NEAR(l.l1, std::log(n), 1e-12);
  EXPECT_NEAR(l.l2, std::log(n), 1e-12);
  EXPECT_EQ(l.total, l.l1 + l.l2);
}

TEST(LossTest, PerfectPredictionHasZeroLoss) {
  const Bench s;
  DaPromptModel m = s.Model();
  m.head(0).decoder_bias().value(0, m.vocabulary().e1_open) = 1e4;
  m.head(1).decoder_bias().value(0, m.vocabulary().e2_open) = 1e4;
  const PromptInstance pos = s.First(m, PairLabel::kCausal);
  const LossBreakdown l = ComputeLoss(m, {&pos}, 0.0, false);
  EXPECT_EQ(l.total, 0.0);
  const PromptInstance neg = s.First(m, PairLabel::kNone);
  EXPECT_GT(ComputeLoss(m, {&neg}, 0.0, false).total, 0.0);
}

TEST(LossTest, RegularizationCountsTheSharedHeadOnce) {
  const Bench s;
  DaPromptModel full = s.Model("full");
  DaPromptModel shm = s.Model("shm");
  const PromptInstance a = s.First(full, PairLabel::kCausal);
  const PromptInstance b = s.First(shm, PairLabel::kCausal);
  const double lambda = 0.5;
  const LossBreakdown lf = ComputeLoss(full, {&a}, lambda, false);
  const LossBreakdown ls = ComputeLoss(shm, {&b}, lambda, false);
  EXPECT_NEAR(lf.l2 - lf.ce2, lambda * full.HeadSquaredNorm(1), 1e-9);
  EXPECT_EQ(ls.l2, ls.ce2);
  EXPECT_NEAR(ls.l1 - ls.ce1,
              lambda * (shm.EncoderSquaredNorm() + shm.HeadSquaredNorm(0)), 1e-9);
}

TEST(TrainTest, RepeatedPositiveDescends) {
  const Bench s;
  for (const char* variant : {"full", "sim"}) {
    DaPromptModel m = s.Model(variant);
    const PromptInstance pos = s.First(m, PairLabel::kCausal);
    AdamW::Options o;
    o.learning_rate = 1e-3;
    AdamW adam(o);
    const double initial = ComputeLoss(m, {&pos}, 0.0, false).total;
    const auto start = m.Predict(pos);
    for (int step = 0; step < 50; ++step) {
      m.ZeroGrad();
      ComputeLoss(m, {&pos}, 0.0, true);
      adam.Step(m.Parameters());
    }
    EXPECT_LT(ComputeLoss(m, {&pos}, 0.0, false).total, initial) << variant;
    const auto end = m.Predict(pos);
    EXPECT_GT(end.p1.value_or(0) + end.p2.value_or(0),
              start.p1.value_or(0) + start.p2.value_or(0));
  }
}

TEST(TrainTest, HeadsSeparateAfterFirstAsymmetricBatch) {
  const Bench s;
  DaPromptModel m = s.Model("full");
  auto distance = [&]() {
    double d = 0.0;
    const auto h1 = m.HeadParameters(0), h2 = m.HeadParameters(1);
    for (std::size_t i = 0; i < h1.size(); ++i) {
      d += (h1[i]->value - h2[i]->value).squaredNorm();
    }
    return std::sqrt(d);
  };
  EXPECT_EQ(distance(), 0.0);
  const PromptInstance pos = s.First(m, PairLabel::kCausal);
  AdamW::Options o;
  o.learning_rate = 1e-3;
  AdamW adam(o);
  double last = 0.0;
  for (int step = 0; step < 3; ++step) {
    m.ZeroGrad();
    ComputeLoss(m, {&pos}, 0.0, true);
    adam.Step(m.Parameters());
    EXPECT_GT(distance(), last);
    last = distance();
  }
}

TEST(TrainTest, SameSeedSameLossTrace) {
  const Bench s;
  TrainData data;
  data.corpus = &s.corpus;
  data.train = s.pairs;
  const TrainingConfig config = FastConfig();
  DaPromptModel a = s.Model();
  DaPromptModel b = s.Model();
  const TrainResult ra = Train(a, data, config);
  const TrainResult rb = Train(b, data, config);
  ASSERT_FALSE(ra.state.loss_history.empty());
  EXPECT_EQ(ra.state.loss_history, rb.state.loss_history);
  EXPECT_EQ(ra.state.loss_history.size(), static_cast<std::size_t>(ra.state.step));
  TrainingConfig other = config;
  other.seed = 43;
  DaPromptModel c = s.Model();
  EXPECT_NE(Train(c, data, other).state.loss_history, ra.state.loss_history);
}

TEST(TrainTest, DevSelectionRestoresBestEpoch) {
  const Bench s;
  TrainData data;
  data.corpus = &s.corpus;
  data.train = s.pairs;
  data.dev = s.pairs;
  TrainingConfig config = FastConfig();
  config.epochs = 3;
  DaPromptModel m = s.Model();
  int epochs_seen = 0;
  TrainHooks hooks;
  hooks.on_epoch_end = [&](const TrainState&, DaPromptModel&, bool) { ++epochs_seen; };
  const TrainResult r = Train(m, data, config, hooks);
  EXPECT_EQ(epochs_seen, r.state.epoch);
  ASSERT_GE(r.state.best_dev_f1, 0.0);
  const auto preds = PredictPairs(m, s.corpus, s.pairs);
  EXPECT_DOUBLE_EQ(
      Prf1(ScoreByScope(preds, DecisionRule::Joint(r.state.rho)).overall()).f1,
      r.state.best_dev_f1);
}

TEST(TrainTest, PositivesOnlyStillTrains) {
  const Bench s;
  TrainData data;
  data.corpus = &s.corpus;
  data.train = s.pairs;
  TrainingConfig config = FastConfig();
  config.neg_sample_p = 0.0;
  config.epochs = 1;
  DaPromptModel m = s.Model();
  EXPECT_GT(Train(m, data, config).state.step, 0);
}

TEST(TrainTest, NoInstancesIsAContractViolation) {
  const Bench s;
  TrainData data;
  data.corpus = &s.corpus;
  DaPromptModel m = s.Model();
  EXPECT_THROW(Train(m, data, FastConfig()), ContractViolation);
}

TEST(TrainTest, NonFiniteLossAborts) {
  const Bench s;
  TrainData data;
  data.corpus = &s.corpus;
  data.train = s.pairs;
  DaPromptModel m = s.Model();
  m.head(0).decoder_bias().value.setConstant(std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(Train(m, data, FastConfig()), DivergenceError);
}

TEST(ThresholdTest, PerfectDevPicksSmallestPositiveGridPoint) {
  std::vector<ScoredPair> dev = {
      {1.0, 1.0, PairLabel::kCausal, Scope::kIntra, ScoreKind::kTwoMask},
      {0.0, 0.0, PairLabel::kNone, Scope::kCross, ScoreKind::kTwoMask}};
  EXPECT_DOUBLE_EQ(SelectThreshold(dev, ThresholdGrid()), 0.1);
  EXPECT_DOUBLE_EQ(SelectThreshold(dev, {1.3}), 1.3);
  EXPECT_THROW(SelectThreshold({}, ThresholdGrid()), ContractViolation);
}

TEST(ThresholdTest, MatchesExhaustiveSearch) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = ThresholdGrid();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScoredPair> dev;
    for (int i = 0; i < 40; ++i) {
      const bool causal = u(gen) < 0.4;
      const double shift = causal ? 0.3 : 0.0;
      dev.push_back({std::min(1.0, u(gen) * 0.7 + shift),
                     std::min(1.0, u(gen) * 0.7 + shift),
                     causal ? PairLabel::kCausal : PairLabel::kNone,
                     Scope::kIntra, ScoreKind::kTwoMask});
    }
    double best = -1.0, best_rho = -1.0;
    for (double rho : grid) {
      std::size_t tp = 0, fp = 0, fn = 0;
      for (const auto& d : dev) {
        const bool accept = d.p1 + d.p2 >= rho;
        const bool causal = d.gold == PairLabel::kCausal;
        tp += accept && causal;
        fp += accept && !causal;
        fn += !accept && causal;
      }
      const double f1 = tp ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
      if (f1 > best + 1e-12) {
        best = f1;
        best_rho = rho;
      }
    }
    EXPECT_DOUBLE_EQ(SelectThreshold(dev, grid), best_rho);
  }
}

TEST(ConfigTest, JsonRoundTripAndValidation) {
  TrainingConfig c = FastConfig("shm");
  c.scope = ScopeFilter::kIntra;
  c.resample_negatives = true;
  const TrainingConfig back = ConfigFromJson(ConfigToJson(c));
  EXPECT_EQ(ConfigToJson(back), ConfigToJson(c));
  EXPECT_EQ(back.variant, c.variant);

  nlohmann::json j = ConfigToJson(c);
  j.erase("backbone_name");
  EXPECT_THROW(ConfigFromJson(j), ConfigError);
  j = ConfigToJson(c);
  j["neg_sample_p"] = 1.5;
  EXPECT_THROW(ConfigFromJson(j), ConfigError);
  j = ConfigToJson(c);
  j["learning_rte"] = 0.1;
  EXPECT_THROW(ConfigFromJson(j), ConfigError);
  j = ConfigToJson(c);
  j["variant"] = "sim+et";
  EXPECT_THROW(ConfigFromJson(j), ConfigError);
  const TrainingConfig defaults = ConfigFromJson({{"backbone_name", "tiny-mlm"}});
  EXPECT_EQ(defaults.learning_rate, 1e-5);
  EXPECT_EQ(defaults.batch_size, 16);
  EXPECT_EQ(defaults.neg_sample_p, 0.2);
  EXPECT_EQ(defaults.rho, 0.6);
}

TEST(ConfigTest, StateJsonRoundTrip) {
  TrainState s;
  s.step = 2;
  s.epoch = 1;
  s.loss_history = {1.5, 0.25};
  s.rho = 0.7;
  const TrainState back = StateFromJson(StateToJson(s));
  EXPECT_EQ(back.loss_history, s.loss_history);
  EXPECT_EQ(back.rho, 0.7);
  nlohmann::json bad = StateToJson(s);
  bad["step"] = 3;
  EXPECT_THROW(StateFromJson(bad), ParseError);
}

}  // namespace
}  // namespace daprompt
