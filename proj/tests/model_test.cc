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

#include "daprompt/model.h"

#include <cmath>

#include "gtest/gtest.h"
#include "daprompt/errors.h"
#include "daprompt/optimizer.h"
#include "daprompt/training.h"
#include "test_util.h"

namespace daprompt {
namespace {

using testing_util::MicroBackbone;
using testing_util::SmallSynthetic;

struct Fixture {
  Corpus corpus = SmallSynthetic();
  std::vector<EventPair> pairs = EnumeratePairs(corpus);

  DaPromptModel Model(const std::string& variant, std::uint64_t seed = 5) const {
    return DaPromptModel::Create(MicroBackbone(corpus), VariantConfig::FromName(variant),
                                 seed);
  }
  PromptInstance Instance(const DaPromptModel& m, std::size_t i) const {
    const EventPair& p = pairs.at(i);
    return m.BuildInstance(*corpus.FindDocument(p.doc_id), p);
  }
  std::size_t FirstWith(PairLabel label, Scope scope) const {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].label == label && pairs[i].scope == scope) return i;
    }
    return 0;
  }
};

TEST(VariantTest, NamesRoundTrip) {
  for (const char* name : {"full", "sim", "shm", "et", "prompt", "sim+shm"}) {
    const VariantConfig v = VariantConfig::FromName(name);
    EXPECT_EQ(v.Name(), name);
    EXPECT_EQ(VariantFromJson(VariantToJson(v)), v);
  }
  EXPECT_THROW(VariantConfig::FromName("sim+et"), ConfigError);
  EXPECT_THROW(VariantConfig::FromName("bogus"), ConfigError);
}

TEST(VocabularyTest, VirtualTokensAppendedWithMeanNoneRows) {
  const Corpus corpus = SmallSynthetic();
  Backbone backbone = MicroBackbone(corpus);
  const int base = backbone.tokenizer.Size();
  const Matrix base_in = backbone.encoder.token_embedding().value;
  const Matrix base_out = backbone.mlm_head.decoder().value;
  const RowVector base_bias = backbone.mlm_head.decoder_bias().value.row(0);
  const EnrichedVocabulary v = ExtendVocabulary(backbone, 1);
  EXPECT_EQ(v.base_size, base);
  EXPECT_EQ(v.size, base + 5);
  EXPECT_EQ(v.e1_open, base);
  EXPECT_EQ(v.none, base + 4);
  EXPECT_EQ(backbone.encoder.token_embedding().value.rows(), base + 5);
  EXPECT_EQ(backbone.mlm_head.decoder().value.rows(), base + 5);
  // Mean of the base rows computed independently.
  for (int c = 0; c < base_in.cols(); ++c) {
    double in = 0.0, out = 0.0;
    for (int r = 0; r < base; ++r) {
      in += base_in(r, c);
      out += base_out(r, c);
    }
    EXPECT_NEAR(backbone.encoder.token_embedding().value(v.none, c), in / base, 1e-12);
    EXPECT_NEAR(backbone.mlm_head.decoder().value(v.none, c), out / base, 1e-12);
  }
  EXPECT_NEAR(backbone.mlm_head.decoder_bias().value(0, v.none),
              base_bias.sum() / base, 1e-12);
  EXPECT_TRUE(v.candidate_set_1[v.e1_open]);
  EXPECT_TRUE(v.candidate_set_1[v.none]);
  EXPECT_FALSE(v.candidate_set_1[v.e2_open]);
  EXPECT_FALSE(v.candidate_set_1[v.e1_close]);
  EXPECT_TRUE(v.candidate_set_2[v.e2_open]);
  EXPECT_FALSE(v.candidate_set_2[v.e1_open]);
  EXPECT_THROW(ExtendVocabulary(backbone, 1), ConfigError);
}

TEST(ModelTest, DistributionsSumToOneWithoutLeakage) {
  const Fixture f;
  const DaPromptModel m = f.Model("full");
  const auto& v = m.vocabulary();
  for (std::size_t i = 0; i < f.pairs.size(); i += 3) {
    const MaskPrediction p = m.Predict(f.Instance(m, i));
    ASSERT_TRUE(p.dist1 && p.dist2 && p.p1 && p.p2);
    EXPECT_NEAR(p.dist1->sum(), 1.0, 1e-5);
    EXPECT_NEAR(p.dist2->sum(), 1.0, 1e-5);
    EXPECT_EQ((*p.dist1)(v.e2_open), 0.0);
    EXPECT_EQ((*p.dist2)(v.e1_open), 0.0);
    for (int id : {v.e1_close, v.e2_close}) {
      EXPECT_EQ((*p.dist1)(id), 0.0);
      EXPECT_EQ((*p.dist2)(id), 0.0);
    }
    EXPECT_EQ(*p.p1, (*p.dist1)(v.e1_open));
    EXPECT_EQ(*p.p2, (*p.dist2)(v.e2_open));
  }
}

TEST(ModelTest, VariantOutputs) {
  const Fixture f;
  const MaskPrediction sim = f.Model("sim").Predict(f.Instance(f.Model("sim"), 0));
  EXPECT_FALSE(sim.dist1.has_value());
  EXPECT_FALSE(sim.p1.has_value());
  ASSERT_TRUE(sim.p2.has_value());

  const DaPromptModel prompt = f.Model("prompt");
  const MaskPrediction pr = prompt.Predict(f.Instance(prompt, 0));
  ASSERT_TRUE(pr.p1 && pr.p2);
  EXPECT_NEAR(*pr.p1 + *pr.p2, 1.0, 1e-12);

  const DaPromptModel et = f.Model("et");
  const PromptInstance inst = f.Instance(et, 0);
  const MaskPrediction e = et.Predict(inst);
  ASSERT_TRUE(e.dist1 && e.p1);
  EXPECT_EQ(*e.p1, (*e.dist1)(inst.event1_subtokens.front()));
  EXPECT_EQ((*e.dist1)(et.vocabulary().e1_open), 0.0);

  const DaPromptModel shm = f.Model("shm");
  EXPECT_TRUE(shm.HeadsAliased());
  EXPECT_FALSE(f.Model("full").HeadsAliased());
}

TEST(ModelTest, SharedHeadParametersListedOnce) {
  const Fixture f;
  DaPromptModel full = f.Model("full");
  DaPromptModel shm = f.Model("shm");
  const std::size_t head = full.HeadParameters(0).size();
  EXPECT_EQ(full.Parameters().size(), shm.Parameters().size() + head);
}

TEST(ModelTest, AnswerOutsideCandidateSetIsAnIntegrityError) {
  const Fixture f;
  const DaPromptModel m = f.Model("full");
  const PromptInstance inst = f.Instance(m, 0);
  const auto slots = m.Slots(inst);
  EXPECT_THROW(m.ResolveAnswer(Answer::kE2, slots[0], inst), IntegrityError);
  EXPECT_THROW(m.ResolveAnswer(Answer::kE1, slots[1], inst), IntegrityError);
  EXPECT_EQ(m.ResolveAnswer(Answer::kNone, slots[1], inst), m.vocabulary().none);
}

TEST(ModelTest, CorruptMaskPositionIsAnIntegrityError) {
  const Fixture f;
  const DaPromptModel m = f.Model("full");
  PromptInstance inst = f.Instance(m, 0);
  inst.mask2_pos = 1;
  EXPECT_THROW(m.Predict(inst), IntegrityError);
  inst.mask2_pos = 10000;
  EXPECT_THROW(m.Slots(inst), IntegrityError);
}

// Analytic gradient of the summed per-mask cross-entropy against central
// differences on head parameters and the five virtual-token rows.
TEST(ModelTest, LossGradientsMatchFiniteDifferences) {
  const Fixture f;
  for (const char* variant : {"full", "shm"}) {
    DaPromptModel m = f.Model(variant);
    const PromptInstance pos = f.Instance(m, f.FirstWith(PairLabel::kCausal, Scope::kCross));
    const PromptInstance neg = f.Instance(m, f.FirstWith(PairLabel::kNone, Scope::kIntra));
    const std::vector<const PromptInstance*> batch = {&pos, &neg};
    m.ZeroGrad();
    ComputeLoss(m, batch, 0.0, true);
    auto objective = [&]() {
      const LossBreakdown l = ComputeLoss(m, batch, 0.0, false);
      return l.total;
    };
    std::vector<std::pair<Parameter*, std::vector<Eigen::Index>>> probes;
    const auto& v = m.vocabulary();
    Parameter& emb = m.encoder().token_embedding();
    const int dim = static_cast<int>(emb.value.cols());
    std::vector<Eigen::Index> vet_entries;
    for (int id : v.VirtualIds()) {
      for (int c = 0; c < dim; c += 3) vet_entries.push_back(id * dim + c);
    }
    probes.push_back({&emb, vet_entries});
    for (int h = 0; h < 2; ++h) {
      probes.push_back({&m.head(h).decoder(), vet_entries});
      std::vector<Eigen::Index> bias_entries;
      for (int id : v.VirtualIds()) bias_entries.push_back(id);
      for (Eigen::Index k = 0; k < v.base_size; k += 5) bias_entries.push_back(k);
      probes.push_back({&m.head(h).decoder_bias(), bias_entries});
      for (Parameter* p : m.HeadParameters(h)) {
        if (p == &m.head(h).decoder() || p == &m.head(h).decoder_bias()) continue;
        std::vector<Eigen::Index> entries;
        for (Eigen::Index k = 0; k < p->value.size(); k += 11) entries.push_back(k);
        probes.push_back({p, entries});
      }
    }
    int checked = 0;
    for (auto& [p, entries] : probes) {
      for (Eigen::Index k : entries) {
        double& x = p->value.data()[k];
        const double saved = x;
        x = saved + 1e-5;
        const double up = objective();
        x = saved - 1e-5;
        const double down = objective();
        x = saved;
        const double numeric = (up - down) / 2e-5;
        const double analytic = p->grad.data()[k];
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-7});
        EXPECT_LT(std::abs(numeric - analytic) / scale, 1e-3)
            << variant << " " << p->name << "[" << k << "]";
        ++checked;
      }
    }
    EXPECT_GT(checked, 100);
  }
}

TEST(ModelTest, OneStepMovesTheE1OutputRow) {
  const Fixture f;
  DaPromptModel m = f.Model("full");
  const PromptInstance pos = f.Instance(m, f.FirstWith(PairLabel::kCausal, Scope::kIntra));
  const int e1 = m.vocabulary().e1_open;
  const RowVector before = m.head(0).decoder().value.row(e1);
  m.ZeroGrad();
  ComputeLoss(m, {&pos}, 0.0, true);
  AdamW::Options o;
  o.learning_rate = 1e-3;
  AdamW(o).Step(m.Parameters());
  EXPECT_GT((m.head(0).decoder().value.row(e1) - before).norm(), 0.0);
}

TEST(ModelTest, FrozenBackboneOnlyMovesVirtualRows) {
  const Fixture f;
  DaPromptModel m = f.Model("full");
  m.FreezeBackbone(true);
  const Matrix emb = m.encoder().token_embedding().value;
  std::vector<Matrix> encoder_before;
  for (Parameter* p : m.EncoderParameters()) encoder_before.push_back(p->value);
  const PromptInstance pos = f.Instance(m, f.FirstWith(PairLabel::kCausal, Scope::kIntra));
  m.ZeroGrad();
  ComputeLoss(m, {&pos}, 0.0, true);
  AdamW::Options o;
  o.learning_rate = 1e-2;
  AdamW(o).Step(m.Parameters());
  const Matrix& after = m.encoder().token_embedding().value;
  const int base = m.vocabulary().base_size;
  EXPECT_EQ(after.topRows(base), emb.topRows(base));
  EXPECT_NE(after.bottomRows(5), emb.bottomRows(5));
  const auto params = m.EncoderParameters();
  for (std::size_t i = 1; i < params.size(); ++i) {
    EXPECT_EQ(params[i]->value, encoder_before[i]) << params[i]->name;
  }
}

TEST(ModelTest, SaveLoadPreservesPredictions) {
  const Fixture f;
  for (const char* variant : {"full", "shm", "prompt"}) {
    DaPromptModel m = f.Model(variant);
    const auto dir = testing_util::TempDir(std::string("model_") + variant);
    m.SaveWeights(dir);
    const DaPromptModel back = DaPromptModel::Load(dir);
    EXPECT_EQ(back.variant(), m.variant());
    EXPECT_EQ(back.seed(), m.seed());
    EXPECT_EQ(back.HeadsAliased(), m.HeadsAliased());
    for (std::size_t i = 0; i < f.pairs.size(); i += 7) {
      const MaskPrediction a = m.Predict(f.Instance(m, i));
      const MaskPrediction b = back.Predict(f.Instance(back, i));
      EXPECT_EQ(a.p1, b.p1);
      EXPECT_EQ(a.p2, b.p2);
    }
    std::filesystem::remove_all(dir);
  }
}

TEST(ModelTest, SnapshotRestores) {
  const Fixture f;
  DaPromptModel m = f.Model("full");
  const ParameterSnapshot snap(m.Parameters());
  const Matrix before = m.head(1).decoder_bias().value;
  m.head(1).decoder_bias().value.setConstant(3.0);
  snap.Restore(m.Parameters());
  EXPECT_EQ(m.head(1).decoder_bias().value, before);
}

}  // namespace
}  // namespace daprompt
