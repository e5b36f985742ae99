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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "daprompt/errors.h"
#include "daprompt/evaluation.h"
#include "daprompt/optimizer.h"

namespace daprompt {

namespace {

const std::set<std::string>& ConfigKeys() {
  static const std::set<std::string> keys = {
      "backbone_name", "learning_rate", "batch_size", "weight_decay",
      "epochs", "patience", "seed", "neg_sample_p", "resample_negatives",
      "rho", "select_rho", "grid", "variant", "freeze_backbone", "scope",
      "pretrain_steps", "pretrain_learning_rate", "corpus", "fold_scheme",
      "fold", "micro_average"};
  return keys;
}

void Require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

// Portable Fisher-Yates; std::shuffle's draw sequence is library-specific.
template <typename T>
void Shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[gen() % i]);
  }
}

std::uint64_t EpochSeed(std::uint64_t seed, int epoch) {
  return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch) + 1;
}

ScoreKind KindOf(const VariantConfig& v) {
  if (v.conventional_prompt) return ScoreKind::kAnswerWord;
  if (v.single_mask) return ScoreKind::kSingleMask;
  return ScoreKind::kTwoMask;
}

// Dev F1 used for early stopping and the threshold it was reached at.
std::pair<double, double> DevScore(const std::vector<ScoredPair>& dev,
                                   const TrainingConfig& config,
                                   const std::vector<double>& grid) {
  const double rho = config.select_rho ? SelectThreshold(dev, grid) : config.rho;
  const ScopedConfusion c = ScoreByScope(dev, DecisionRule::Joint(rho));
  return {Prf1(c.overall()).f1, rho};
}

}  // namespace

void TrainingConfig::Validate() const {
  Require(!backbone_name.empty(), "backbone_name is required");
  Require(learning_rate > 0.0, "learning_rate must be positive");
  Require(batch_size > 0, "batch_size must be positive");
  Require(weight_decay >= 0.0, "weight_decay must be non-negative");
  Require(epochs > 0, "epochs must be positive");
  Require(patience > 0, "patience must be positive");
  Require(neg_sample_p >= 0.0 && neg_sample_p <= 1.0,
          "neg_sample_p must lie in [0, 1]");
  Require(rho >= 0.0 && rho <= 2.0, "rho must lie in [0, 2]");
  Require(pretrain_steps >= 0, "pretrain_steps must be non-negative");
  Require(pretrain_learning_rate > 0.0,
          "pretrain_learning_rate must be positive");
  Require(fold_scheme == "esc" || fold_scheme == "ctb" || fold_scheme == "none",
          "fold_scheme must be esc, ctb or none");
  Require(fold >= 0, "fold must be non-negative");
  try {
    if (ParseGrid(grid).empty()) throw ConfigError("empty grid");
  } catch (const std::exception& e) {
    throw ConfigError("grid: " + std::string(e.what()));
  }
  try {
    variant.Validate();
  } catch (const std::exception& e) {
    throw ConfigError("variant: " + std::string(e.what()));
  }
}

nlohmann::json ConfigToJson(const TrainingConfig& c) {
  return {{"backbone_name", c.backbone_name},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"weight_decay", c.weight_decay},
          {"epochs", c.epochs},
          {"patience", c.patience},
          {"seed", c.seed},
          {"neg_sample_p", c.neg_sample_p},
          {"resample_negatives", c.resample_negatives},
          {"rho", c.rho},
          {"select_rho", c.select_rho},
          {"grid", c.grid},
          {"variant", VariantToJson(c.variant)},
          {"freeze_backbone", c.freeze_backbone},
          {"scope", ToString(c.scope)},
          {"pretrain_steps", c.pretrain_steps},
          {"pretrain_learning_rate", c.pretrain_learning_rate},
          {"corpus", c.corpus},
          {"fold_scheme", c.fold_scheme},
          {"fold", c.fold},
          {"micro_average", c.micro_average}};
}

TrainingConfig ConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!ConfigKeys().count(key)) throw ConfigError("unknown config key: " + key);
  }
  TrainingConfig c;
  try {
    c.backbone_name = j.value("backbone_name", c.backbone_name);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.epochs = j.value("epochs", c.epochs);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.neg_sample_p = j.value("neg_sample_p", c.neg_sample_p);
    c.resample_negatives = j.value("resample_negatives", c.resample_negatives);
    c.rho = j.value("rho", c.rho);
    c.select_rho = j.value("select_rho", c.select_rho);
    c.grid = j.value("grid", c.grid);
    if (j.contains("variant")) c.variant = VariantFromJson(j.at("variant"));
    c.freeze_backbone = j.value("freeze_backbone", c.freeze_backbone);
    if (j.contains("scope")) {
      c.scope = ParseScopeFilter(j.at("scope").get<std::string>());
    }
    c.pretrain_steps = j.value("pretrain_steps", c.pretrain_steps);
    c.pretrain_learning_rate =
        j.value("pretrain_learning_rate", c.pretrain_learning_rate);
    c.corpus = j.value("corpus", c.corpus);
    c.fold_scheme = j.value("fold_scheme", c.fold_scheme);
    c.fold = j.value("fold", c.fold);
    c.micro_average = j.value("micro_average", c.micro_average);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.Validate();
  return c;
}

nlohmann::json StateToJson(const TrainState& s) {
  return {{"step", s.step},
          {"epoch", s.epoch},
          {"loss_history", s.loss_history},
          {"optimizer_steps", s.optimizer_steps},
          {"best_dev_f1", s.best_dev_f1},
          {"best_epoch", s.best_epoch},
          {"epochs_without_improvement", s.epochs_without_improvement},
          {"rho", s.rho},
          {"stopped_early", s.stopped_early}};
}

TrainState StateFromJson(const nlohmann::json& j) {
  TrainState s;
  s.step = j.at("step");
  s.epoch = j.at("epoch");
  s.loss_history = j.at("loss_history").get<std::vector<double>>();
  s.optimizer_steps = j.at("optimizer_steps");
  s.best_dev_f1 = j.at("best_dev_f1");
  s.best_epoch = j.at("best_epoch");
  s.epochs_without_improvement = j.at("epochs_without_improvement");
  s.rho = j.at("rho");
  s.stopped_early = j.value("stopped_early", false);
  if (s.loss_history.size() != static_cast<std::size_t>(s.step)) {
    throw ParseError(0, "train state loss history does not match its step");
  }
  return s;
}

std::vector<Answer> LabelOf(PairLabel label, const VariantConfig& v) {
  const bool causal = label == PairLabel::kCausal;
  if (v.conventional_prompt) {
    return {causal ? Answer::kCauseWord : Answer::kNoneWord};
  }
  if (v.single_mask) return {causal ? Answer::kE2 : Answer::kNone};
  if (v.event_token_answers) {
    const Answer a = causal ? Answer::kEventSurface : Answer::kNone;
    return {a, a};
  }
  if (causal) return {Answer::kE1, Answer::kE2};
  return {Answer::kNone, Answer::kNone};
}

LossBreakdown ComputeLoss(DaPromptModel& model,
                          const std::vector<const PromptInstance*>& batch,
                          double lambda, bool accumulate) {
  LossBreakdown out;
  if (batch.empty()) return out;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const PromptInstance* inst : batch) {
    const auto slots = model.Slots(*inst);
    const auto answers = LabelOf(inst->gold, model.variant());
    std::vector<double> nll;
    if (accumulate) {
      nll = model.AccumulateGradients(*inst, answers, scale);
    } else {
      const MaskPrediction m = model.Predict(*inst);
      for (std::size_t k = 0; k < slots.size(); ++k) {
        const RowVector& dist = slots[k].event == 1 ? *m.dist1 : *m.dist2;
        const int target = model.ResolveAnswer(answers[k], slots[k], *inst);
        nll.push_back(-std::log(std::max(dist(target), 1e-300)));
      }
    }
    for (std::size_t k = 0; k < slots.size(); ++k) {
      (slots[k].head == 0 ? out.ce1 : out.ce2) += nll[k] * scale;
    }
  }
  out.l1 = out.ce1 +
           lambda * (model.EncoderSquaredNorm() + model.HeadSquaredNorm(0));
  out.l2 = out.ce2 + (model.HeadsAliased() ? 0.0
                                           : lambda * model.HeadSquaredNorm(1));
  out.total = out.l1 + out.l2;
  return out;
}

TrainResult Train(DaPromptModel& model, const TrainData& data,
                  const TrainingConfig& config, const TrainHooks& hooks,
                  const TrainState* resume, const ParameterSnapshot* best) {
  config.Validate();
  if (data.corpus == nullptr) throw ContractViolation("training needs a corpus");
  const std::vector<double> grid = ParseGrid(config.grid);
  model.FreezeBackbone(config.freeze_backbone);

  // Instances for every candidate training pair, built once.
  TrainResult result;
  std::vector<PromptInstance> pool;
  std::vector<EventPair> pool_pairs;
  for (const EventPair& pair : FilterScope(data.train, config.scope)) {
    const Document* doc = data.corpus->FindDocument(pair.doc_id);
    if (doc == nullptr) throw IntegrityError("unknown document " + pair.doc_id);
    try {
      pool.push_back(model.BuildInstance(*doc, pair));
      pool_pairs.push_back(pair);
    } catch (const InstanceTooLongError&) {
      ++result.skipped_instances;
    } catch (const UnsupportedInputError&) {
      ++result.skipped_instances;
    }
  }
  const std::vector<EventPair> dev = FilterScope(data.dev, config.scope);

  auto sample = [&](int epoch) {
    const std::uint64_t s =
        config.resample_negatives ? EpochSeed(config.seed, epoch) : config.seed;
    return NegativeSampleIndices(pool_pairs, config.neg_sample_p, s);
  };

  AdamW::Options opt;
  opt.learning_rate = config.learning_rate;
  opt.weight_decay = config.weight_decay;
  AdamW optimizer(opt);

  TrainState& state = result.state;
  state.rho = config.rho;
  std::optional<ParameterSnapshot> best_weights;
  if (resume != nullptr) {
    state = *resume;
    optimizer.set_steps(state.optimizer_steps);
    if (best != nullptr) best_weights = *best;
  }

  const std::vector<Parameter*> params = model.Parameters();
  std::vector<std::size_t> fixed_sample;
  if (!config.resample_negatives) fixed_sample = sample(0);

  while (state.epoch < config.epochs && !state.stopped_early) {
    std::vector<std::size_t> order =
        config.resample_negatives ? sample(state.epoch) : fixed_sample;
    if (order.empty()) {
      throw ContractViolation("no training instances after negative sampling");
    }
    Shuffle(order, EpochSeed(config.seed ^ 0x5DEECE66DULL, state.epoch));

    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      std::vector<const PromptInstance*> batch;
      for (std::size_t i = begin; i < end; ++i) batch.push_back(&pool[order[i]]);
      model.ZeroGrad();
      const LossBreakdown loss =
          ComputeLoss(model, batch, config.weight_decay, true);
      if (!std::isfinite(loss.total)) {
        throw DivergenceError("non-finite loss at step " +
                              std::to_string(state.step + 1) + " (epoch " +
                              std::to_string(state.epoch + 1) + ")");
      }
      optimizer.Step(params);
      ++state.step;
      state.optimizer_steps = optimizer.steps();
      state.loss_history.push_back(loss.total);
      if (hooks.on_step) hooks.on_step(state, loss);
    }
    ++state.epoch;

    bool improved = false;
    if (!dev.empty()) {
      const auto [f1, rho] = DevScore(PredictPairs(model, *data.corpus, dev),
                                      config, grid);
      if (f1 > state.best_dev_f1) {
        state.best_dev_f1 = f1;
        state.best_epoch = state.epoch;
        state.rho = rho;
        state.epochs_without_improvement = 0;
        best_weights.emplace(params);
        improved = true;
      } else if (++state.epochs_without_improvement >= config.patience) {
        state.stopped_early = true;
      }
    } else {
      improved = true;
    }
    if (hooks.on_epoch_end) hooks.on_epoch_end(state, model, improved);
  }
  if (best_weights) best_weights->Restore(params);
  return result;
}

std::vector<ScoredPair> PredictPairs(const DaPromptModel& model,
                                     const Corpus& corpus,
                                     const std::vector<EventPair>& pairs) {
  std::vector<ScoredPair> out;
  out.reserve(pairs.size());
  const ScoreKind kind = KindOf(model.variant());
  for (const EventPair& pair : pairs) {
    ScoredPair s;
    s.gold = pair.label;
    s.scope = pair.scope;
    s.kind = kind;
    const Document* doc = corpus.FindDocument(pair.doc_id);
    if (doc == nullptr) throw IntegrityError("unknown document " + pair.doc_id);
    try {
      const MaskPrediction m = model.Predict(model.BuildInstance(*doc, pair));
      s.p1 = m.p1.value_or(0.0);
      s.p2 = m.p2.value_or(0.0);
      if (kind == ScoreKind::kAnswerWord) {
        s.p1 = m.p1.value_or(0.0);
        s.p2 = m.p2.value_or(1.0);
      }
    } catch (const InstanceTooLongError&) {
      s.p1 = 0.0;
      s.p2 = kind == ScoreKind::kAnswerWord ? 1.0 : 0.0;
    }
    out.push_back(s);
  }
  return out;
}

double SelectThreshold(const std::vector<ScoredPair>& dev,
                       const std::vector<double>& grid) {
  if (dev.empty() || grid.empty()) {
    throw ContractViolation("threshold selection needs dev predictions and a grid");
  }
  double best_rho = grid.front();
  double best_f1 = -1.0;
  for (double rho : grid) {
    const double f1 =
        Prf1(ScoreByScope(dev, DecisionRule::Joint(rho)).overall()).f1;
    if (f1 > best_f1 || (f1 == best_f1 && rho < best_rho)) {
      best_f1 = f1;
      best_rho = rho;
    }
  }
  return best_rho;
}

}  // namespace daprompt
