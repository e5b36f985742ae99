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
#include <random>
#include <sstream>

#include "daprompt/errors.h"
#include "daprompt/serialization.h"

namespace daprompt {

namespace {

constexpr const char* kModelFile = "model.json";

}  // namespace

void VariantConfig::Validate() const {
  const int exclusive = single_mask + event_token_answers + conventional_prompt;
  if (exclusive > 1) {
    throw ConfigError(
        "at most one of single_mask, event_token_answers and "
        "conventional_prompt may be enabled");
  }
}

TemplateKind VariantConfig::Template() const {
  if (conventional_prompt) return TemplateKind::kConventional;
  if (single_mask) return TemplateKind::kSingleMask;
  return TemplateKind::kAssumption;
}

std::string VariantConfig::Name() const {
  std::vector<std::string> parts;
  if (single_mask) parts.push_back("sim");
  if (shared_head) parts.push_back("shm");
  if (event_token_answers) parts.push_back("et");
  if (conventional_prompt) parts.push_back("prompt");
  if (parts.empty()) return "full";
  std::string name = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) name += "+" + parts[i];
  return name;
}

VariantConfig VariantConfig::FromName(const std::string& name) {
  VariantConfig v;
  if (name == "full") return v;
  std::stringstream ss(name);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part == "sim") {
      v.single_mask = true;
    } else if (part == "shm") {
      v.shared_head = true;
    } else if (part == "et") {
      v.event_token_answers = true;
    } else if (part == "prompt") {
      v.conventional_prompt = true;
    } else {
      throw ConfigError("unknown variant '" + part +
                        "' (expected full|sim|shm|et|prompt)");
    }
  }
  v.Validate();
  return v;
}

nlohmann::json VariantToJson(const VariantConfig& v) {
  return {{"name", v.Name()},
          {"single_mask", v.single_mask},
          {"shared_head", v.shared_head},
          {"event_token_answers", v.event_token_answers},
          {"conventional_prompt", v.conventional_prompt},
          {"et_mean_subtokens", v.et_mean_subtokens}};
}

VariantConfig VariantFromJson(const nlohmann::json& j) {
  if (j.is_string()) return VariantConfig::FromName(j.get<std::string>());
  VariantConfig v;
  v.single_mask = j.value("single_mask", false);
  v.shared_head = j.value("shared_head", false);
  v.event_token_answers = j.value("event_token_answers", false);
  v.conventional_prompt = j.value("conventional_prompt", false);
  v.et_mean_subtokens = j.value("et_mean_subtokens", false);
  v.Validate();
  return v;
}

EnrichedVocabulary ExtendVocabulary(Backbone& backbone, std::uint64_t seed) {
  Tokenizer& tok = backbone.tokenizer;
  if (tok.NumVirtual() != 0) {
    throw ConfigError("backbone vocabulary is already extended");
  }
  const int base = tok.Size();
  for (const char* t : {kE1Open, kE1Close, kE2Open, kE2Close, kNoneToken}) {
    tok.AddVirtualToken(t);
  }

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, backbone.init_stddev);
  const int dim = backbone.encoder.shape().dim;
  auto draw_rows = [&](const Matrix& base_table) {
    Matrix rows(5, dim);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < dim; ++c) rows(r, c) = normal(gen);
    }
    rows.row(4) = base_table.topRows(base).colwise().mean();
    return rows;
  };
  backbone.encoder.AppendTokenRows(
      draw_rows(backbone.encoder.token_embedding().value));
  const Matrix output_rows = draw_rows(backbone.mlm_head.decoder().value);
  RowVector biases = RowVector::Zero(5);
  biases(4) = backbone.mlm_head.decoder_bias().value.leftCols(base).mean();
  backbone.mlm_head.AppendOutputRows(output_rows, biases);
  return DescribeVocabulary(tok);
}

EnrichedVocabulary DescribeVocabulary(const Tokenizer& tok) {
  EnrichedVocabulary v;
  v.base_size = tok.BaseSize();
  v.size = tok.Size();
  v.e1_open = tok.Id(kE1Open);
  v.e1_close = tok.Id(kE1Close);
  v.e2_open = tok.Id(kE2Open);
  v.e2_close = tok.Id(kE2Close);
  v.none = tok.Id(kNoneToken);
  for (int id : v.VirtualIds()) {
    if (!tok.IsVirtual(id)) {
      throw IntegrityError("virtual token id overlaps the base vocabulary");
    }
  }
  v.candidate_set_1.assign(v.size, false);
  v.candidate_set_2.assign(v.size, false);
  for (int i = 0; i < v.base_size; ++i) {
    v.candidate_set_1[i] = true;
    v.candidate_set_2[i] = true;
  }
  v.candidate_set_1[v.e1_open] = true;
  v.candidate_set_1[v.none] = true;
  v.candidate_set_2[v.e2_open] = true;
  v.candidate_set_2[v.none] = true;
  return v;
}

DaPromptModel DaPromptModel::Create(Backbone backbone,
                                    const VariantConfig& variant,
                                    std::uint64_t seed) {
  variant.Validate();
  DaPromptModel model;
  model.seed_ = seed;
  model.variant_ = variant;
  model.backbone_ = std::move(backbone);
  model.vocab_ = ExtendVocabulary(model.backbone_, seed);
  model.head1_ = std::make_shared<MlmHead>(model.backbone_.mlm_head);
  model.head1_->Rename("head1");
  if (variant.shared_head) {
    model.head2_ = model.head1_;
  } else {
    model.head2_ = std::make_shared<MlmHead>(model.backbone_.mlm_head);
    model.head2_->Rename("head2");
  }
  model.BuildCandidateSets();
  return model;
}

void DaPromptModel::BuildCandidateSets() {
  event_candidates_.assign(vocab_.size, false);
  for (int i = 0; i < vocab_.base_size; ++i) event_candidates_[i] = true;
  event_candidates_[vocab_.none] = true;
  cause_id_ = tokenizer().Find(kCauseAnswerWord);
  none_word_id_ = tokenizer().Find(kNoneAnswerWord);
  answer_candidates_.assign(vocab_.size, false);
  if (cause_id_ >= 0 && none_word_id_ >= 0) {
    answer_candidates_[cause_id_] = true;
    answer_candidates_[none_word_id_] = true;
  } else if (variant_.conventional_prompt) {
    throw ConfigError("backbone vocabulary lacks the answer words '" +
                      std::string(kCauseAnswerWord) + "' and '" +
                      kNoneAnswerWord + "'");
  }
}

PromptInstance DaPromptModel::BuildInstance(const Document& doc,
                                            const EventPair& pair) const {
  return daprompt::BuildInstance(doc, pair, variant_.Template(), tokenizer(),
                                 max_len());
}

std::vector<MaskSlot> DaPromptModel::Slots(const PromptInstance& inst) const {
  std::vector<MaskSlot> slots;
  if (variant_.conventional_prompt) {
    slots.push_back({inst.mask1_pos, 0, &answer_candidates_, 1});
  } else if (variant_.single_mask) {
    slots.push_back({inst.mask2_pos, 1, &vocab_.candidate_set_2, 2});
  } else if (variant_.event_token_answers) {
    slots.push_back({inst.mask1_pos, 0, &event_candidates_, 1});
    slots.push_back({inst.mask2_pos, 1, &event_candidates_, 2});
  } else {
    slots.push_back({inst.mask1_pos, 0, &vocab_.candidate_set_1, 1});
    slots.push_back({inst.mask2_pos, 1, &vocab_.candidate_set_2, 2});
  }
  for (const auto& slot : slots) {
    if (slot.position < 0 ||
        slot.position >= static_cast<int>(inst.tokens.size()) ||
        inst.tokens[slot.position] != Tokenizer::kMaskId) {
      throw IntegrityError("mask position " + std::to_string(slot.position) +
                           " is not a mask token in an instance of length " +
                           std::to_string(inst.tokens.size()));
    }
  }
  return slots;
}

int DaPromptModel::ResolveAnswer(Answer answer, const MaskSlot& slot,
                                 const PromptInstance& inst) const {
  int id = -1;
  switch (answer) {
    case Answer::kE1:
      id = vocab_.e1_open;
      break;
    case Answer::kE2:
      id = vocab_.e2_open;
      break;
    case Answer::kNone:
      id = vocab_.none;
      break;
    case Answer::kEventSurface: {
      const auto& sub = slot.event == 1 ? inst.event1_subtokens
                                        : inst.event2_subtokens;
      if (sub.empty()) throw IntegrityError("empty event mention surface");
      id = sub.front();
      break;
    }
    case Answer::kCauseWord:
      id = cause_id_;
      break;
    case Answer::kNoneWord:
      id = none_word_id_;
      break;
  }
  if (id < 0 || id >= static_cast<int>(slot.candidates->size()) ||
      !(*slot.candidates)[id]) {
    throw IntegrityError("answer label is outside the mask's candidate set");
  }
  return id;
}

MaskPrediction DaPromptModel::Predict(const PromptInstance& inst) const {
  const auto slots = Slots(inst);
  const Matrix hidden = encoder().Forward(inst.tokens, nullptr);
  MaskPrediction out;
  for (const auto& slot : slots) {
    const Matrix logits = head(slot.head).Forward(hidden.row(slot.position), nullptr);
    RowVector probs = RestrictedSoftmax(logits.row(0), *slot.candidates);
    double p = 0.0;
    if (variant_.conventional_prompt) {
      out.p1 = probs(cause_id_);
      out.p2 = probs(none_word_id_);
      out.dist1 = std::move(probs);
      continue;
    }
    if (variant_.event_token_answers) {
      const auto& sub = slot.event == 1 ? inst.event1_subtokens
                                        : inst.event2_subtokens;
      if (sub.empty()) throw IntegrityError("empty event mention surface");
      if (variant_.et_mean_subtokens) {
        for (int id : sub) p += probs(id);
        p /= static_cast<double>(sub.size());
      } else {
        p = probs(sub.front());
      }
    } else {
      p = probs(slot.event == 1 ? vocab_.e1_open : vocab_.e2_open);
    }
    if (slot.event == 1) {
      out.p1 = p;
      out.dist1 = std::move(probs);
    } else {
      out.p2 = p;
      out.dist2 = std::move(probs);
    }
  }
  return out;
}

std::vector<double> DaPromptModel::AccumulateGradients(
    const PromptInstance& inst, const std::vector<Answer>& answers,
    double scale) {
  const auto slots = Slots(inst);
  if (answers.size() != slots.size()) {
    throw IntegrityError("expected " + std::to_string(slots.size()) +
                         " answer label(s), got " +
                         std::to_string(answers.size()));
  }
  Encoder::Trace trace;
  const Matrix hidden = encoder().Forward(inst.tokens, &trace);
  Matrix d_hidden = Matrix::Zero(hidden.rows(), hidden.cols());
  std::vector<double> nll;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const MaskSlot& slot = slots[k];
    const int target = ResolveAnswer(answers[k], slot, inst);
    MlmHead& h = head(slot.head);
    MlmHead::Cache cache;
    const Matrix logits = h.Forward(hidden.row(slot.position), &cache);
    const RowVector probs = RestrictedSoftmax(logits.row(0), *slot.candidates);
    nll.push_back(-std::log(std::max(probs(target), 1e-300)));
    Matrix d_logits = probs;
    d_logits(0, target) -= 1.0;
    d_logits *= scale;
    d_hidden.row(slot.position) += h.Backward(cache, d_logits).row(0);
  }
  encoder().Backward(trace, d_hidden);
  return nll;
}

std::vector<Parameter*> DaPromptModel::EncoderParameters() {
  std::vector<Parameter*> params;
  backbone_.encoder.Collect(params);
  return params;
}

std::vector<Parameter*> DaPromptModel::HeadParameters(int index) {
  std::vector<Parameter*> params;
  head(index).Collect(params);
  return params;
}

std::vector<Parameter*> DaPromptModel::Parameters() {
  std::vector<Parameter*> params = EncoderParameters();
  head1_->Collect(params);
  if (!HeadsAliased()) head2_->Collect(params);
  return params;
}

void DaPromptModel::ZeroGrad() {
  for (Parameter* p : Parameters()) p->ZeroGrad();
}

double DaPromptModel::EncoderSquaredNorm() {
  double total = 0.0;
  for (Parameter* p : EncoderParameters()) total += p->SquaredNorm();
  return total;
}

double DaPromptModel::HeadSquaredNorm(int index) {
  double total = 0.0;
  for (Parameter* p : HeadParameters(index)) total += p->SquaredNorm();
  return total;
}

void DaPromptModel::FreezeBackbone(bool freeze) {
  for (Parameter* p : EncoderParameters()) {
    p->trainable = !freeze;
    p->first_trainable_row = 0;
  }
  Parameter& emb = backbone_.encoder.token_embedding();
  emb.trainable = true;
  emb.first_trainable_row = freeze ? vocab_.base_size : 0;
}

void DaPromptModel::SaveWeights(const std::filesystem::path& dir,
                                const std::string& file,
                                bool with_optimizer_state) {
  std::filesystem::create_directories(dir);
  const EncoderShape& s = backbone_.encoder.shape();
  const nlohmann::json j = {{"backbone_name", backbone_.name},
                            {"variant", VariantToJson(variant_)},
                            {"seed", seed_},
                            {"dim", s.dim},
                            {"layers", s.layers},
                            {"heads", s.heads},
                            {"ff_dim", s.ff_dim},
                            {"max_len", s.max_len},
                            {"vocab_size", s.vocab_size},
                            {"init_stddev", backbone_.init_stddev}};
  WriteTextFile(dir / kModelFile, j.dump(2) + "\n");
  tokenizer().Save(dir / "vocab.txt");
  SaveParameters(dir / file, Parameters(), with_optimizer_state);
}

DaPromptModel DaPromptModel::Load(const std::filesystem::path& dir,
                                  const std::string& file) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadTextFile(dir / kModelFile));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, (dir / kModelFile).string() + ": " + e.what());
  }
  EncoderShape shape;
  shape.dim = j.at("dim");
  shape.layers = j.at("layers");
  shape.heads = j.at("heads");
  shape.ff_dim = j.at("ff_dim");
  shape.max_len = j.at("max_len");
  shape.vocab_size = j.at("vocab_size");
  Tokenizer tok = Tokenizer::Load(dir / "vocab.txt");
  if (tok.Size() != shape.vocab_size) {
    throw ParseError(0, "vocabulary size mismatch in " + dir.string());
  }
  DaPromptModel model;
  model.seed_ = j.at("seed").get<std::uint64_t>();
  model.variant_ = VariantFromJson(j.at("variant"));
  model.backbone_ = Backbone(j.at("backbone_name").get<std::string>(),
                             std::move(tok), shape, j.value("init_stddev", 0.02));
  model.vocab_ = DescribeVocabulary(model.backbone_.tokenizer);
  model.head1_ = std::make_shared<MlmHead>("head1", shape.dim, shape.vocab_size);
  model.head2_ = model.variant_.shared_head
                     ? model.head1_
                     : std::make_shared<MlmHead>("head2", shape.dim,
                                                 shape.vocab_size);
  model.BuildCandidateSets();
  LoadParameters(dir / file, model.Parameters());
  return model;
}

ParameterSnapshot::ParameterSnapshot(const std::vector<Parameter*>& params) {
  for (const Parameter* p : params) values_.push_back(p->value);
}

void ParameterSnapshot::Restore(const std::vector<Parameter*>& params) const {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values_[i];
}

}  // namespace daprompt
