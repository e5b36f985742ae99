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

#ifndef DAPROMPT_MODEL_H_
#define DAPROMPT_MODEL_H_

// The prompt model: a backbone whose vocabulary is extended with the virtual
// tokens <E1> </E1> <E2> </E2> <None>, plus two MLM heads that score the two
// mask positions of the assumption template.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "daprompt/backbone.h"
#include "daprompt/templating.h"

namespace daprompt {

// Ablation switches. At most one of single_mask, event_token_answers and
// conventional_prompt may be set; shared_head combines with any of them.
struct VariantConfig {
  bool single_mask = false;
  bool shared_head = false;
  bool event_token_answers = false;
  bool conventional_prompt = false;
  // Event-token answers: average over all sub-tokens instead of the first.
  bool et_mean_subtokens = false;

  void Validate() const;
  TemplateKind Template() const;
  // "full", "sim", "shm", "et" or "prompt" (combinations joined with '+').
  std::string Name() const;
  static VariantConfig FromName(const std::string& name);

  bool operator==(const VariantConfig&) const = default;
};

nlohmann::json VariantToJson(const VariantConfig& v);
VariantConfig VariantFromJson(const nlohmann::json& j);

struct EnrichedVocabulary {
  int base_size = 0;
  int size = 0;
  int e1_open = -1;
  int e1_close = -1;
  int e2_open = -1;
  int e2_close = -1;
  int none = -1;
  // Membership masks over the enriched id space: V + {<E1>, <None>} and
  // V + {<E2>, <None>}.
  std::vector<bool> candidate_set_1;
  std::vector<bool> candidate_set_2;

  std::vector<int> VirtualIds() const {
    return {e1_open, e1_close, e2_open, e2_close, none};
  }
};

// Appends the five virtual tokens to the tokenizer, the input embedding table
// and the backbone's MLM output layer. VET rows are drawn from
// N(0, init_stddev); <None> rows (input and output) are the mean of the base
// rows and its output bias the mean base bias. Throws ConfigError on a name
// collision.
EnrichedVocabulary ExtendVocabulary(Backbone& backbone, std::uint64_t seed);

// Rebuilds the id bookkeeping for a tokenizer that already holds the virtual
// tokens (e.g. after loading a checkpoint).
EnrichedVocabulary DescribeVocabulary(const Tokenizer& tokenizer);

// Per-mask output. Distributions span the enriched id space with exact zeros
// outside the scored candidate set.
struct MaskPrediction {
  std::optional<RowVector> dist1;
  std::optional<RowVector> dist2;
  std::optional<double> p1;
  std::optional<double> p2;
};

// What a mask is trained to predict.
enum class Answer { kE1, kE2, kNone, kEventSurface, kCauseWord, kNoneWord };

struct MaskSlot {
  int position = -1;
  int head = 0;  // 0 -> head 1, 1 -> head 2
  const std::vector<bool>* candidates = nullptr;
  // Which event's surface an event-token answer reads.
  int event = 1;
};

class DaPromptModel {
 public:
  // Extends the backbone vocabulary and copies its MLM head into both heads
  // (one aliased head when `variant.shared_head`).
  static DaPromptModel Create(Backbone backbone, const VariantConfig& variant,
                              std::uint64_t seed);

  DaPromptModel(DaPromptModel&&) = default;
  DaPromptModel& operator=(DaPromptModel&&) = default;
  DaPromptModel(const DaPromptModel&) = delete;
  DaPromptModel& operator=(const DaPromptModel&) = delete;

  PromptInstance BuildInstance(const Document& doc, const EventPair& pair) const;

  // Mask slots of an instance under the configured variant. Throws
  // IntegrityError when a required mask position is missing or out of range.
  std::vector<MaskSlot> Slots(const PromptInstance& instance) const;

  // Candidate-restricted distributions and the answer probabilities used by
  // the decision rule:
  //  full / ShM: p1 = P(<E1>) at mask 1, p2 = P(<E2>) at mask 2.
  //  SiM:        p2 = P(<E2>) at the only mask; dist1/p1 absent.
  //  ET:         p1/p2 = probability of each event's first sub-token.
  //  Prompt:     dist1 over {cause, none}; p1 = P(cause), p2 = P(none).
  MaskPrediction Predict(const PromptInstance& instance) const;

  // Token id an answer symbol resolves to for a given slot.
  int ResolveAnswer(Answer answer, const MaskSlot& slot,
                    const PromptInstance& instance) const;

  // Adds scale * d(-log P(answer_k))/d(theta) for every slot k into the
  // parameter gradients and returns the per-slot negative log-likelihoods.
  std::vector<double> AccumulateGradients(const PromptInstance& instance,
                                          const std::vector<Answer>& answers,
                                          double scale);

  // Distinct parameters (an aliased head is listed once).
  std::vector<Parameter*> Parameters();
  std::vector<Parameter*> HeadParameters(int head);
  std::vector<Parameter*> EncoderParameters();
  void ZeroGrad();
  // Squared L2 norms for reporting regularization terms.
  double EncoderSquaredNorm();
  double HeadSquaredNorm(int head);

  // Freezes encoder weights except the virtual-token embedding rows.
  void FreezeBackbone(bool freeze);

  bool HeadsAliased() const { return head1_ == head2_; }
  const MlmHead& head(int index) const { return index == 0 ? *head1_ : *head2_; }
  MlmHead& head(int index) { return index == 0 ? *head1_ : *head2_; }

  const VariantConfig& variant() const { return variant_; }
  const EnrichedVocabulary& vocabulary() const { return vocab_; }
  const Tokenizer& tokenizer() const { return backbone_.tokenizer; }
  const Encoder& encoder() const { return backbone_.encoder; }
  Encoder& encoder() { return backbone_.encoder; }
  const std::string& backbone_name() const { return backbone_.name; }
  std::uint64_t seed() const { return seed_; }
  int max_len() const { return backbone_.max_len(); }

  // Checkpoint files: manifest is written by the caller; this writes
  // vocab.txt, model.json and the parameter file.
  void SaveWeights(const std::filesystem::path& dir,
                   const std::string& file = "weights.bin",
                   bool with_optimizer_state = false);
  static DaPromptModel Load(const std::filesystem::path& dir,
                            const std::string& file = "weights.bin");

 private:
  DaPromptModel() = default;
  void BuildCandidateSets();

  Backbone backbone_;
  VariantConfig variant_;
  EnrichedVocabulary vocab_;
  std::shared_ptr<MlmHead> head1_;
  std::shared_ptr<MlmHead> head2_;
  std::uint64_t seed_ = 0;
  std::vector<bool> event_candidates_;   // V + {<None>}
  std::vector<bool> answer_candidates_;  // {cause, none}
  int cause_id_ = -1;
  int none_word_id_ = -1;
};

// Frozen copy of parameter values, e.g. for keeping the best epoch.
class ParameterSnapshot {
 public:
  explicit ParameterSnapshot(const std::vector<Parameter*>& params);
  void Restore(const std::vector<Parameter*>& params) const;

 private:
  std::vector<Matrix> values_;
};

}  // namespace daprompt

#endif  // DAPROMPT_MODEL_H_
