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

#ifndef DAPROMPT_TEMPLATING_H_
#define DAPROMPT_TEMPLATING_H_

// Prompt construction: T = [CLS] T1 [SEP] T2, where T1 is the event sentence
// (raw sentence(s) with the two mentions wrapped in virtual event tokens) and
// T2 is the causal assumption "There is a causal relation between [MASK1] and
// [MASK2] [SEP]".

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "daprompt/corpus.h"
#include "daprompt/tokenizer.h"

namespace daprompt {

inline constexpr const char* kE1Open = "<E1>";
inline constexpr const char* kE1Close = "</E1>";
inline constexpr const char* kE2Open = "<E2>";
inline constexpr const char* kE2Close = "</E2>";
inline constexpr const char* kNoneToken = "<None>";

using Words = std::vector<std::string>;

enum class TemplateKind {
  // Two masks, one per event.
  kAssumption,
  // Event 1 appears as its raw surface; one mask in event 2's slot.
  kSingleMask,
  // Raw sentences without VETs, then "e1 [MASK] e2 [SEP]".
  kConventional,
};

struct PairRef {
  std::string doc_id;
  std::string first;
  std::string second;

  bool operator==(const PairRef&) const = default;
};

struct PromptInstance {
  std::vector<int> tokens;
  int mask1_pos = -1;
  // -1 when the template has a single mask.
  int mask2_pos = -1;
  // Positions of <E1>, </E1>, <E2>, </E2>; -1 when the template has no VETs.
  std::array<int, 4> vet_positions = {-1, -1, -1, -1};
  // Token range of T1 (after [CLS]) and start of T2 (after the middle [SEP]).
  int t1_begin = 1;
  int t1_end = 1;
  int t2_begin = 1;
  PairLabel gold = PairLabel::kNone;
  PairRef pair_ref;
  Scope scope = Scope::kIntra;
  // Sub-token ids of each event's surface, for surface-word answers.
  std::vector<int> event1_subtokens;
  std::vector<int> event2_subtokens;

  int NumMasks() const { return (mask1_pos >= 0) + (mask2_pos >= 0); }
};

// Raw sentence(s) with <E1>..</E1> around the earlier mention and <E2>..</E2>
// around the later one. Cross-sentence pairs concatenate the two sentences in
// document order. Throws UnsupportedInputError for overlapping spans.
Words BuildEventSentence(const Document& doc, const EventPair& pair);
// The raw sentence(s) of the pair without any markers.
Words BuildRawSentences(const Document& doc, const EventPair& pair);

// "There is a causal relation between [MASK1] and [MASK2] [SEP]".
Words BuildAssumption();
// "There is a causal relation between <event-1 words> and [MASK2] [SEP]".
Words BuildSingleMaskAssumption(const Words& event1_surface);
// "<event-1 words> [MASK] <event-2 words> [SEP]".
Words BuildConventionalTemplate(const Words& event1_surface,
                                const Words& event2_surface);

Words RemoveVets(const Words& words);

// Drops context words (never VETs or words inside VET spans), always taking
// the remaining word farthest from any protected word, until the summed
// `cost` fits in `budget`. `cost` defaults to one per word. Throws
// InstanceTooLongError if the protected words alone exceed the budget.
Words Truncate(const Words& t1, int budget,
               const std::function<int(const std::string&)>& cost = {});

// [CLS] tok(t1) [SEP] tok(t2); t1 is truncated to fit `max_len` tokens.
// Requires the virtual event tokens to be registered in `tokenizer` whenever
// t1 uses them.
PromptInstance Assemble(const Words& t1, const Words& t2,
                        const Tokenizer& tokenizer, int max_len);

// Full construction for one candidate pair.
PromptInstance BuildInstance(const Document& doc, const EventPair& pair,
                             TemplateKind kind, const Tokenizer& tokenizer,
                             int max_len);

nlohmann::json InstanceToJson(const PromptInstance& instance);

}  // namespace daprompt

#endif  // DAPROMPT_TEMPLATING_H_
