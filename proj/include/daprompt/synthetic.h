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

#ifndef DAPROMPT_SYNTHETIC_H_
#define DAPROMPT_SYNTHETIC_H_

#include <cstdint>

#include "daprompt/corpus.h"

namespace daprompt {

// Generator for a labelled toy corpus whose causal links follow lexical
// regularities:
//  * intra: a sentence "the X caused the Y ..." links its two mentions;
//    sentences joining two events with a neutral connective do not.
//  * cross: a mention in a sentence opened by a trigger cue ("initially")
//    is linked to every later mention in a sentence opened by a result cue
//    ("consequently").
// Event words are drawn from a Zipf-distributed pseudo-word lexicon so that
// many event surfaces are rare.
struct SyntheticOptions {
  int num_documents = 200;
  int num_topics = 12;
  int min_sentences = 3;
  int max_sentences = 5;
  int event_lexicon_size = 400;
  double zipf_exponent = 1.0;
  std::uint64_t seed = 7;
};

Corpus GenerateSyntheticCorpus(const SyntheticOptions& options);

}  // namespace daprompt

#endif  // DAPROMPT_SYNTHETIC_H_
