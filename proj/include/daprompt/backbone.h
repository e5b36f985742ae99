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

#ifndef DAPROMPT_BACKBONE_H_
#define DAPROMPT_BACKBONE_H_

// A masked-language-model backbone: vocabulary, transformer encoder and the
// pre-trained MLM head. Backbones are identified by a name that resolves to
// either a saved backbone directory or a built-in architecture preset.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "daprompt/corpus.h"
#include "daprompt/nn.h"
#include "daprompt/tokenizer.h"

namespace daprompt {

// Answer words of the conventional cloze baseline.
inline constexpr const char* kCauseAnswerWord = "cause";
inline constexpr const char* kNoneAnswerWord = "none";

class Backbone {
 public:
  Backbone() = default;
  Backbone(std::string name, Tokenizer tokenizer, const EncoderShape& shape,
           double init_stddev);

  std::vector<Parameter*> Parameters();

  // Writes backbone.json, vocab.txt and weights.bin into `dir`.
  void Save(const std::filesystem::path& dir);
  static Backbone Load(const std::filesystem::path& dir);

  int max_len() const { return encoder.shape().max_len; }

  std::string name;
  Tokenizer tokenizer;
  Encoder encoder;
  MlmHead mlm_head;
  double init_stddev = 0.02;
};

// Architecture presets: "tiny-mlm", "small-mlm", "base-mlm", or an explicit
// "mlm-d<dim>-l<layers>-h<heads>-f<ff>[-n<max_len>]".
std::optional<EncoderShape> PresetShape(const std::string& name);

// Words every backbone vocabulary must contain as whole entries.
std::vector<std::string> ReservedWords();

std::vector<std::vector<std::string>> CorpusText(const Corpus& corpus);

// Fresh preset backbone with a vocabulary built from `text`. The MLM output
// rows start as a copy of the input embeddings and are untied from then on.
Backbone CreateBackbone(const std::string& name,
                        const std::vector<std::vector<std::string>>& text,
                        std::uint64_t seed);

struct PretrainOptions {
  int steps = 0;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double mask_probability = 0.15;
  std::uint64_t seed = 1;
};

// Masked-token pre-training on raw sentences; returns the per-step loss.
std::vector<double> PretrainMlm(Backbone& backbone,
                                const std::vector<std::vector<std::string>>& text,
                                const PretrainOptions& options);

// Looks for a saved backbone at `name` (as a path) and then under
// $DAPROMPT_CACHE/<name>; otherwise builds the preset from `corpus` text and
// pre-trains it. Throws ConfigError for an empty or unknown name.
Backbone ResolveBackbone(const std::string& name, const Corpus& corpus,
                         std::uint64_t seed, const PretrainOptions& pretrain);

}  // namespace daprompt

#endif  // DAPROMPT_BACKBONE_H_
