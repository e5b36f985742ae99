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

#include "daprompt/backbone.h"

#include <cmath>
#include <cstdlib>
#include <random>
#include <regex>

#include "json.hpp"
#include "daprompt/errors.h"
#include "daprompt/optimizer.h"
#include "daprompt/serialization.h"

namespace daprompt {

namespace {

constexpr const char* kBackboneFile = "backbone.json";

std::vector<Parameter*> CollectBackbone(Encoder& encoder, MlmHead& head) {
  std::vector<Parameter*> params;
  encoder.Collect(params);
  head.Collect(params);
  return params;
}

}  // namespace

Backbone::Backbone(std::string name_in, Tokenizer tokenizer_in,
                   const EncoderShape& shape, double stddev)
    : name(std::move(name_in)),
      tokenizer(std::move(tokenizer_in)),
      encoder(shape),
      mlm_head("mlm", shape.dim, shape.vocab_size),
      init_stddev(stddev) {}

std::vector<Parameter*> Backbone::Parameters() {
  return CollectBackbone(encoder, mlm_head);
}

void Backbone::Save(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const EncoderShape& s = encoder.shape();
  nlohmann::json j = {{"name", name},
                      {"dim", s.dim},
                      {"layers", s.layers},
                      {"heads", s.heads},
                      {"ff_dim", s.ff_dim},
                      {"max_len", s.max_len},
                      {"vocab_size", s.vocab_size},
                      {"init_stddev", init_stddev}};
  WriteTextFile(dir / kBackboneFile, j.dump(2) + "\n");
  tokenizer.Save(dir / "vocab.txt");
  SaveParameters(dir / "weights.bin", Parameters(), false);
}

Backbone Backbone::Load(const std::filesystem::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadTextFile(dir / kBackboneFile));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, (dir / kBackboneFile).string() + ": " + e.what());
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
  Backbone b(j.at("name").get<std::string>(), std::move(tok), shape,
             j.value("init_stddev", 0.02));
  LoadParameters(dir / "weights.bin", b.Parameters());
  return b;
}

std::optional<EncoderShape> PresetShape(const std::string& name) {
  EncoderShape s;
  if (name == "tiny-mlm") {
    s.dim = 32, s.layers = 2, s.heads = 2, s.ff_dim = 64, s.max_len = 96;
    return s;
  }
  if (name == "small-mlm") {
    s.dim = 64, s.layers = 2, s.heads = 4, s.ff_dim = 128, s.max_len = 128;
    return s;
  }
  if (name == "base-mlm") {
    s.dim = 128, s.layers = 4, s.heads = 4, s.ff_dim = 512, s.max_len = 256;
    return s;
  }
  static const std::regex kExplicit(R"(mlm-d(\d+)-l(\d+)-h(\d+)-f(\d+)(?:-n(\d+))?)");
  std::smatch m;
  if (std::regex_match(name, m, kExplicit)) {
    s.dim = std::stoi(m[1]);
    s.layers = std::stoi(m[2]);
    s.heads = std::stoi(m[3]);
    s.ff_dim = std::stoi(m[4]);
    s.max_len = m[5].matched ? std::stoi(m[5]) : 128;
    if (s.dim <= 0 || s.heads <= 0 || s.dim % s.heads != 0 || s.layers < 0 ||
        s.ff_dim <= 0 || s.max_len < 16) {
      throw ConfigError("invalid backbone architecture '" + name + "'");
    }
    return s;
  }
  return std::nullopt;
}

std::vector<std::string> ReservedWords() {
  return {"There", "is", "a", "causal", "relation", "between", "and",
          kCauseAnswerWord, kNoneAnswerWord};
}

std::vector<std::vector<std::string>> CorpusText(const Corpus& corpus) {
  std::vector<std::vector<std::string>> text;
  for (const Document* doc : corpus.Documents()) {
    for (const auto& s : doc->sentences) text.push_back(s.words);
  }
  return text;
}

Backbone CreateBackbone(const std::string& name,
                        const std::vector<std::vector<std::string>>& text,
                        std::uint64_t seed) {
  auto shape = PresetShape(name);
  if (!shape) throw ConfigError("unknown backbone '" + name + "'");
  Tokenizer::BuildOptions options;
  options.reserved_words = ReservedWords();
  Tokenizer tok = Tokenizer::Build(text, options);
  shape->vocab_size = tok.Size();
  Backbone b(name, std::move(tok), *shape, 0.02);
  std::mt19937_64 gen(seed);
  b.encoder.Init(gen, b.init_stddev);
  b.mlm_head.Init(gen, b.init_stddev);
  b.mlm_head.decoder().value = b.encoder.token_embedding().value;
  return b;
}

std::vector<double> PretrainMlm(Backbone& backbone,
                                const std::vector<std::vector<std::string>>& text,
                                const PretrainOptions& options) {
  std::vector<double> losses;
  if (options.steps <= 0 || text.empty()) return losses;
  AdamW::Options opt;
  opt.learning_rate = options.learning_rate;
  AdamW optimizer(opt);
  const auto params = backbone.Parameters();
  std::mt19937_64 gen(options.seed);
  const int base = backbone.tokenizer.BaseSize();
  std::vector<bool> allowed(backbone.tokenizer.Size(), false);
  for (int i = 5; i < base; ++i) allowed[i] = true;

  for (int step = 0; step < options.steps; ++step) {
    for (Parameter* p : params) p->ZeroGrad();
    double loss = 0.0;
    int scored = 0;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> batch;
    for (int b = 0; b < options.batch_size; ++b) {
      std::vector<int> ids = {Tokenizer::kClsId};
      const auto& sentence = text[gen() % text.size()];
      for (int id : backbone.tokenizer.Tokenize(sentence)) ids.push_back(id);
      if (static_cast<int>(ids.size()) > backbone.max_len() - 1) {
        ids.resize(backbone.max_len() - 1);
      }
      ids.push_back(Tokenizer::kSepId);
      std::vector<int> positions;
      for (int i = 1; i + 1 < static_cast<int>(ids.size()); ++i) {
        if (std::uniform_real_distribution<>(0, 1)(gen) < options.mask_probability) {
          positions.push_back(i);
        }
      }
      if (positions.empty() && ids.size() > 2) {
        positions.push_back(1 + static_cast<int>(gen() % (ids.size() - 2)));
      }
      batch.emplace_back(std::move(ids), std::move(positions));
      scored += static_cast<int>(batch.back().second.size());
    }
    for (auto& [ids, positions] : batch) {
      std::vector<int> input = ids;
      for (int pos : positions) input[pos] = Tokenizer::kMaskId;
      Encoder::Trace trace;
      const Matrix hidden = backbone.encoder.Forward(input, &trace);
      Matrix rows(positions.size(), hidden.cols());
      for (std::size_t r = 0; r < positions.size(); ++r) {
        rows.row(r) = hidden.row(positions[r]);
      }
      MlmHead::Cache cache;
      const Matrix logits = backbone.mlm_head.Forward(rows, &cache);
      Matrix d_logits = Matrix::Zero(logits.rows(), logits.cols());
      for (std::size_t r = 0; r < positions.size(); ++r) {
        const RowVector probs = RestrictedSoftmax(logits.row(r), allowed);
        const int target = ids[positions[r]];
        loss -= std::log(std::max(probs(target), 1e-300));
        d_logits.row(r) = probs;
        d_logits(r, target) -= 1.0;
      }
      d_logits /= static_cast<double>(scored);
      const Matrix d_rows = backbone.mlm_head.Backward(cache, d_logits);
      Matrix d_hidden = Matrix::Zero(hidden.rows(), hidden.cols());
      for (std::size_t r = 0; r < positions.size(); ++r) {
        d_hidden.row(positions[r]) += d_rows.row(r);
      }
      backbone.encoder.Backward(trace, d_hidden);
    }
    optimizer.Step(params);
    losses.push_back(loss / scored);
  }
  for (Parameter* p : params) {
    p->adam_m.setZero();
    p->adam_v.setZero();
  }
  return losses;
}

Backbone ResolveBackbone(const std::string& name, const Corpus& corpus,
                         std::uint64_t seed, const PretrainOptions& pretrain) {
  if (name.empty()) throw ConfigError("backbone_name is required");
  const std::filesystem::path direct(name);
  if (std::filesystem::exists(direct / kBackboneFile)) {
    return Backbone::Load(direct);
  }
  if (const char* cache = std::getenv("DAPROMPT_CACHE"); cache && *cache) {
    const std::filesystem::path cached = std::filesystem::path(cache) / name;
    if (std::filesystem::exists(cached / kBackboneFile)) {
      return Backbone::Load(cached);
    }
  }
  if (!PresetShape(name)) {
    throw ConfigError("unknown backbone '" + name +
                      "': not a saved backbone directory, not found under "
                      "$DAPROMPT_CACHE, and not a built-in preset");
  }
  const auto text = CorpusText(corpus);
  Backbone b = CreateBackbone(name, text, seed);
  PretrainMlm(b, text, pretrain);
  return b;
}

}  // namespace daprompt
