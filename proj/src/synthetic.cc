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

#include "daprompt/synthetic.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "daprompt/errors.h"

namespace daprompt {

namespace {

enum class SentenceKind { kCausalPair, kPlainPair, kTrigger, kResult, kNeutral };

std::vector<std::string> BuildLexicon(int size, std::mt19937_64& gen) {
  static const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                                  "p", "r", "s", "t", "v", "z", "br", "kr",
                                  "st", "tr"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  std::set<std::string> seen;
  std::vector<std::string> words;
  while (static_cast<int>(words.size()) < size) {
    std::string w;
    const int syllables = 2 + static_cast<int>(gen() % 2);
    for (int s = 0; s < syllables; ++s) {
      w += kOnsets[gen() % std::size(kOnsets)];
      w += kVowels[gen() % std::size(kVowels)];
    }
    if (seen.insert(w).second) words.push_back(w);
  }
  return words;
}

class Builder {
 public:
  Builder(const SyntheticOptions& options, std::mt19937_64& gen)
      : gen_(gen), lexicon_(BuildLexicon(options.event_lexicon_size, gen)) {
    std::vector<double> weights;
    for (int r = 1; r <= options.event_lexicon_size; ++r) {
      weights.push_back(1.0 / std::pow(r, options.zipf_exponent));
    }
    zipf_ = std::discrete_distribution<int>(weights.begin(), weights.end());
  }

  Document Build(const std::string& doc_id, const std::string& topic_id,
                 int num_sentences) {
    doc_ = Document{};
    doc_.doc_id = doc_id;
    doc_.topic_id = topic_id;
    kinds_.clear();
    std::vector<SentenceKind> kinds;
    for (int i = 0; i < num_sentences; ++i) kinds.push_back(DrawKind());
    // Triggers tend to precede results so that cross links occur often.
    auto rank = [](SentenceKind k) {
      return k == SentenceKind::kTrigger ? 0 : k == SentenceKind::kResult ? 2 : 1;
    };
    std::stable_sort(kinds.begin(), kinds.end(),
                     [&](SentenceKind a, SentenceKind b) {
                       return rank(a) < rank(b);
                     });
    if (Coin(0.25)) std::shuffle(kinds.begin(), kinds.end(), gen_);
    for (SentenceKind kind : kinds) AddSentence(kind);
    LinkCrossSentence();
    return doc_;
  }

 private:
  bool Coin(double p) { return std::uniform_real_distribution<>(0, 1)(gen_) < p; }

  template <std::size_t N>
  const char* Pick(const char* const (&options)[N]) {
    return options[gen_() % N];
  }

  SentenceKind DrawKind() {
    static const std::discrete_distribution<int>::param_type kWeights(
        {0.30, 0.12, 0.26, 0.22, 0.10});
    std::discrete_distribution<int> dist(kWeights);
    return static_cast<SentenceKind>(dist(gen_));
  }

  std::string EventWord() { return lexicon_[zipf_(gen_)]; }

  void Append(std::vector<std::string>& words, const std::string& text) {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find(' ', start);
      if (end == std::string::npos) end = text.size();
      if (end > start) words.push_back(text.substr(start, end - start));
      start = end + 1;
    }
  }

  std::string AddMention(std::vector<std::string>& words, int sentence) {
    EventMention m;
    m.mention_id = "m" + std::to_string(doc_.mentions.size());
    m.sentence_index = sentence;
    m.start = static_cast<int>(words.size());
    words.push_back(EventWord());
    m.end = static_cast<int>(words.size());
    m.surface.assign(words.begin() + m.start, words.end());
    doc_.mentions.push_back(m);
    return m.mention_id;
  }

  void MaybeAdjective(std::vector<std::string>& words) {
    static const char* const kAdjectives[] = {"sudden", "major", "minor",
                                              "local", "severe", "large",
                                              "brief", "reported"};
    if (Coin(0.4)) words.push_back(Pick(kAdjectives));
  }

  void MaybePlace(std::vector<std::string>& words) {
    static const char* const kPlaces[] = {
        "in the city",  "near the coast", "downtown",      "on monday",
        "at the plant", "in the north",   "across the region", "overnight"};
    if (Coin(0.6)) Append(words, Pick(kPlaces));
  }

  void AddSentence(SentenceKind kind) {
    const int index = static_cast<int>(doc_.sentences.size());
    std::vector<std::string> words;
    switch (kind) {
      case SentenceKind::kCausalPair: {
        static const char* const kCues[] = {"caused", "triggered", "led to",
                                            "resulted in"};
        Append(words, "the");
        MaybeAdjective(words);
        const std::string a = AddMention(words, index);
        Append(words, Pick(kCues));
        Append(words, "the");
        const std::string b = AddMention(words, index);
        MaybePlace(words);
        doc_.causal_links.emplace_back(a, b);
        break;
      }
      case SentenceKind::kPlainPair: {
        static const char* const kJoins[] = {"and", "while", "as well as",
                                             "before"};
        Append(words, "the");
        MaybeAdjective(words);
        AddMention(words, index);
        Append(words, Pick(kJoins));
        Append(words, "the");
        AddMention(words, index);
        Append(words, "were reported");
        MaybePlace(words);
        break;
      }
      case SentenceKind::kTrigger: {
        static const char* const kCues[] = {"initially", "first"};
        Append(words, Pick(kCues));
        Append(words, ", the");
        MaybeAdjective(words);
        AddMention(words, index);
        Append(words, "struck");
        MaybePlace(words);
        break;
      }
      case SentenceKind::kResult: {
        static const char* const kCues[] = {"consequently", "as a result"};
        Append(words, Pick(kCues));
        Append(words, ", the");
        MaybeAdjective(words);
        AddMention(words, index);
        Append(words, "followed");
        MaybePlace(words);
        break;
      }
      case SentenceKind::kNeutral: {
        static const char* const kCues[] = {"meanwhile", "separately"};
        Append(words, Pick(kCues));
        Append(words, ", the");
        MaybeAdjective(words);
        AddMention(words, index);
        Append(words, "was announced");
        MaybePlace(words);
        break;
      }
    }
    words.push_back(".");
    doc_.sentences.push_back({index, std::move(words)});
    kinds_.push_back(kind);
  }

  void LinkCrossSentence() {
    for (const auto& cause : doc_.mentions) {
      if (kinds_[cause.sentence_index] != SentenceKind::kTrigger) continue;
      for (const auto& effect : doc_.mentions) {
        if (effect.sentence_index > cause.sentence_index &&
            kinds_[effect.sentence_index] == SentenceKind::kResult) {
          doc_.causal_links.emplace_back(cause.mention_id, effect.mention_id);
        }
      }
    }
  }

  std::mt19937_64& gen_;
  std::vector<std::string> lexicon_;
  std::discrete_distribution<int> zipf_;
  Document doc_;
  std::vector<SentenceKind> kinds_;
};

}  // namespace

Corpus GenerateSyntheticCorpus(const SyntheticOptions& options) {
  if (options.num_documents <= 0 || options.num_topics <= 0 ||
      options.min_sentences < 2 || options.max_sentences < options.min_sentences ||
      options.event_lexicon_size <= 0) {
    throw ConfigError("invalid synthetic corpus options");
  }
  std::mt19937_64 gen(options.seed);
  Builder builder(options, gen);
  Corpus corpus;
  corpus.name = "synthetic";
  for (int t = 0; t < options.num_topics; ++t) {
    char id[16];
    std::snprintf(id, sizeof(id), "t%02d", t);
    corpus.topics.push_back({id, {}});
  }
  std::uniform_int_distribution<int> sentences(options.min_sentences,
                                               options.max_sentences);
  for (int d = 0; d < options.num_documents; ++d) {
    auto& topic = corpus.topics[d % options.num_topics];
    char id[16];
    std::snprintf(id, sizeof(id), "d%04d", d);
    topic.documents.push_back(builder.Build(id, topic.topic_id, sentences(gen)));
  }
  ValidateCorpus(corpus);
  return corpus;
}

}  // namespace daprompt
