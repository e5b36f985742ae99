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

#include "daprompt/templating.h"

#include <algorithm>
#include <limits>

#include "daprompt/errors.h"

namespace daprompt {

namespace {

bool IsVetWord(const std::string& w) {
  return w == kE1Open || w == kE1Close || w == kE2Open || w == kE2Close;
}

std::pair<const EventMention*, const EventMention*> OrderedMentions(
    const Document& doc, const EventPair& pair) {
  const EventMention* a = &doc.Mention(pair.first);
  const EventMention* b = &doc.Mention(pair.second);
  if (std::tie(b->sentence_index, b->start, b->end, b->mention_id) <
      std::tie(a->sentence_index, a->start, a->end, a->mention_id)) {
    std::swap(a, b);
  }
  return {a, b};
}

void AppendWrapped(Words& out, const Words& sentence, const EventMention& m,
                   const char* open, const char* close) {
  for (int i = 0; i < static_cast<int>(sentence.size()); ++i) {
    if (i == m.start) out.push_back(open);
    out.push_back(sentence[i]);
    if (i + 1 == m.end) out.push_back(close);
  }
}

}  // namespace

Words BuildEventSentence(const Document& doc, const EventPair& pair) {
  const auto [m1, m2] = OrderedMentions(doc, pair);
  Words out;
  if (m1->sentence_index == m2->sentence_index) {
    if (m1->end > m2->start) {
      throw UnsupportedInputError("mentions " + m1->mention_id + " and " +
                                  m2->mention_id + " overlap in document " +
                                  doc.doc_id);
    }
    const Words& words = doc.sentences[m1->sentence_index].words;
    for (int i = 0; i < static_cast<int>(words.size()); ++i) {
      if (i == m1->start) out.push_back(kE1Open);
      if (i == m2->start) out.push_back(kE2Open);
      out.push_back(words[i]);
      if (i + 1 == m1->end) out.push_back(kE1Close);
      if (i + 1 == m2->end) out.push_back(kE2Close);
    }
    return out;
  }
  AppendWrapped(out, doc.sentences[m1->sentence_index].words, *m1, kE1Open,
                kE1Close);
  AppendWrapped(out, doc.sentences[m2->sentence_index].words, *m2, kE2Open,
                kE2Close);
  return out;
}

Words BuildRawSentences(const Document& doc, const EventPair& pair) {
  const auto [m1, m2] = OrderedMentions(doc, pair);
  Words out = doc.sentences[m1->sentence_index].words;
  if (m2->sentence_index != m1->sentence_index) {
    const Words& second = doc.sentences[m2->sentence_index].words;
    out.insert(out.end(), second.begin(), second.end());
  }
  return out;
}

Words BuildAssumption() {
  return {"There", "is", "a", "causal", "relation", "between",
          kMask1Word, "and", kMask2Word, kSepWord};
}

Words BuildSingleMaskAssumption(const Words& event1_surface) {
  Words out = {"There", "is", "a", "causal", "relation", "between"};
  out.insert(out.end(), event1_surface.begin(), event1_surface.end());
  out.insert(out.end(), {"and", kMask2Word, kSepWord});
  return out;
}

Words BuildConventionalTemplate(const Words& event1_surface,
                                const Words& event2_surface) {
  Words out = event1_surface;
  out.push_back(kMaskWord);
  out.insert(out.end(), event2_surface.begin(), event2_surface.end());
  out.push_back(kSepWord);
  return out;
}

Words RemoveVets(const Words& words) {
  Words out;
  std::copy_if(words.begin(), words.end(), std::back_inserter(out),
               [](const std::string& w) { return !IsVetWord(w); });
  return out;
}

Words Truncate(const Words& t1, int budget,
               const std::function<int(const std::string&)>& cost) {
  auto word_cost = [&](const std::string& w) { return cost ? cost(w) : 1; };
  const int n = static_cast<int>(t1.size());
  std::vector<bool> keep(n, true);
  std::vector<bool> guarded(n, false);
  int depth = 0;
  int total = 0;
  int guarded_total = 0;
  for (int i = 0; i < n; ++i) {
    const std::string& w = t1[i];
    if (w == kE1Open || w == kE2Open) ++depth;
    guarded[i] = depth > 0;
    if (w == kE1Close || w == kE2Close) depth = std::max(0, depth - 1);
    total += word_cost(w);
    if (guarded[i]) guarded_total += word_cost(w);
  }
  if (guarded_total > budget) {
    throw InstanceTooLongError(
        "event sentence cannot fit: VETs and mentions need " +
        std::to_string(guarded_total) + " tokens, budget is " +
        std::to_string(budget));
  }
  std::vector<int> guard_pos;
  for (int i = 0; i < n; ++i) {
    if (guarded[i]) guard_pos.push_back(i);
  }
  auto distance = [&](int i) {
    int best = std::numeric_limits<int>::max();
    for (int g : guard_pos) best = std::min(best, std::abs(g - i));
    return best;
  };
  while (total > budget) {
    int victim = -1;
    int victim_dist = -1;
    for (int i = 0; i < n; ++i) {
      if (!keep[i] || guarded[i]) continue;
      const int d = distance(i);
      if (d > victim_dist) {
        victim = i;
        victim_dist = d;
      }
    }
    keep[victim] = false;
    total -= word_cost(t1[victim]);
  }
  Words out;
  for (int i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(t1[i]);
  }
  return out;
}

PromptInstance Assemble(const Words& t1_in, const Words& t2,
                        const Tokenizer& tokenizer, int max_len) {
  for (const auto& w : t1_in) {
    if (IsVetWord(w)) {
      const int id = tokenizer.Find(w);
      if (id < 0 || !tokenizer.IsVirtual(id)) {
        throw ConfigError("tokenizer lacks virtual token " + w +
                          "; extend the vocabulary first");
      }
    }
  }
  const std::vector<int> t2_tokens = tokenizer.Tokenize(t2);
  auto cost = [&](const std::string& w) {
    return static_cast<int>(tokenizer.TokenizeWord(w).size());
  };
  Words t1 = t1_in;
  int t1_len = 0;
  for (const auto& w : t1) t1_len += cost(w);
  if (2 + t1_len + static_cast<int>(t2_tokens.size()) > max_len) {
    const int budget = max_len - 2 - static_cast<int>(t2_tokens.size());
    if (budget < 0) {
      throw InstanceTooLongError("assumption template alone exceeds max length " +
                                 std::to_string(max_len));
    }
    t1 = Truncate(t1, budget, cost);
  }

  PromptInstance inst;
  inst.tokens.push_back(Tokenizer::kClsId);
  inst.t1_begin = 1;
  for (const auto& w : t1) {
    const auto ids = tokenizer.TokenizeWord(w);
    const int pos = static_cast<int>(inst.tokens.size());
    if (w == kE1Open) inst.vet_positions[0] = pos;
    if (w == kE1Close) inst.vet_positions[1] = pos;
    if (w == kE2Open) inst.vet_positions[2] = pos;
    if (w == kE2Close) inst.vet_positions[3] = pos;
    inst.tokens.insert(inst.tokens.end(), ids.begin(), ids.end());
  }
  inst.t1_end = static_cast<int>(inst.tokens.size());
  inst.tokens.push_back(Tokenizer::kSepId);
  inst.t2_begin = static_cast<int>(inst.tokens.size());
  for (const auto& w : t2) {
    const int pos = static_cast<int>(inst.tokens.size());
    if (w == kMask1Word || w == kMaskWord) inst.mask1_pos = pos;
    if (w == kMask2Word) inst.mask2_pos = pos;
    const auto ids = tokenizer.TokenizeWord(w);
    inst.tokens.insert(inst.tokens.end(), ids.begin(), ids.end());
  }
  return inst;
}

PromptInstance BuildInstance(const Document& doc, const EventPair& pair,
                             TemplateKind kind, const Tokenizer& tokenizer,
                             int max_len) {
  const auto [m1, m2] = OrderedMentions(doc, pair);
  PromptInstance inst;
  switch (kind) {
    case TemplateKind::kAssumption:
      inst = Assemble(BuildEventSentence(doc, pair), BuildAssumption(),
                      tokenizer, max_len);
      break;
    case TemplateKind::kSingleMask:
      inst = Assemble(BuildEventSentence(doc, pair),
                      BuildSingleMaskAssumption(m1->surface), tokenizer,
                      max_len);
      break;
    case TemplateKind::kConventional:
      inst = Assemble(BuildRawSentences(doc, pair),
                      BuildConventionalTemplate(m1->surface, m2->surface),
                      tokenizer, max_len);
      break;
  }
  inst.gold = pair.label;
  inst.scope = pair.scope;
  inst.pair_ref = {doc.doc_id, m1->mention_id, m2->mention_id};
  inst.event1_subtokens = tokenizer.Tokenize(m1->surface);
  inst.event2_subtokens = tokenizer.Tokenize(m2->surface);
  return inst;
}

nlohmann::json InstanceToJson(const PromptInstance& inst) {
  return {{"tokens", inst.tokens},
          {"mask1_pos", inst.mask1_pos},
          {"mask2_pos", inst.mask2_pos},
          {"gold", inst.gold == PairLabel::kCausal ? "Positive" : "Negative"},
          {"scope", ToString(inst.scope)},
          {"pair_ref",
           {{"doc_id", inst.pair_ref.doc_id},
            {"first", inst.pair_ref.first},
            {"second", inst.pair_ref.second}}}};
}

}  // namespace daprompt
