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

#include "daprompt/corpus.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "daprompt/errors.h"

namespace daprompt {

namespace {

std::pair<std::string, std::string> Unordered(const std::string& a,
                                              const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// 53-bit uniform in [0, 1), independent of the standard library's
// distribution implementations.
double UniformUnit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

void CheckFoldCount(std::size_t units, int num_folds, const char* what) {
  if (num_folds <= 0 || units < static_cast<std::size_t>(num_folds)) {
    throw ConfigError(std::string("not enough ") + what + " for " +
                      std::to_string(num_folds) + " folds (have " +
                      std::to_string(units) + ")");
  }
}

// Contiguous split of `units` into `num_folds` test sets whose sizes differ by
// at most one; the first `units % num_folds` folds get the extra unit.
std::vector<Fold> SplitContiguous(const std::vector<std::string>& units,
                                  int num_folds) {
  std::vector<Fold> folds(num_folds);
  const std::size_t base = units.size() / num_folds;
  const std::size_t extra = units.size() % num_folds;
  std::size_t cursor = 0;
  for (int f = 0; f < num_folds; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    folds[f].test_units.assign(units.begin() + cursor,
                               units.begin() + cursor + size);
    cursor += size;
  }
  for (auto& fold : folds) {
    const std::set<std::string> test(fold.test_units.begin(),
                                     fold.test_units.end());
    for (const auto& u : units) {
      if (!test.count(u)) fold.train_units.push_back(u);
    }
  }
  return folds;
}

}  // namespace

const EventMention* Document::FindMention(const std::string& mention_id) const {
  for (const auto& m : mentions) {
    if (m.mention_id == mention_id) return &m;
  }
  return nullptr;
}

const EventMention& Document::Mention(const std::string& mention_id) const {
  const EventMention* m = FindMention(mention_id);
  if (m == nullptr) {
    throw IntegrityError("document " + doc_id + " has no mention " +
                         mention_id);
  }
  return *m;
}

std::size_t Corpus::NumDocuments() const {
  std::size_t n = 0;
  for (const auto& t : topics) n += t.documents.size();
  return n;
}

std::vector<const Document*> Corpus::Documents() const {
  std::vector<const Document*> out;
  for (const auto& t : topics) {
    for (const auto& d : t.documents) out.push_back(&d);
  }
  return out;
}

const Document* Corpus::FindDocument(const std::string& doc_id) const {
  for (const auto& t : topics) {
    for (const auto& d : t.documents) {
      if (d.doc_id == doc_id) return &d;
    }
  }
  return nullptr;
}

const char* ToString(PairLabel label) {
  return label == PairLabel::kCausal ? "Causal" : "None";
}

const char* ToString(Scope scope) {
  return scope == Scope::kIntra ? "intra" : "cross";
}

const char* ToString(ScopeFilter scope) {
  switch (scope) {
    case ScopeFilter::kIntra:
      return "intra";
    case ScopeFilter::kCross:
      return "cross";
    case ScopeFilter::kAll:
      return "all";
  }
  return "all";
}

ScopeFilter ParseScopeFilter(const std::string& text) {
  if (text == "intra") return ScopeFilter::kIntra;
  if (text == "cross") return ScopeFilter::kCross;
  if (text == "all") return ScopeFilter::kAll;
  throw ConfigError("unknown scope '" + text + "' (expected intra|cross|all)");
}

void ValidateDocument(const Document& doc) {
  const std::string where = "document " + doc.doc_id + ": ";
  if (doc.doc_id.empty()) throw IntegrityError("empty doc_id");
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    if (doc.sentences[i].index != static_cast<int>(i)) {
      throw IntegrityError(where + "sentence indices must be contiguous from 0");
    }
    if (doc.sentences[i].words.empty()) {
      throw IntegrityError(where + "sentence " + std::to_string(i) +
                           " has no words");
    }
  }
  std::unordered_set<std::string> ids;
  for (const auto& m : doc.mentions) {
    if (!ids.insert(m.mention_id).second) {
      throw IntegrityError(where + "duplicate mention id " + m.mention_id);
    }
    if (m.sentence_index < 0 ||
        m.sentence_index >= static_cast<int>(doc.sentences.size())) {
      throw IntegrityError(where + "mention " + m.mention_id +
                           " points at missing sentence " +
                           std::to_string(m.sentence_index));
    }
    const auto& words = doc.sentences[m.sentence_index].words;
    if (m.start < 0 || m.start >= m.end ||
        m.end > static_cast<int>(words.size())) {
      throw IntegrityError(where + "mention " + m.mention_id +
                           " has invalid span [" + std::to_string(m.start) +
                           ", " + std::to_string(m.end) + ")");
    }
    if (!std::equal(m.surface.begin(), m.surface.end(),
                    words.begin() + m.start, words.begin() + m.end) ||
        m.surface.size() != static_cast<std::size_t>(m.end - m.start)) {
      throw IntegrityError(where + "mention " + m.mention_id +
                           " surface does not match its span");
    }
  }
  for (const auto& [a, b] : doc.causal_links) {
    if (!ids.count(a) || !ids.count(b)) {
      throw IntegrityError(where + "causal link (" + a + ", " + b +
                           ") references an unknown mention");
    }
    if (a == b) {
      throw IntegrityError(where + "self causal link on " + a);
    }
  }
}

void ValidateCorpus(const Corpus& corpus) {
  std::unordered_set<std::string> topic_ids;
  std::unordered_set<std::string> doc_ids;
  for (const auto& topic : corpus.topics) {
    if (!topic_ids.insert(topic.topic_id).second) {
      throw IntegrityError("duplicate topic id " + topic.topic_id);
    }
    for (const auto& doc : topic.documents) {
      if (doc.topic_id != topic.topic_id) {
        throw IntegrityError("document " + doc.doc_id +
                             " filed under the wrong topic");
      }
      if (!doc_ids.insert(doc.doc_id).second) {
        throw IntegrityError("duplicate document id " + doc.doc_id);
      }
      ValidateDocument(doc);
    }
  }
}

Document DocumentFromJson(const nlohmann::json& j) {
  Document doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  doc.topic_id = j.at("topic_id").get<std::string>();
  int index = 0;
  for (const auto& s : j.at("sentences")) {
    doc.sentences.push_back({index++, s.get<std::vector<std::string>>()});
  }
  for (const auto& jm : j.at("mentions")) {
    EventMention m;
    m.mention_id = jm.at("mention_id").get<std::string>();
    m.sentence_index = jm.at("sentence_index").get<int>();
    m.start = jm.at("start").get<int>();
    m.end = jm.at("end").get<int>();
    if (m.sentence_index >= 0 &&
        m.sentence_index < static_cast<int>(doc.sentences.size())) {
      const auto& words = doc.sentences[m.sentence_index].words;
      if (m.start >= 0 && m.start < m.end &&
          m.end <= static_cast<int>(words.size())) {
        m.surface.assign(words.begin() + m.start, words.begin() + m.end);
      }
    }
    doc.mentions.push_back(std::move(m));
  }
  for (const auto& link : j.at("causal_links")) {
    if (!link.is_array() || link.size() != 2) {
      throw nlohmann::json::other_error::create(
          501, "causal link must be a two-element array", &link);
    }
    doc.causal_links.emplace_back(link[0].get<std::string>(),
                                  link[1].get<std::string>());
  }
  return doc;
}

nlohmann::json DocumentToJson(const Document& doc) {
  nlohmann::json j;
  j["doc_id"] = doc.doc_id;
  j["topic_id"] = doc.topic_id;
  j["sentences"] = nlohmann::json::array();
  for (const auto& s : doc.sentences) j["sentences"].push_back(s.words);
  j["mentions"] = nlohmann::json::array();
  for (const auto& m : doc.mentions) {
    j["mentions"].push_back({{"mention_id", m.mention_id},
                             {"sentence_index", m.sentence_index},
                             {"start", m.start},
                             {"end", m.end}});
  }
  j["causal_links"] = nlohmann::json::array();
  for (const auto& [a, b] : doc.causal_links) {
    j["causal_links"].push_back({a, b});
  }
  return j;
}

Corpus ParseCorpus(std::istream& in, std::string name) {
  Corpus corpus;
  corpus.name = std::move(name);
  std::unordered_map<std::string, std::size_t> topic_index;
  std::unordered_set<std::string> doc_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Document doc;
    try {
      doc = DocumentFromJson(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    try {
      ValidateDocument(doc);
    } catch (const IntegrityError& e) {
      throw IntegrityError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!doc_ids.insert(doc.doc_id).second) {
      throw IntegrityError("line " + std::to_string(line_no) +
                           ": duplicate document id " + doc.doc_id);
    }
    auto [it, inserted] =
        topic_index.try_emplace(doc.topic_id, corpus.topics.size());
    if (inserted) corpus.topics.push_back({doc.topic_id, {}});
    corpus.topics[it->second].documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus LoadCorpus(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open corpus file " + path.string());
  if (name.empty()) name = path.stem().string();
  return ParseCorpus(in, std::move(name));
}

void WriteCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file " + path.string());
  for (const Document* doc : corpus.Documents()) {
    out << DocumentToJson(*doc).dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<const EventMention*> MentionsInDocumentOrder(const Document& doc) {
  std::vector<const EventMention*> order;
  for (const auto& m : doc.mentions) order.push_back(&m);
  std::sort(order.begin(), order.end(),
            [](const EventMention* a, const EventMention* b) {
              return std::tie(a->sentence_index, a->start, a->end,
                              a->mention_id) <
                     std::tie(b->sentence_index, b->start, b->end,
                              b->mention_id);
            });
  return order;
}

std::vector<EventPair> EnumeratePairs(const Document& doc) {
  std::set<std::pair<std::string, std::string>> links;
  for (const auto& [a, b] : doc.causal_links) links.insert(Unordered(a, b));

  const auto order = MentionsInDocumentOrder(doc);
  std::vector<EventPair> pairs;
  pairs.reserve(order.size() * (order.size() - (order.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      EventPair p;
      p.doc_id = doc.doc_id;
      p.first = order[i]->mention_id;
      p.second = order[j]->mention_id;
      p.label = links.count(Unordered(p.first, p.second)) ? PairLabel::kCausal
                                                          : PairLabel::kNone;
      p.scope = order[i]->sentence_index == order[j]->sentence_index
                    ? Scope::kIntra
                    : Scope::kCross;
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

std::vector<EventPair> EnumeratePairs(const Corpus& corpus) {
  std::vector<EventPair> out;
  for (const Document* doc : corpus.Documents()) {
    auto pairs = EnumeratePairs(*doc);
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  return out;
}

std::vector<EventPair> EnumeratePairs(const Corpus& corpus,
                                      const std::vector<std::string>& units,
                                      FoldUnit unit) {
  const std::unordered_set<std::string> wanted(units.begin(), units.end());
  std::vector<EventPair> out;
  for (const auto& topic : corpus.topics) {
    for (const auto& doc : topic.documents) {
      const std::string& key =
          unit == FoldUnit::kTopic ? topic.topic_id : doc.doc_id;
      if (!wanted.count(key)) continue;
      auto pairs = EnumeratePairs(doc);
      out.insert(out.end(), pairs.begin(), pairs.end());
    }
  }
  return out;
}

std::vector<EventPair> FilterScope(const std::vector<EventPair>& pairs,
                                   ScopeFilter scope) {
  if (scope == ScopeFilter::kAll) return pairs;
  const Scope keep = scope == ScopeFilter::kIntra ? Scope::kIntra : Scope::kCross;
  std::vector<EventPair> out;
  std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out),
               [keep](const EventPair& p) { return p.scope == keep; });
  return out;
}

std::vector<std::size_t> NegativeSampleIndices(
    const std::vector<EventPair>& pairs, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ContractViolation("negative sampling probability must lie in [0, 1]");
  }
  std::mt19937_64 gen(seed);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].label == PairLabel::kCausal || UniformUnit(gen) < p) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<EventPair> NegativeSample(const std::vector<EventPair>& pairs,
                                      double p, std::uint64_t seed) {
  std::vector<EventPair> out;
  for (std::size_t i : NegativeSampleIndices(pairs, p, seed)) {
    out.push_back(pairs[i]);
  }
  return out;
}

FoldPlan PlanFoldsEsc(const Corpus& corpus, int num_folds) {
  std::vector<std::string> topics;
  for (const auto& t : corpus.topics) topics.push_back(t.topic_id);
  std::sort(topics.begin(), topics.end());
  if (topics.size() < static_cast<std::size_t>(num_folds) + 2) {
    throw ConfigError("topic-level plan needs at least " +
                      std::to_string(num_folds + 2) + " topics, corpus has " +
                      std::to_string(topics.size()));
  }
  FoldPlan plan;
  plan.unit = FoldUnit::kTopic;
  plan.dev_units.assign(topics.end() - 2, topics.end());
  topics.resize(topics.size() - 2);
  plan.folds = SplitContiguous(topics, num_folds);
  return plan;
}

FoldPlan PlanFoldsCtb(const Corpus& corpus, std::uint64_t seed, int num_folds) {
  std::vector<std::string> docs;
  for (const Document* d : corpus.Documents()) docs.push_back(d->doc_id);
  CheckFoldCount(docs.size(), num_folds, "documents");
  std::sort(docs.begin(), docs.end());
  std::mt19937_64 gen(seed);
  for (std::size_t i = docs.size(); i > 1; --i) {
    std::swap(docs[i - 1], docs[gen() % i]);
  }
  FoldPlan plan;
  plan.unit = FoldUnit::kDocument;
  plan.folds = SplitContiguous(docs, num_folds);
  return plan;
}

std::size_t CountDistinctMentionSurfaces(const Corpus& corpus) {
  std::unordered_set<std::string> surfaces;
  for (const Document* doc : corpus.Documents()) {
    for (const auto& m : doc->mentions) {
      std::string joined;
      for (const auto& w : m.surface) {
        if (!joined.empty()) joined += ' ';
        joined += w;
      }
      surfaces.insert(joined);
    }
  }
  return surfaces.size();
}

CorpusStats ComputeStats(const Corpus& corpus) {
  CorpusStats s;
  s.topics = corpus.topics.size();
  for (const Document* doc : corpus.Documents()) {
    ++s.documents;
    s.sentences += doc->sentences.size();
    s.mentions += doc->mentions.size();
    for (const auto& p : EnumeratePairs(*doc)) {
      const bool causal = p.label == PairLabel::kCausal;
      if (p.scope == Scope::kIntra) {
        ++s.pairs_intra;
        s.causal_intra += causal;
      } else {
        ++s.pairs_cross;
        s.causal_cross += causal;
      }
    }
  }
  s.distinct_mention_surfaces = CountDistinctMentionSurfaces(corpus);
  return s;
}

nlohmann::json StatsToJson(const CorpusStats& s) {
  return {{"documents", s.documents},
          {"topics", s.topics},
          {"sentences", s.sentences},
          {"mentions", s.mentions},
          {"pairs", {{"intra", s.pairs_intra}, {"cross", s.pairs_cross},
                     {"total", s.pairs_intra + s.pairs_cross}}},
          {"causal", {{"intra", s.causal_intra}, {"cross", s.causal_cross},
                      {"total", s.causal_intra + s.causal_cross}}},
          {"distinct_mention_surfaces", s.distinct_mention_surfaces}};
}

}  // namespace daprompt
