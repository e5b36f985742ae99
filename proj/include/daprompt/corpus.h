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

#ifndef DAPROMPT_CORPUS_H_
#define DAPROMPT_CORPUS_H_

// Event-causality corpora: documents with annotated event mentions and
// unordered causal links, candidate pair enumeration, cross-validation fold
// planning and negative sampling.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace daprompt {

inline constexpr const char* kCorpusSchemaVersion = "1";

struct Sentence {
  int index = 0;
  std::vector<std::string> words;
};

struct EventMention {
  std::string mention_id;
  int sentence_index = 0;
  // Half-open word interval [start, end) within the sentence.
  int start = 0;
  int end = 0;
  std::vector<std::string> surface;
};

struct Document {
  std::string doc_id;
  std::string topic_id;
  std::vector<Sentence> sentences;
  std::vector<EventMention> mentions;
  std::vector<std::pair<std::string, std::string>> causal_links;

  // Returns nullptr when absent.
  const EventMention* FindMention(const std::string& mention_id) const;
  const EventMention& Mention(const std::string& mention_id) const;
};

struct Topic {
  std::string topic_id;
  std::vector<Document> documents;
};

struct Corpus {
  std::string name;
  std::vector<Topic> topics;
  std::string schema_version = kCorpusSchemaVersion;

  std::size_t NumDocuments() const;
  std::vector<const Document*> Documents() const;
  const Document* FindDocument(const std::string& doc_id) const;
};

enum class PairLabel { kCausal, kNone };
enum class Scope { kIntra, kCross };
enum class ScopeFilter { kIntra, kCross, kAll };

const char* ToString(PairLabel label);
const char* ToString(Scope scope);
const char* ToString(ScopeFilter scope);
ScopeFilter ParseScopeFilter(const std::string& text);

// An unordered candidate pair, canonicalized so that `first` precedes
// `second` in document order.
struct EventPair {
  std::string doc_id;
  std::string first;
  std::string second;
  PairLabel label = PairLabel::kNone;
  Scope scope = Scope::kIntra;

  bool operator==(const EventPair&) const = default;
};

// A unit is a topic id (ESC-style plans) or a document id (CTB-style plans).
struct Fold {
  std::vector<std::string> train_units;
  std::vector<std::string> test_units;
};

enum class FoldUnit { kTopic, kDocument };

struct FoldPlan {
  FoldUnit unit = FoldUnit::kTopic;
  std::vector<std::string> dev_units;
  std::vector<Fold> folds;
};

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t topics = 0;
  std::size_t sentences = 0;
  std::size_t mentions = 0;
  std::size_t pairs_intra = 0;
  std::size_t pairs_cross = 0;
  std::size_t causal_intra = 0;
  std::size_t causal_cross = 0;
  std::size_t distinct_mention_surfaces = 0;
};

// Validation shared by the loader and by in-memory construction (e.g. the
// synthetic generator). Throws IntegrityError.
void ValidateDocument(const Document& doc);
void ValidateCorpus(const Corpus& corpus);

Document DocumentFromJson(const nlohmann::json& j);
nlohmann::json DocumentToJson(const Document& doc);

// Reads one JSON document per line. Blank lines are skipped. Documents are
// grouped into topics in order of first appearance. Throws ParseError with
// the offending line number or IntegrityError.
Corpus LoadCorpus(const std::filesystem::path& path, std::string name = "");
Corpus ParseCorpus(std::istream& in, std::string name);
void WriteCorpus(const Corpus& corpus, const std::filesystem::path& path);

// Mentions sorted by (sentence, start, end, id).
std::vector<const EventMention*> MentionsInDocumentOrder(const Document& doc);

// All unordered mention pairs; Causal iff the pair is linked in either
// direction.
std::vector<EventPair> EnumeratePairs(const Document& doc);
std::vector<EventPair> EnumeratePairs(const Corpus& corpus);
std::vector<EventPair> EnumeratePairs(const Corpus& corpus,
                                      const std::vector<std::string>& units,
                                      FoldUnit unit);

std::vector<EventPair> FilterScope(const std::vector<EventPair>& pairs,
                                   ScopeFilter scope);

// Keeps every Causal pair and each None pair with probability `p`.
// Order-preserving and reproducible for a given seed.
std::vector<EventPair> NegativeSample(const std::vector<EventPair>& pairs,
                                      double p, std::uint64_t seed);
// Positions of the pairs NegativeSample keeps.
std::vector<std::size_t> NegativeSampleIndices(
    const std::vector<EventPair>& pairs, double p, std::uint64_t seed);

// Topic ids sorted lexicographically; the last two form the dev set and the
// rest is split into five contiguous whole-topic folds.
FoldPlan PlanFoldsEsc(const Corpus& corpus, int num_folds = 5);
// Documents are shuffled with `seed` and split into ten folds; no dev set.
FoldPlan PlanFoldsCtb(const Corpus& corpus, std::uint64_t seed,
                      int num_folds = 10);

CorpusStats ComputeStats(const Corpus& corpus);
nlohmann::json StatsToJson(const CorpusStats& stats);

// Distinct space-joined mention surfaces over the corpus.
std::size_t CountDistinctMentionSurfaces(const Corpus& corpus);

}  // namespace daprompt

#endif  // DAPROMPT_CORPUS_H_
