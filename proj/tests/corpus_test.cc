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
#include <cmath>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "daprompt/errors.h"
#include "daprompt/synthetic.h"
#include "test_util.h"

namespace daprompt {
namespace {

using testing_util::MakeCorpus;
using testing_util::MakeDocument;
using testing_util::SmallDocument;

std::string ToJsonl(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& d : docs) out += DocumentToJson(d).dump() + "\n";
  return out;
}

TEST(CorpusTest, ParsesJsonlAndDerivesSurfaces) {
  std::istringstream in(ToJsonl({SmallDocument("d1", "t1"),
                                 SmallDocument("d2", "t2")}));
  const Corpus c = ParseCorpus(in, "mini");
  ASSERT_EQ(c.topics.size(), 2u);
  EXPECT_EQ(c.NumDocuments(), 2u);
  const Document* d = c.FindDocument("d2");
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->Mention("m2").surface, std::vector<std::string>{"flood"});
  EXPECT_EQ(c.FindDocument("missing"), nullptr);
}

TEST(CorpusTest, MalformedLineReportsLineNumber) {
  std::istringstream in(ToJsonl({SmallDocument()}) + "\n{not json\n");
  try {
    ParseCorpus(in, "bad");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(CorpusTest, BrokenLinkIsAnIntegrityError) {
  Document d = SmallDocument();
  d.causal_links.push_back({"m1", "m9"});
  std::istringstream in(ToJsonl({d}));
  EXPECT_THROW(ParseCorpus(in, "bad"), IntegrityError);
}

TEST(CorpusTest, SpanOutsideSentenceIsRejected) {
  Document d = SmallDocument();
  d.mentions[0].end = 40;
  EXPECT_THROW(ValidateDocument(d), IntegrityError);
}

TEST(CorpusTest, DuplicateDocumentIdsAreRejected) {
  std::istringstream in(ToJsonl({SmallDocument("d1"), SmallDocument("d1")}));
  EXPECT_THROW(ParseCorpus(in, "dup"), IntegrityError);
}

TEST(CorpusTest, EnumeratesUnorderedPairsWithScopeAndLabel) {
  const auto pairs = EnumeratePairs(SmallDocument());
  ASSERT_EQ(pairs.size(), 3u);
  std::map<std::pair<std::string, std::string>, EventPair> by_ids;
  for (const auto& p : pairs) by_ids[{p.first, p.second}] = p;
  EXPECT_EQ(by_ids.at({"m1", "m2"}).scope, Scope::kIntra);
  EXPECT_EQ(by_ids.at({"m1", "m2"}).label, PairLabel::kCausal);
  EXPECT_EQ(by_ids.at({"m1", "m3"}).scope, Scope::kCross);
  EXPECT_EQ(by_ids.at({"m1", "m3"}).label, PairLabel::kNone);
  EXPECT_EQ(by_ids.at({"m2", "m3"}).label, PairLabel::kCausal);
  EXPECT_EQ(FilterScope(pairs, ScopeFilter::kCross).size(), 2u);
  EXPECT_EQ(FilterScope(pairs, ScopeFilter::kIntra).size(), 1u);
}

TEST(CorpusTest, LinkDirectionDoesNotMatter) {
  Document d = SmallDocument();
  d.causal_links = {{"m3", "m1"}};
  for (const auto& p : EnumeratePairs(d)) {
    const bool linked = p.first == "m1" && p.second == "m3";
    EXPECT_EQ(p.label == PairLabel::kCausal, linked);
  }
}

TEST(CorpusTest, NegativeSamplingKeepsPositivesAndIsBinomial) {
  std::vector<EventPair> pairs;
  for (int i = 0; i < 10000; ++i) {
    pairs.push_back({"d", "a" + std::to_string(i), "b", PairLabel::kNone,
                     Scope::kCross});
  }
  for (int i = 0; i < 50; ++i) {
    pairs.push_back({"d", "c" + std::to_string(i), "b", PairLabel::kCausal,
                     Scope::kIntra});
  }
  const auto kept = NegativeSample(pairs, 0.2, 1234);
  const auto positives = std::count_if(kept.begin(), kept.end(), [](const auto& p) {
    return p.label == PairLabel::kCausal;
  });
  EXPECT_EQ(positives, 50);
  const double negatives = static_cast<double>(kept.size() - positives);
  // Binomial(10000, 0.2): mean 2000, sigma 40.
  EXPECT_LE(std::abs(negatives - 2000.0), 3.0 * 40.0);
  EXPECT_EQ(kept, NegativeSample(pairs, 0.2, 1234));
  EXPECT_EQ(NegativeSample(pairs, 0.0, 1).size(), 50u);
  EXPECT_EQ(NegativeSample(pairs, 1.0, 1).size(), pairs.size());
  EXPECT_THROW(NegativeSample(pairs, 1.5, 1), ContractViolation);
}

Corpus CorpusWithTopics(int topics, int docs_per_topic) {
  std::vector<Document> docs;
  for (int t = 0; t < topics; ++t) {
    for (int k = 0; k < docs_per_topic; ++k) {
      docs.push_back(SmallDocument("d" + std::to_string(t) + "_" + std::to_string(k),
                                   "topic" + std::to_string(t)));
    }
  }
  return MakeCorpus(docs);
}

TEST(FoldPlanTest, TopicPlanHasTwoDevTopicsAndFiveFoldsOfFour) {
  const Corpus c = CorpusWithTopics(22, 2);
  const FoldPlan plan = PlanFoldsEsc(c);
  std::vector<std::string> sorted;
  for (const auto& t : c.topics) sorted.push_back(t.topic_id);
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(plan.unit, FoldUnit::kTopic);
  EXPECT_EQ(plan.dev_units,
            (std::vector<std::string>{sorted[20], sorted[21]}));
  ASSERT_EQ(plan.folds.size(), 5u);
  std::set<std::string> seen;
  for (const auto& f : plan.folds) {
    EXPECT_EQ(f.test_units.size(), 4u);
    EXPECT_EQ(f.train_units.size(), 16u);
    for (const auto& u : f.test_units) {
      EXPECT_TRUE(seen.insert(u).second) << u << " appears in two test folds";
      EXPECT_EQ(std::count(f.train_units.begin(), f.train_units.end(), u), 0);
    }
  }
  EXPECT_EQ(seen.size(), 20u);
  for (const auto& dev : plan.dev_units) EXPECT_EQ(seen.count(dev), 0u);
}

TEST(FoldPlanTest, TooFewTopicsIsAConfigError) {
  EXPECT_THROW(PlanFoldsEsc(CorpusWithTopics(6, 1)), ConfigError);
}

TEST(FoldPlanTest, DocumentPlanSplits184IntoTenNearEqualFolds) {
  const Corpus c = CorpusWithTopics(1, 184);
  const FoldPlan plan = PlanFoldsCtb(c, 5);
  EXPECT_EQ(plan.unit, FoldUnit::kDocument);
  EXPECT_TRUE(plan.dev_units.empty());
  ASSERT_EQ(plan.folds.size(), 10u);
  std::multiset<std::size_t> sizes;
  std::set<std::string> seen;
  for (const auto& f : plan.folds) {
    sizes.insert(f.test_units.size());
    EXPECT_EQ(f.test_units.size() + f.train_units.size(), 184u);
    for (const auto& u : f.test_units) EXPECT_TRUE(seen.insert(u).second);
  }
  EXPECT_EQ(seen.size(), 184u);
  EXPECT_EQ(sizes.count(19), 4u);
  EXPECT_EQ(sizes.count(18), 6u);
  EXPECT_EQ(plan.folds[0].test_units, PlanFoldsCtb(c, 5).folds[0].test_units);
  EXPECT_NE(plan.folds[0].test_units, PlanFoldsCtb(c, 6).folds[0].test_units);
}

TEST(FoldPlanTest, PairsFollowUnits) {
  const Corpus c = CorpusWithTopics(7, 1);
  const FoldPlan plan = PlanFoldsEsc(c);
  const auto test = EnumeratePairs(c, plan.folds[0].test_units, plan.unit);
  EXPECT_EQ(test.size(), 3u);
  EXPECT_EQ(test[0].doc_id, "d0_0");
}

// An ESC-shaped corpus built so its counts are known by construction:
// 258 documents over 22 topics, 1,770 intra and 3,855 cross causal links and
// 1,656 distinct mention surfaces.
TEST(CorpusStatsTest, EscShapedGoldenCounts) {
  const int kDocs = 258;
  std::vector<Document> docs;
  std::size_t expected_cross_pairs = 0;
  int surface = 0;
  for (int d = 0; d < kDocs; ++d) {
    const int intra = 6 + (d < 1770 - 6 * kDocs ? 1 : 0);
    const int cross = 14 + (d < 3855 - 14 * kDocs ? 1 : 0);
    std::vector<std::string> sentences;
    std::vector<testing_util::MentionSpec> mentions;
    std::vector<std::pair<std::string, std::string>> links;
    for (int s = 0; s < intra; ++s) {
      const std::string a = "e" + std::to_string(surface++ % 1656);
      const std::string b = "e" + std::to_string(surface++ % 1656);
      sentences.push_back(a + " caused " + b + " .");
      mentions.push_back({"a" + std::to_string(s), s, 0, 1});
      mentions.push_back({"b" + std::to_string(s), s, 2, 3});
      links.push_back({"a" + std::to_string(s), "b" + std::to_string(s)});
    }
    int added = 0;
    for (int i = 0; i < intra && added < cross; ++i) {
      for (int j = i + 1; j < intra && added < cross; ++j) {
        for (const char* x : {"a", "b"}) {
          for (const char* y : {"a", "b"}) {
            if (added == cross) break;
            links.push_back({x + std::to_string(i), y + std::to_string(j)});
            ++added;
          }
        }
      }
    }
    const std::size_t m = 2 * intra;
    expected_cross_pairs += m * (m - 1) / 2 - intra;
    docs.push_back(MakeDocument("doc" + std::to_string(d),
                                "T" + std::to_string(d % 22), sentences,
                                mentions, links));
  }
  const Corpus c = MakeCorpus(docs, "esc");
  ValidateCorpus(c);
  const CorpusStats s = ComputeStats(c);
  EXPECT_EQ(s.documents, 258u);
  EXPECT_EQ(s.topics, 22u);
  EXPECT_EQ(s.causal_intra, 1770u);
  EXPECT_EQ(s.causal_cross, 3855u);
  EXPECT_EQ(s.pairs_intra, 1770u);
  EXPECT_EQ(s.pairs_cross, expected_cross_pairs);
  EXPECT_EQ(s.distinct_mention_surfaces, 1656u);
  const auto j = StatsToJson(s);
  EXPECT_EQ(j["causal"]["total"], 5625);
}

TEST(CorpusTest, WriteThenLoadRoundTrips) {
  const Corpus c = testing_util::SmallSynthetic();
  const auto dir = testing_util::TempDir("corpus_rt");
  WriteCorpus(c, dir / "c.jsonl");
  const Corpus back = LoadCorpus(dir / "c.jsonl");
  EXPECT_EQ(back.name, "c");
  ASSERT_EQ(back.NumDocuments(), c.NumDocuments());
  EXPECT_EQ(EnumeratePairs(back), EnumeratePairs(c));
  std::filesystem::remove_all(dir);
}

TEST(SyntheticTest, ValidDeterministicAndHasBothScopes) {
  SyntheticOptions options;
  const Corpus a = GenerateSyntheticCorpus(options);
  const Corpus b = GenerateSyntheticCorpus(options);
  ValidateCorpus(a);
  EXPECT_EQ(a.NumDocuments(), 200u);
  EXPECT_EQ(EnumeratePairs(a), EnumeratePairs(b));
  const CorpusStats s = ComputeStats(a);
  EXPECT_GT(s.causal_intra, 0u);
  EXPECT_GT(s.causal_cross, 0u);
  EXPECT_GT(s.pairs_cross, s.causal_cross);
  options.seed = 8;
  EXPECT_NE(EnumeratePairs(GenerateSyntheticCorpus(options)), EnumeratePairs(a));
}

}  // namespace
}  // namespace daprompt
