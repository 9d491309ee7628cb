// Copyright 2026 The etrkit Authors.
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

#include "etr/corpus.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "etr/error.h"
#include "etr/metrics.h"
#include "test_util.h"

namespace etr::corpus {
namespace {

std::string Words(int n, const std::string& word = "mot") {
  std::string s;
  for (int i = 0; i < n; ++i) s += (i ? " " : "") + word;
  return s + ".";
}

AlignedPair Pair(std::string id, std::string book, std::string source, std::string target) {
  return {std::move(id), std::move(book), std::move(source), std::move(target), std::nullopt, std::nullopt};
}

std::string Line(const AlignedPair& p) { return PairToJson(p).dump() + "\n"; }

TEST(LoadCorpus, WellFormedFile) {
  testutil::TempDir dir;
  testutil::WriteText(dir / "c.jsonl", Line(Pair("1", "b", "Le chat.", "Chat.")) +
                                           Line(Pair("2", "b", "Il dort.", "Dort.")) +
                                           "{\"id\":\"3\",\"book_id\":\"c\",\"source\":\"A b.\",\"target\":\"A.\","
                                           "\"split\":\"val\",\"domain_tag\":\"politic\"}\n");
  const auto c = LoadCorpus(dir / "c.jsonl", nullptr);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.Find("3")->split, Split::kValidation);
  EXPECT_EQ(c.Find("3")->domain_tag, "politic");
  EXPECT_EQ(c.BookIds(), (std::vector<std::string>{"b", "c"}));
}

TEST(LoadCorpus, DuplicateIdNamesTheId) {
  try {
    ParseCorpus(Line(Pair("x7", "b", "A.", "B.")) + Line(Pair("x7", "b", "C.", "D.")), "mem", nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate id 'x7'"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, EmptyFileWarns) {
  std::ostringstream warnings;
  const auto c = ParseCorpus("", "empty.jsonl", &warnings);
  EXPECT_TRUE(c.empty());
  EXPECT_NE(warnings.str().find("empty corpus"), std::string::npos);
}

TEST(LoadCorpus, MalformedLineHasLineNumber) {
  try {
    ParseCorpus(Line(Pair("1", "b", "A.", "B.")) + "{not json\n", "c.jsonl", nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("c.jsonl:2"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, RejectsMissingFieldsAndEmptySides) {
  EXPECT_THROW(ParseCorpus("{\"id\":\"1\",\"book_id\":\"b\",\"source\":\"A.\"}\n", "m", nullptr), Error);
  EXPECT_THROW(ParseCorpus(Line(Pair("1", "b", "", "B.")), "m", nullptr), Error);
  EXPECT_THROW(ParseCorpus(Line(Pair("1", "b", "...", "B.")), "m", nullptr), Error);
  EXPECT_THROW(ParseCorpus("{\"id\":\"1\",\"book_id\":\"b\",\"source\":\"A.\",\"target\":\"B.\",\"split\":\"x\"}\n",
                           "m", nullptr),
               Error);
}

TEST(LoadCorpus, MissingFileIsIoError) {
  EXPECT_THROW(LoadCorpus("/nonexistent/corpus.jsonl", nullptr), IoError);
}

TEST(SerializeCorpus, RoundTrip) {
  AlignedPair p = Pair("1", "b", "Le « chat ».\nIl dort.", "Chat.");
  p.split = Split::kTest;
  p.domain_tag = "politic";
  const Corpus c({p, Pair("2", "b", "A b.", "A.")});
  const auto back = ParseCorpus(SerializeCorpus(c), "mem", nullptr);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.pairs()[0].source, p.source);
  EXPECT_EQ(back.pairs()[0].split, Split::kTest);
  EXPECT_EQ(back.pairs()[0].domain_tag, "politic");
  EXPECT_EQ(SerializeCorpus(back), SerializeCorpus(c));
}

TEST(ComputeStats, MacroAveragedCompression) {
  // 20% and 80% compression on documents of different lengths.
  const Corpus c({Pair("a", "b", Words(10), Words(8)), Pair("b", "b", Words(40), Words(8))});
  const auto s = ComputeStats(c);
  EXPECT_EQ(s.compression.mean, 50.0);
  EXPECT_NEAR(s.compression.std, 30.0, 1e-12);
  // Ratio of mean word counts gives a different number.
  EXPECT_DOUBLE_EQ(100.0 * (1.0 - s.target.words.mean / s.source.words.mean), 68.0);
}

TEST(ComputeStats, HandComputedSmallCorpus) {
  const Corpus c({Pair("a", "b", "Le chat dort. Il rêve.", "Le chat dort."),
                  Pair("b", "b", "Un chien court.", "Un loup court vite.")});
  const auto s = ComputeStats(c);
  EXPECT_EQ(s.n_texts, 2u);
  EXPECT_DOUBLE_EQ(s.source.words.mean, 4.0);   // 5 and 3
  EXPECT_DOUBLE_EQ(s.source.words.std, 1.0);
  EXPECT_DOUBLE_EQ(s.source.sentences.mean, 1.5);
  EXPECT_DOUBLE_EQ(s.source.sentence_length.mean, (2.5 + 3.0) / 2);
  EXPECT_DOUBLE_EQ(s.target.words.mean, 3.5);   // 3 and 4
  // Novelty: 0/3 and 2/4 (loup, vite).
  EXPECT_DOUBLE_EQ(s.novelty.mean, 25.0);
  EXPECT_DOUBLE_EQ(s.novelty.std, 25.0);
  // Compression: 40% and -33.33%.
  EXPECT_DOUBLE_EQ(s.compression.mean, (40.0 + 100.0 * (1.0 - 4.0 / 3.0)) / 2);
  EXPECT_EQ(s.source.vocab_size, 8u);  // le chat dort il rêve un chien court
  EXPECT_EQ(s.target.vocab_size, 7u);  // le chat dort un loup court vite
  EXPECT_DOUBLE_EQ(s.source.kmre.mean,
                   (metrics::Kmre("Le chat dort. Il rêve.") + metrics::Kmre("Un chien court.")) / 2);
}

TEST(ComputeStats, SingleDocumentHasZeroStd) {
  const auto s = ComputeStats(Corpus({Pair("a", "b", "Le chat dort. Il rêve.", "Le chat dort.")}));
  for (const MeanStd& m : {s.source.words, s.target.words, s.source.kmre, s.target.lix, s.compression,
                           s.novelty, s.source.sentence_length}) {
    EXPECT_EQ(m.std, 0.0);
  }
}

TEST(ComputeStats, EmptySelectionThrows) {
  EXPECT_THROW(ComputeStats(Corpus()), Error);
  const Corpus c({Pair("a", "b", "A.", "B.")});
  EXPECT_THROW(ComputeStats(c, Selector{Split::kTest, std::nullopt}), Error);
}

TEST(ComputeStats, SelectorFiltersSplitAndDomain) {
  AlignedPair a = Pair("a", "b", Words(10), Words(5)), b = Pair("b", "b", Words(10), Words(2));
  a.split = Split::kTest;
  b.split = Split::kTrain;
  b.domain_tag = "politic";
  const Corpus c({a, b});
  EXPECT_EQ(ComputeStats(c, {Split::kTest, std::nullopt}).compression.mean, 50.0);
  EXPECT_EQ(ComputeStats(c, {std::nullopt, "politic"}).compression.mean, 80.0);
  EXPECT_EQ(ComputeStats(c).n_texts, 2u);
}

std::vector<AlignedPair> RandomPairs(std::mt19937& rng, int n) {
  static const std::vector<std::string> vocab = {"le", "chat", "dort", "Il", "mange", "la", "souris",
                                                 "grise", "aujourd'hui", "peut-être", "l'été", "court"};
  auto text = [&](int words) {
    std::string s;
    for (int i = 0; i < words; ++i) {
      s += vocab[rng() % vocab.size()];
      s += (rng() % 5 == 0) ? ". " : " ";
    }
    return s + "fin.";
  };
  std::vector<AlignedPair> pairs;
  for (int i = 0; i < n; ++i) {
    pairs.push_back(Pair("p" + std::to_string(i), "book" + std::to_string(rng() % 4),
                         text(1 + int(rng() % 30)), text(1 + int(rng() % 15))));
  }
  return pairs;
}

bool SameStats(const CorpusStats& a, const CorpusStats& b, double tol) {
  return StatsToJson(a).dump() == StatsToJson(b).dump() ||
         (std::abs(a.compression.mean - b.compression.mean) < tol &&
          std::abs(a.novelty.std - b.novelty.std) < tol && std::abs(a.source.kmre.mean - b.source.kmre.mean) < tol &&
          std::abs(a.target.lix.std - b.target.lix.std) < tol && a.source.vocab_size == b.source.vocab_size);
}

TEST(ComputeStats, PermutationInvariantAndParallelDeterministic) {
  std::mt19937 rng(4);
  for (int round = 0; round < 20; ++round) {
    auto pairs = RandomPairs(rng, 30);
    const Corpus c(pairs);
    const auto serial = ComputeStats(c);
    StatsOptions parallel;
    parallel.jobs = 4;
    EXPECT_EQ(StatsToJson(ComputeStats(c, {}, parallel)).dump(), StatsToJson(serial).dump());
    std::shuffle(pairs.begin(), pairs.end(), rng);
    EXPECT_TRUE(SameStats(ComputeStats(Corpus(pairs)), serial, 1e-9));
    EXPECT_NEAR(serial.target.words.mean - serial.source.words.mean,
                CompareCorpora(std::vector<NamedStats>{{"x", serial}})
                    .Row("Words delta (target-source)")
                    ->cells[0]
                    .value.value(),
                1e-12);
    EXPECT_GE(serial.novelty.std, 0.0);
    EXPECT_GE(serial.source.words.std, 0.0);
  }
}

// Eleven books: two test books of 30 and 23 pairs, nine others of 470 total.
Corpus ElevenBookCorpus() {
  const int sizes[] = {30, 23, 60, 55, 52, 50, 58, 49, 51, 47, 48};
  std::vector<AlignedPair> pairs;
  for (int b = 0; b < 11; ++b) {
    for (int i = 0; i < sizes[b]; ++i) {
      pairs.push_back(Pair("b" + std::to_string(b) + "-" + std::to_string(i), "book" + std::to_string(b),
                           "Le chat dort.", "Chat."));
    }
  }
  return Corpus(pairs);
}

TEST(StratifiedSplit, ElevenBooksSizes) {
  const auto c = ElevenBookCorpus();
  ASSERT_EQ(c.size(), 523u);
  const std::vector<std::string> test = {"book0", "book1"};
  const auto a = StratifiedSplit(c, test, 0.15, 42);
  EXPECT_EQ(a.Count(Split::kTrain), 399u);
  EXPECT_EQ(a.Count(Split::kValidation), 71u);
  EXPECT_EQ(a.Count(Split::kTest), 53u);
}

TEST(StratifiedSplit, CoverageNoLeakageDeterminism) {
  const auto c = ElevenBookCorpus();
  const std::vector<std::string> test = {"book3", "book7"};
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto a = StratifiedSplit(c, test, 0.2, seed);
    ASSERT_EQ(a.assignment.size(), c.size());
    for (const auto& p : c.pairs()) {
      const bool is_test_book = p.book_id == "book3" || p.book_id == "book7";
      EXPECT_EQ(a.assignment.at(p.id) == Split::kTest, is_test_book);
    }
    EXPECT_EQ(StratifiedSplit(c, test, 0.2, seed).assignment, a.assignment);
  }
  EXPECT_NE(StratifiedSplit(c, test, 0.2, 1).assignment, StratifiedSplit(c, test, 0.2, 2).assignment);
}

TEST(StratifiedSplit, PerBookShareIsProportional) {
  const auto c = ElevenBookCorpus();
  const auto a = StratifiedSplit(c, std::vector<std::string>{"book0"}, 0.15, 5);
  std::map<std::string, std::pair<int, int>> per_book;  // validation, total
  for (const auto& p : c.pairs()) {
    auto& [val, total] = per_book[p.book_id];
    ++total;
    val += a.assignment.at(p.id) == Split::kValidation ? 1 : 0;
  }
  for (const auto& [book, counts] : per_book) {
    if (book == "book0") continue;
    EXPECT_LE(std::abs(counts.first - 0.15 * counts.second), 1.0) << book;
  }
}

TEST(StratifiedSplit, HalfOfFourIsTwo) {
  const Corpus c({Pair("1", "b", "A.", "B."), Pair("2", "b", "A.", "B."), Pair("3", "b", "A.", "B."),
                  Pair("4", "b", "A.", "B.")});
  const auto a = StratifiedSplit(c, {}, 0.5, 3);
  EXPECT_EQ(a.Count(Split::kTrain), 2u);
  EXPECT_EQ(a.Count(Split::kValidation), 2u);
}

TEST(StratifiedSplit, Errors) {
  const Corpus c({Pair("1", "b", "A.", "B.")});
  EXPECT_THROW(StratifiedSplit(c, std::vector<std::string>{"nope"}, 0.5, 1), Error);
  EXPECT_THROW(StratifiedSplit(c, {}, 0.0, 1), Error);
  EXPECT_THROW(StratifiedSplit(c, {}, 1.0, 1), Error);
}

TEST(ApplySplit, WritesSplitField) {
  const auto c = ElevenBookCorpus();
  const auto a = StratifiedSplit(c, std::vector<std::string>{"book0"}, 0.15, 5);
  const auto out = ApplySplit(c, a);
  for (const auto& p : out.pairs()) EXPECT_EQ(p.split, a.assignment.at(p.id));
}

TEST(CompareCorpora, SelfComparisonHasZeroDeltas) {
  std::mt19937 rng(9);
  const auto s = ComputeStats(Corpus(RandomPairs(rng, 20)));
  const std::vector<NamedStats> both = {{"x", s}, {"y", s}};
  const auto t = CompareCorpora(both);
  ASSERT_EQ(t.columns, (std::vector<std::string>{"x", "y", "y - x"}));
  for (const auto& row : t.rows) {
    ASSERT_EQ(row.cells.size(), 3u);
    EXPECT_EQ(row.cells[2].value.value_or(0.0), 0.0) << row.label;
  }
  const auto* kmre = t.Row("KMRE delta (target-source)");
  ASSERT_NE(kmre, nullptr);
  EXPECT_NEAR(*kmre->cells[0].value, s.target.kmre.mean - s.source.kmre.mean, 1e-12);
  EXPECT_EQ(RenderComparison(t), RenderComparison(CompareCorpora(both)));
  EXPECT_NE(RenderComparisonCsv(t).find("KMRE delta (target-source)"), std::string::npos);
}

TEST(Render, StatsTableHasAllRows) {
  const auto s = ComputeStats(Corpus({Pair("a", "b", Words(10), Words(5))}));
  const std::string table = RenderStatsTable("etr", s);
  for (const char* label : {"Dataset size", "Vocabulary size (source)", "Num. of words (target)",
                            "Num. of sentences (source)", "Sentence length (target)", "KMRE (source)",
                            "LIX (target)", "Comp. ratio (%)", "Novelty (%)"}) {
    EXPECT_NE(table.find(label), std::string::npos) << label;
  }
  EXPECT_NE(table.find("50.00 ± 0.00"), std::string::npos) << table;
}

}  // namespace
}  // namespace etr::corpus
