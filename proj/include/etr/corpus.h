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

#ifndef ETR_CORPUS_H_
#define ETR_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etr/jsonl.h"
#include "etr/textcore.h"

namespace etr::corpus {

enum class Split { kTrain, kValidation, kTest };

std::string_view SplitName(Split split);
// Accepts "train", "validation" (or "val"/"dev") and "test".
std::optional<Split> ParseSplit(std::string_view name);

struct AlignedPair {
  std::string id;
  std::string book_id;
  std::string source;
  std::string target;
  std::optional<Split> split;
  std::optional<std::string> domain_tag;
};

// An ordered, immutable set of aligned pairs with unique ids.
class Corpus {
 public:
  Corpus() = default;
  // Throws etr::Error on a duplicate id or a pair without words.
  explicit Corpus(std::vector<AlignedPair> pairs);

  const std::vector<AlignedPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const AlignedPair* Find(const std::string& id) const;
  std::vector<std::string> BookIds() const;  // sorted, distinct

 private:
  std::vector<AlignedPair> pairs_;
  std::map<std::string, std::size_t> index_;
};

// Corpus file: one JSON object per line with string fields id, book_id,
// source, target and optional split, domain_tag. An empty file yields an
// empty corpus and a warning on `warnings`.
Corpus LoadCorpus(const std::filesystem::path& path, std::ostream* warnings);
Corpus ParseCorpus(std::string_view content, const std::string& origin, std::ostream* warnings);
Json PairToJson(const AlignedPair& pair);
std::string SerializeCorpus(const Corpus& corpus);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd Summarize(std::span<const double> values);

struct SideStats {
  std::size_t vocab_size = 0;
  MeanStd words;
  MeanStd sentences;
  MeanStd sentence_length;  // words per sentence, per document
  MeanStd kmre;
  MeanStd lix;
};

struct CorpusStats {
  std::size_t n_texts = 0;
  SideStats source;
  SideStats target;
  MeanStd compression;  // percent, macro-averaged over pairs
  MeanStd novelty;      // percent, macro-averaged over pairs
};

// Which pairs a statistic is computed over. Empty fields match everything.
struct Selector {
  std::optional<Split> split;
  std::optional<std::string> domain_tag;

  bool Matches(const AlignedPair& pair) const;
};

struct StatsOptions {
  int jobs = 1;
  const text::AbbreviationList* abbreviations = &text::AbbreviationList::BuiltIn();
};

// Per-document values, then mean and population std over documents.
// Throws etr::Error when no pair matches the selector.
CorpusStats ComputeStats(const Corpus& corpus, const Selector& selector = {},
                         const StatsOptions& options = {});

Json StatsToJson(const CorpusStats& stats);

struct SplitAssignment {
  std::map<std::string, Split> assignment;
  std::uint64_t seed = 0;
  std::vector<std::string> test_books;
  double val_fraction = 0.0;

  std::size_t Count(Split split) const;
};

// All pairs of `test_books` go to test. Every other book sends a share of its
// pairs to validation; shares are apportioned by largest remainder so the
// validation total is round(val_fraction * non-test pairs). Pairs within a
// book are chosen by a seeded shuffle of their sorted ids.
SplitAssignment StratifiedSplit(const Corpus& corpus, std::span<const std::string> test_books,
                                double val_fraction, std::uint64_t seed);

Corpus ApplySplit(const Corpus& corpus, const SplitAssignment& assignment);

struct NamedStats {
  std::string name;
  CorpusStats stats;
};

struct ComparisonCell {
  std::optional<double> value;
  std::optional<double> std;
};

struct ComparisonRow {
  std::string label;
  std::vector<ComparisonCell> cells;  // one per column
  bool integral = false;              // counts, rendered without decimals
};

struct ComparisonTable {
  std::vector<std::string> columns;
  std::vector<ComparisonRow> rows;

  const ComparisonRow* Row(std::string_view label) const;
};

// One column per corpus, then one "<name> - <first>" column per additional
// corpus holding the difference of means. Rows follow the order of the
// statistics table and end with target-minus-source delta rows.
ComparisonTable CompareCorpora(std::span<const NamedStats> stats);

std::string RenderStatsTable(const std::string& name, const CorpusStats& stats);
std::string RenderComparison(const ComparisonTable& table);
std::string RenderComparisonCsv(const ComparisonTable& table);

}  // namespace etr::corpus

#endif  // ETR_CORPUS_H_
