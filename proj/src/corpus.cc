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

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "etr/error.h"
#include "etr/metrics.h"
#include "etr/parallel.h"
#include "etr/random.h"

namespace etr::corpus {

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "";
}

std::optional<Split> ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation" || name == "val" || name == "dev") return Split::kValidation;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

Corpus::Corpus(std::vector<AlignedPair> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    if (!index_.emplace(p.id, i).second) throw Error("duplicate id '" + p.id + "'");
    if (text::Tokenize(p.source).empty()) throw Error("pair '" + p.id + "': source has no words");
    if (text::Tokenize(p.target).empty()) throw Error("pair '" + p.id + "': target has no words");
  }
}

const AlignedPair* Corpus::Find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &pairs_[it->second];
}

std::vector<std::string> Corpus::BookIds() const {
  std::set<std::string> books;
  for (const auto& p : pairs_) books.insert(p.book_id);
  return {books.begin(), books.end()};
}

Corpus ParseCorpus(std::string_view content, const std::string& origin, std::ostream* warnings) {
  std::vector<AlignedPair> pairs;
  std::set<std::string> seen;
  ForEachJsonLine(content, origin, [&](const Json& record, int) {
    AlignedPair pair;
    pair.id = RequireString(record, "id");
    pair.book_id = RequireString(record, "book_id");
    pair.source = RequireString(record, "source");
    pair.target = RequireString(record, "target");
    if (pair.id.empty()) throw Error("empty id");
    if (pair.source.empty() || pair.target.empty()) {
      throw Error("pair '" + pair.id + "': source and target must be nonempty");
    }
    if (auto split = OptionalString(record, "split"); !split.empty()) {
      pair.split = ParseSplit(split);
      if (!pair.split) throw Error("unknown split '" + split + "'");
    }
    if (auto tag = OptionalString(record, "domain_tag"); !tag.empty()) pair.domain_tag = tag;
    if (!seen.insert(pair.id).second) throw Error("duplicate id '" + pair.id + "'");
    if (text::Tokenize(pair.source).empty() || text::Tokenize(pair.target).empty()) {
      throw Error("pair '" + pair.id + "': source and target must contain words");
    }
    pairs.push_back(std::move(pair));
  });
  if (pairs.empty() && warnings) *warnings << "warning: " << origin << ": empty corpus\n";
  return Corpus(std::move(pairs));
}

Corpus LoadCorpus(const std::filesystem::path& path, std::ostream* warnings) {
  return ParseCorpus(ReadFile(path), path.string(), warnings);
}

Json PairToJson(const AlignedPair& pair) {
  Json j = {{"id", pair.id}, {"book_id", pair.book_id}, {"source", pair.source},
            {"target", pair.target}};
  if (pair.split) j["split"] = std::string(SplitName(*pair.split));
  if (pair.domain_tag) j["domain_tag"] = *pair.domain_tag;
  return j;
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.pairs()) {
    out += ToLine(PairToJson(p));
    out += '\n';
  }
  return out;
}

MeanStd Summarize(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / n);
  return out;
}

bool Selector::Matches(const AlignedPair& pair) const {
  if (split && pair.split != split) return false;
  if (domain_tag && pair.domain_tag != domain_tag) return false;
  return true;
}

namespace {

struct SideValues {
  double words, sentences, sentence_length, kmre, lix;
};

struct DocValues {
  SideValues source, target;
  double compression, novelty;
};

SideValues MeasureSide(const std::string& text, const text::AbbreviationList& abbreviations) {
  const auto counts = metrics::CountReadability(text, abbreviations);
  SideValues v;
  v.words = static_cast<double>(counts.words);
  v.sentences = static_cast<double>(counts.sentences);
  v.sentence_length = v.words / v.sentences;
  v.kmre = metrics::Kmre(counts);
  v.lix = metrics::Lix(counts);
  return v;
}

SideStats SummarizeSide(const std::vector<DocValues>& docs, SideValues DocValues::*side) {
  auto collect = [&](double SideValues::*field) {
    std::vector<double> values;
    values.reserve(docs.size());
    for (const auto& d : docs) values.push_back(d.*side.*field);
    return Summarize(values);
  };
  SideStats s;
  s.words = collect(&SideValues::words);
  s.sentences = collect(&SideValues::sentences);
  s.sentence_length = collect(&SideValues::sentence_length);
  s.kmre = collect(&SideValues::kmre);
  s.lix = collect(&SideValues::lix);
  return s;
}

}  // namespace

CorpusStats ComputeStats(const Corpus& corpus, const Selector& selector,
                         const StatsOptions& options) {
  std::vector<const AlignedPair*> selected;
  for (const auto& p : corpus.pairs()) {
    if (selector.Matches(p)) selected.push_back(&p);
  }
  if (selected.empty()) throw Error("no documents to compute statistics over");

  std::vector<DocValues> docs(selected.size());
  ParallelFor(selected.size(), options.jobs, [&](std::size_t i) {
    const auto& p = *selected[i];
    DocValues& d = docs[i];
    d.source = MeasureSide(p.source, *options.abbreviations);
    d.target = MeasureSide(p.target, *options.abbreviations);
    const auto src = text::Tokenize(p.source);
    const auto tgt = text::Tokenize(p.target);
    d.compression = metrics::CompressionRatio(src, tgt);
    d.novelty = metrics::Novelty(src, tgt);
  });

  CorpusStats stats;
  stats.n_texts = docs.size();
  stats.source = SummarizeSide(docs, &DocValues::source);
  stats.target = SummarizeSide(docs, &DocValues::target);
  std::vector<double> compression, novelty;
  for (const auto& d : docs) {
    compression.push_back(d.compression);
    novelty.push_back(d.novelty);
  }
  stats.compression = Summarize(compression);
  stats.novelty = Summarize(novelty);

  std::vector<std::string> sources, targets;
  for (const auto* p : selected) {
    sources.push_back(p->source);
    targets.push_back(p->target);
  }
  stats.source.vocab_size = text::Vocabulary(sources).size();
  stats.target.vocab_size = text::Vocabulary(targets).size();
  return stats;
}

namespace {

Json MeanStdJson(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

Json SideJson(const SideStats& s) {
  return {{"vocab_size", s.vocab_size},
          {"words", MeanStdJson(s.words)},
          {"sentences", MeanStdJson(s.sentences)},
          {"sentence_length", MeanStdJson(s.sentence_length)},
          {"kmre", MeanStdJson(s.kmre)},
          {"lix", MeanStdJson(s.lix)}};
}

}  // namespace

Json StatsToJson(const CorpusStats& stats) {
  return {{"n_texts", stats.n_texts},
          {"source", SideJson(stats.source)},
          {"target", SideJson(stats.target)},
          {"compression", MeanStdJson(stats.compression)},
          {"novelty", MeanStdJson(stats.novelty)}};
}

std::size_t SplitAssignment::Count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      assignment.begin(), assignment.end(), [split](const auto& kv) { return kv.second == split; }));
}

SplitAssignment StratifiedSplit(const Corpus& corpus, std::span<const std::string> test_books,
                                double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw Error("val_fraction must lie strictly between 0 and 1");
  }
  const auto books = corpus.BookIds();
  const std::set<std::string> test(test_books.begin(), test_books.end());
  for (const auto& b : test) {
    if (!std::binary_search(books.begin(), books.end(), b)) {
      throw Error("unknown book id '" + b + "'");
    }
  }

  SplitAssignment out;
  out.seed = seed;
  out.test_books.assign(test.begin(), test.end());
  out.val_fraction = val_fraction;

  std::map<std::string, std::vector<std::string>> by_book;
  for (const auto& p : corpus.pairs()) {
    if (test.count(p.book_id)) {
      out.assignment[p.id] = Split::kTest;
    } else {
      by_book[p.book_id].push_back(p.id);
    }
  }

  // Largest-remainder apportionment of the validation total across books.
  std::size_t pool = 0;
  for (const auto& [book, ids] : by_book) pool += ids.size();
  const auto total_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(pool)));
  struct Quota {
    std::string book;
    std::size_t take;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t allotted = 0;
  for (const auto& [book, ids] : by_book) {
    const double exact = val_fraction * static_cast<double>(ids.size());
    const auto floor = static_cast<std::size_t>(std::floor(exact));
    quotas.push_back({book, floor, exact - static_cast<double>(floor)});
    allotted += floor;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  for (std::size_t k = 0; allotted < total_val && k < order.size(); ++k) {
    auto& q = quotas[order[k]];
    if (q.take < by_book[q.book].size()) {
      ++q.take;
      ++allotted;
    }
  }

  SeededRng rng(seed);
  for (const auto& q : quotas) {
    auto ids = by_book[q.book];
    std::sort(ids.begin(), ids.end());
    rng.Shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out.assignment[ids[i]] = i < q.take ? Split::kValidation : Split::kTrain;
    }
  }
  return out;
}

Corpus ApplySplit(const Corpus& corpus, const SplitAssignment& assignment) {
  std::vector<AlignedPair> pairs = corpus.pairs();
  for (auto& p : pairs) {
    auto it = assignment.assignment.find(p.id);
    if (it == assignment.assignment.end()) throw Error("id '" + p.id + "' has no split");
    p.split = it->second;
  }
  return Corpus(std::move(pairs));
}

const ComparisonRow* ComparisonTable::Row(std::string_view label) const {
  for (const auto& r : rows) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

ComparisonTable CompareCorpora(std::span<const NamedStats> stats) {
  ComparisonTable table;
  for (const auto& s : stats) table.columns.push_back(s.name);
  for (std::size_t c = 1; c < stats.size(); ++c) {
    table.columns.push_back(stats[c].name + " - " + stats[0].name);
  }

  auto add_row = [&](std::string label, auto getter, bool with_std, bool integral = false) {
    ComparisonRow row{std::move(label), {}, integral};
    for (const auto& s : stats) {
      const MeanStd m = getter(s.stats);
      row.cells.push_back({m.mean, with_std ? std::optional<double>(m.std) : std::nullopt});
    }
    for (std::size_t c = 1; c < stats.size(); ++c) {
      row.cells.push_back({*row.cells[c].value - *row.cells[0].value, std::nullopt});
    }
    table.rows.push_back(std::move(row));
  };
  auto count = [](double v) { return MeanStd{v, 0.0}; };

  add_row("Dataset size", [&](const CorpusStats& s) { return count(static_cast<double>(s.n_texts)); }, false, true);
  add_row("Vocabulary size (source)", [&](const CorpusStats& s) { return count(static_cast<double>(s.source.vocab_size)); }, false, true);
  add_row("Vocabulary size (target)", [&](const CorpusStats& s) { return count(static_cast<double>(s.target.vocab_size)); }, false, true);
  add_row("Num. of words (source)", [](const CorpusStats& s) { return s.source.words; }, true);
  add_row("Num. of words (target)", [](const CorpusStats& s) { return s.target.words; }, true);
  add_row("Num. of sentences (source)", [](const CorpusStats& s) { return s.source.sentences; }, true);
  add_row("Num. of sentences (target)", [](const CorpusStats& s) { return s.target.sentences; }, true);
  add_row("Sentence length (source)", [](const CorpusStats& s) { return s.source.sentence_length; }, true);
  add_row("Sentence length (target)", [](const CorpusStats& s) { return s.target.sentence_length; }, true);
  add_row("KMRE (source)", [](const CorpusStats& s) { return s.source.kmre; }, true);
  add_row("KMRE (target)", [](const CorpusStats& s) { return s.target.kmre; }, true);
  add_row("LIX (source)", [](const CorpusStats& s) { return s.source.lix; }, true);
  add_row("LIX (target)", [](const CorpusStats& s) { return s.target.lix; }, true);
  add_row("Comp. ratio (%)", [](const CorpusStats& s) { return s.compression; }, true);
  add_row("Novelty (%)", [](const CorpusStats& s) { return s.novelty; }, true);
  // Target minus source, by linearity of means.
  add_row("Words delta (target-source)", [&](const CorpusStats& s) { return count(s.target.words.mean - s.source.words.mean); }, false);
  add_row("Sentences delta (target-source)", [&](const CorpusStats& s) { return count(s.target.sentences.mean - s.source.sentences.mean); }, false);
  add_row("KMRE delta (target-source)", [&](const CorpusStats& s) { return count(s.target.kmre.mean - s.source.kmre.mean); }, false);
  add_row("LIX delta (target-source)", [&](const CorpusStats& s) { return count(s.target.lix.mean - s.source.lix.mean); }, false);
  return table;
}

namespace {

std::string FormatCell(const ComparisonCell& cell, bool integral) {
  if (!cell.value) return "-";
  if (integral) return fmt::format("{:.0f}", *cell.value);
  if (cell.std) return fmt::format("{:.2f} ± {:.2f}", *cell.value, *cell.std);
  return fmt::format("{:.2f}", *cell.value);
}

// Display width in code points, which is what an aligned terminal table needs
// for the accented labels used here.
std::size_t Width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80 ? 1 : 0;
  return w;
}

std::string Pad(const std::string& s, std::size_t width, bool right) {
  const std::size_t w = Width(s);
  const std::string fill(width > w ? width - w : 0, ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

std::string RenderComparison(const ComparisonTable& table) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{""};
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  grid.push_back(header);
  for (const auto& row : table.rows) {
    std::vector<std::string> line{row.label};
    for (const auto& cell : row.cells) line.push_back(FormatCell(cell, row.integral));
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], Width(line[c]));
  }
  std::string out;
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) out += "  ";
      out += Pad(line[c], widths[c], c > 0);
    }
    out += '\n';
  }
  return out;
}

std::string RenderComparisonCsv(const ComparisonTable& table) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::string out = "statistic";
  for (const auto& c : table.columns) out += "," + quote(c) + "," + quote(c + " std");
  out += '\n';
  for (const auto& row : table.rows) {
    out += quote(row.label);
    for (const auto& cell : row.cells) {
      out += ',';
      if (cell.value) out += fmt::format("{}", *cell.value);
      out += ',';
      if (cell.std) out += fmt::format("{}", *cell.std);
    }
    out += '\n';
  }
  return out;
}

std::string RenderStatsTable(const std::string& name, const CorpusStats& stats) {
  const NamedStats one[] = {{name, stats}};
  return RenderComparison(CompareCorpora(one));
}

}  // namespace etr::corpus
