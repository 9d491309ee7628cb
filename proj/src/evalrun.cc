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

#include "etr/evalrun.h"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <set>

#include "etr/error.h"
#include "etr/jsonl.h"
#include "etr/metrics.h"
#include "etr/parallel.h"

namespace etr::evalrun {

std::string_view MetricLabel(Metric metric) {
  switch (metric) {
    case Metric::kRouge1: return "ROUGE-1";
    case Metric::kRouge2: return "ROUGE-2";
    case Metric::kRougeL: return "ROUGE-L";
    case Metric::kBertF1: return "BERT-F1";
    case Metric::kSari: return "SARI";
    case Metric::kKmre: return "KMRE";
    case Metric::kCompression: return "Comp. ratio";
    case Metric::kNovelty: return "Novelty";
  }
  return "";
}

std::optional<Metric> ParseMetricLabel(std::string_view label) {
  for (Metric m : kAllMetrics) {
    if (MetricLabel(m) == label) return m;
  }
  return std::nullopt;
}

SystemRun LoadRun(const std::filesystem::path& path, std::string run_id, std::string model_label) {
  SystemRun run;
  run.run_id = run_id.empty() ? path.stem().string() : std::move(run_id);
  run.model_label = std::move(model_label);
  ForEachJsonLine(path, [&](const Json& record, int) {
    const std::string id = RequireString(record, "id");
    if (!run.outputs.emplace(id, RequireString(record, "output")).second) {
      throw Error("duplicate id '" + id + "'");
    }
  });
  return run;
}

void RunReport::Recompute() {
  aggregate.clear();
  std::map<Metric, std::pair<double, std::size_t>> sums;
  for (const auto& [id, scores] : per_document) {
    for (const auto& [metric, value] : scores) {
      auto& [sum, count] = sums[metric];
      sum += value;
      ++count;
    }
  }
  for (const auto& [metric, sc] : sums) {
    aggregate[metric] = sc.first / static_cast<double>(sc.second);
  }
}

RunReport ScoreRun(std::span<const corpus::AlignedPair> split, const SystemRun& run,
                   const ScoreOptions& options) {
  const bool with_bert = options.candidate_embeddings || options.reference_embeddings;
  if (with_bert && !(options.candidate_embeddings && options.reference_embeddings)) {
    throw Error("BERT-F1 needs both candidate and reference embeddings");
  }

  std::set<std::string> split_ids;
  for (const auto& p : split) split_ids.insert(p.id);
  for (const auto& [id, text] : run.outputs) {
    if (!split_ids.count(id)) throw Error("output id '" + id + "' is not in the evaluated split");
  }

  std::vector<const corpus::AlignedPair*> todo;
  for (const auto& p : split) {
    if (run.outputs.count(p.id)) {
      todo.push_back(&p);
    } else if (!options.allow_partial) {
      throw Error("missing output for id '" + p.id + "'");
    }
  }

  std::vector<Scores> scores(todo.size());
  ParallelFor(todo.size(), options.jobs, [&](std::size_t i) {
    const auto& pair = *todo[i];
    const std::string& output = run.outputs.at(pair.id);
    const auto out_tokens = text::Tokenize(output, /*fold_case=*/true);
    if (out_tokens.empty()) throw Error("output for id '" + pair.id + "' has no words");
    const auto src_tokens = text::Tokenize(pair.source, true);
    const auto ref_tokens = text::Tokenize(pair.target, true);

    Scores& s = scores[i];
    s[Metric::kRouge1] = 100.0 * metrics::RougeN(out_tokens, ref_tokens, 1).f1;
    s[Metric::kRouge2] = 100.0 * metrics::RougeN(out_tokens, ref_tokens, 2).f1;
    s[Metric::kRougeL] = 100.0 * metrics::RougeL(out_tokens, ref_tokens).f1;
    const text::TokenSeq refs[] = {ref_tokens};
    s[Metric::kSari] = metrics::Sari(src_tokens, out_tokens, refs).total;
    s[Metric::kKmre] = metrics::Kmre(output, *options.abbreviations);
    s[Metric::kCompression] = metrics::CompressionRatio(src_tokens, out_tokens);
    s[Metric::kNovelty] = metrics::Novelty(src_tokens, out_tokens);
    if (with_bert) {
      const auto& cand = options.candidate_embeddings->Get(pair.id);
      const auto& ref = options.reference_embeddings->Get(pair.id);
      s[Metric::kBertF1] = 100.0 * metrics::BertScore(cand.vectors, ref.vectors).f1;
    }
  });

  RunReport report;
  for (std::size_t i = 0; i < todo.size(); ++i) report.per_document[todo[i]->id] = std::move(scores[i]);
  report.Recompute();
  return report;
}

AggregateReport AggregateRuns(std::span<const RunReport> reports) {
  if (reports.empty()) throw Error("no reports to aggregate");
  auto keys = [](const RunReport& r) {
    std::set<Metric> k;
    for (const auto& [m, v] : r.aggregate) k.insert(m);
    return k;
  };
  const auto expected = keys(reports.front());
  for (const auto& r : reports) {
    if (keys(r) != expected) throw Error("inconsistent metric sets across runs");
  }
  AggregateReport out;
  out.runs = reports.size();
  for (Metric m : expected) {
    std::vector<double> values;
    for (const auto& r : reports) values.push_back(r.aggregate.at(m));
    out.metrics[m] = corpus::Summarize(values);
  }
  return out;
}

double SelectionScoreOf(const RunReport& report) {
  for (Metric m : {Metric::kSari, Metric::kRougeL, Metric::kBertF1}) {
    if (!report.aggregate.count(m)) {
      throw Error(std::string("missing required metric ") + std::string(MetricLabel(m)));
    }
  }
  return metrics::SelectionScore(report.aggregate.at(Metric::kSari),
                                 report.aggregate.at(Metric::kRougeL),
                                 report.aggregate.at(Metric::kBertF1));
}

std::string SelectBest(std::span<const Candidate> candidates) {
  if (candidates.empty()) throw Error("no candidates to select from");
  const Candidate* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const double score = SelectionScoreOf(c.report);
    if (!best || score > best_score || (score == best_score && c.config < best->config)) {
      best = &c;
      best_score = score;
    }
  }
  return best->config;
}

std::optional<Format> ParseFormat(std::string_view name) {
  if (name == "table") return Format::kTable;
  if (name == "csv") return Format::kCsv;
  return std::nullopt;
}

namespace {

constexpr std::string_view kMeanRow = "#mean";

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

std::vector<std::string> Row(const std::string& id, const Scores& scores, Format format) {
  std::vector<std::string> row{id};
  for (Metric m : kAllMetrics) {
    auto it = scores.find(m);
    if (it == scores.end()) {
      row.push_back(format == Format::kCsv ? "" : "-");
    } else {
      row.push_back(format == Format::kCsv ? fmt::format("{}", it->second)
                                           : fmt::format("{:.2f}", it->second));
    }
  }
  return row;
}

std::string Render(const std::vector<std::vector<std::string>>& grid, Format format) {
  std::string out;
  if (format == Format::kCsv) {
    for (const auto& row : grid) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c > 0) out += ',';
        out += CsvField(row[c]);
      }
      out += '\n';
    }
    return out;
  }
  std::vector<std::size_t> widths(grid.front().size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += c == 0 ? fmt::format("{:<{}}", row[c], widths[c])
                     : fmt::format("{:>{}}", row[c], widths[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

}  // namespace

std::string RenderReport(const RunReport& report, Format format) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"id"};
  for (Metric m : kAllMetrics) header.emplace_back(MetricLabel(m));
  grid.push_back(header);
  for (const auto& [id, scores] : report.per_document) grid.push_back(Row(id, scores, format));
  if (!report.per_document.empty()) grid.push_back(Row(std::string(kMeanRow), report.aggregate, format));
  return Render(grid, format);
}

std::string RenderAggregate(const AggregateReport& report, Format format) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"metric", "mean", "std", "runs"});
  for (Metric m : kAllMetrics) {
    auto it = report.metrics.find(m);
    if (it == report.metrics.end()) continue;
    const auto& ms = it->second;
    if (format == Format::kCsv) {
      grid.push_back({std::string(MetricLabel(m)), fmt::format("{}", ms.mean),
                      fmt::format("{}", ms.std), std::to_string(report.runs)});
    } else {
      grid.push_back({std::string(MetricLabel(m)), fmt::format("{:.2f}", ms.mean),
                      fmt::format("{:.2f}", ms.std), std::to_string(report.runs)});
    }
  }
  return Render(grid, format);
}

void WriteReport(const RunReport& report, Format format, const std::filesystem::path& path) {
  WriteFileAtomic(path, RenderReport(report, format));
}

RunReport ParseReportCsv(std::string_view content, const std::string& origin) {
  RunReport report;
  std::vector<std::optional<Metric>> columns;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = SplitCsvLine(line);
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    if (columns.empty()) {
      if (fields.empty() || fields[0] != "id") throw Error(where + "expected header starting with 'id'");
      for (std::size_t c = 1; c < fields.size(); ++c) {
        auto m = ParseMetricLabel(fields[c]);
        if (!m) throw Error(where + "unknown column '" + fields[c] + "'");
        columns.push_back(m);
      }
      continue;
    }
    if (fields.size() != columns.size() + 1) throw Error(where + "wrong number of fields");
    if (fields[0] == kMeanRow) continue;
    Scores scores;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const std::string& f = fields[c + 1];
      if (f.empty()) continue;
      try {
        std::size_t used = 0;
        const double v = std::stod(f, &used);
        if (used != f.size()) throw std::invalid_argument(f);
        scores[*columns[c]] = v;
      } catch (const std::exception&) {
        throw Error(where + "not a number: '" + f + "'");
      }
    }
    if (!report.per_document.emplace(fields[0], std::move(scores)).second) {
      throw Error(where + "duplicate id '" + fields[0] + "'");
    }
  }
  if (columns.empty()) throw Error(origin + ": missing header");
  report.Recompute();
  return report;
}

RunReport LoadReportCsv(const std::filesystem::path& path) {
  return ParseReportCsv(ReadFile(path), path.string());
}

}  // namespace etr::evalrun
