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

#ifndef ETR_EVALRUN_H_
#define ETR_EVALRUN_H_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etr/corpus.h"
#include "etr/embeddings.h"

namespace etr::evalrun {

// Report columns in their fixed output order.
enum class Metric { kRouge1, kRouge2, kRougeL, kBertF1, kSari, kKmre, kCompression, kNovelty };

inline constexpr std::array<Metric, 8> kAllMetrics = {
    Metric::kRouge1, Metric::kRouge2, Metric::kRougeL,      Metric::kBertF1,
    Metric::kSari,   Metric::kKmre,   Metric::kCompression, Metric::kNovelty};

std::string_view MetricLabel(Metric metric);  // "ROUGE-1", ..., "Comp. ratio"
std::optional<Metric> ParseMetricLabel(std::string_view label);

struct SystemRun {
  std::string run_id;
  std::string model_label;
  std::map<std::string, std::string> outputs;  // pair id -> generated text
};

// Run file: one {"id": ..., "output": ...} object per line.
SystemRun LoadRun(const std::filesystem::path& path, std::string run_id = "",
                  std::string model_label = "");

// One document's scores, on the reporting scale (x100 for overlap metrics).
using Scores = std::map<Metric, double>;

struct RunReport {
  std::map<std::string, Scores> per_document;
  Scores aggregate;  // arithmetic mean per metric over documents

  void Recompute();
};

struct ScoreOptions {
  bool allow_partial = false;
  int jobs = 1;
  const text::AbbreviationList* abbreviations = &text::AbbreviationList::BuiltIn();
  // BERT-F1 is computed only when both tables are given.
  const metrics::EmbeddingTable* candidate_embeddings = nullptr;
  const metrics::EmbeddingTable* reference_embeddings = nullptr;
};

// Scores every pair of `split` against the run's output for it. ROUGE and
// SARI use case-folded tokens, the pair target as the single reference and
// the pair source as SARI's source side.
RunReport ScoreRun(std::span<const corpus::AlignedPair> split, const SystemRun& run,
                   const ScoreOptions& options = {});

struct AggregateReport {
  std::size_t runs = 0;
  std::map<Metric, corpus::MeanStd> metrics;  // mean and population std across runs
};

AggregateReport AggregateRuns(std::span<const RunReport> reports);

struct Candidate {
  std::string config;
  RunReport report;
};

double SelectionScoreOf(const RunReport& report);

// The config with the highest harmonic mean of SARI, ROUGE-L and BERT-F1;
// ties go to the lexicographically smaller config.
std::string SelectBest(std::span<const Candidate> candidates);

enum class Format { kTable, kCsv };
std::optional<Format> ParseFormat(std::string_view name);

// Per-document rows in id order, then a "#mean" aggregate row when there is
// at least one document. Byte-identical for identical input.
std::string RenderReport(const RunReport& report, Format format);
std::string RenderAggregate(const AggregateReport& report, Format format);
void WriteReport(const RunReport& report, Format format, const std::filesystem::path& path);

// Reads the csv produced by RenderReport. The "#mean" row is recomputed.
RunReport ParseReportCsv(std::string_view content, const std::string& origin);
RunReport LoadReportCsv(const std::filesystem::path& path);

}  // namespace etr::evalrun

#endif  // ETR_EVALRUN_H_
