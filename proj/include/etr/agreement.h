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

#ifndef ETR_AGREEMENT_H_
#define ETR_AGREEMENT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etr/jsonl.h"

namespace etr::agreement {

enum class Category { kIC, kSC, kWC, kIllustrations, kGeneral };
enum class Scale { kBinary, kLikert5 };

std::string_view CategoryName(Category c);  // "IC", "SC", "WC", "Illustrations", "General"
std::optional<Category> ParseCategory(std::string_view name);
std::string_view ScaleName(Scale s);  // "binary", "likert5"
std::optional<Scale> ParseScale(std::string_view name);

struct Criterion {
  std::string id;
  Category category = Category::kIC;
  std::string prompt;
  Scale scale = Scale::kBinary;
  double weight = 1.0;

  int MaxValue() const { return scale == Scale::kBinary ? 1 : 4; }
};

// Ordered criteria. ETR guideline categories (IC, SC, WC, Illustrations) are
// answered on the binary scale, General criteria on the 0-4 Likert scale.
class Questionnaire {
 public:
  // Throws etr::Error on an empty list, duplicate ids, a scale that does
  // not match the category, or a non-positive weight.
  explicit Questionnaire(std::vector<Criterion> criteria, std::string name = "");

  static Questionnaire FromJson(const Json& j);
  static Questionnaire Load(const std::filesystem::path& path);
  Json ToJson() const;

  const std::string& name() const { return name_; }
  const std::vector<Criterion>& criteria() const { return criteria_; }
  const Criterion* Find(std::string_view id) const;
  std::size_t Count(Scale scale) const;

 private:
  std::string name_;
  std::vector<Criterion> criteria_;
};

// One annotator's answers for one item. A criterion that is absent or null
// is missing.
struct AnnotationRecord {
  std::string annotator_id;
  std::string item_id;
  std::map<std::string, std::optional<int>> answers;
  std::string timestamp;

  // Same annotator, item and answers; the timestamp is ignored.
  bool SameContent(const AnnotationRecord& other) const;
};

Json RecordToJson(const AnnotationRecord& record);
// Throws etr::Error when a field is missing or an answer is not an integer.
AnnotationRecord RecordFromJson(const Json& j);

// Empty when the record conforms to the questionnaire.
std::vector<std::string> Validate(const AnnotationRecord& record, const Questionnaire& q);

// Annotation export: an optional header line {"header": {...,
// "questionnaire": {...}}} followed by one record per line.
struct AnnotationExport {
  std::optional<Questionnaire> questionnaire;
  Json header;
  std::vector<AnnotationRecord> records;
};

AnnotationExport ParseAnnotationExport(std::string_view content, const std::string& origin);
AnnotationExport LoadAnnotationExport(const std::filesystem::path& path);
// Records are written in (annotator, item) order.
std::string SerializeAnnotationExport(const Json& header, std::vector<AnnotationRecord> records);

enum class Level { kNominal, kInterval };
std::string_view LevelName(Level level);
std::optional<Level> ParseLevel(std::string_view name);

// Rows are annotators, columns are units; a cell is a value or missing.
struct ReliabilityMatrix {
  std::vector<std::string> annotators;
  std::vector<std::string> units;
  std::vector<std::vector<std::optional<double>>> cells;  // [annotator][unit]
};

// Krippendorff's alpha from the coincidence matrix, 1 - D_o / D_e. Units
// with fewer than two values are ignored. Returns exactly 1 when observed
// disagreement is 0. Throws etr::Error("insufficient data") with fewer than
// two annotators, no pairable values, or no expected disagreement.
double Alpha(const ReliabilityMatrix& matrix, Level level);

struct CriterionAlpha {
  std::string criterion_id;
  Level level = Level::kNominal;
  std::optional<double> alpha;  // undefined when data is insufficient
};

struct AlphaReport {
  std::vector<CriterionAlpha> per_criterion;
  std::optional<double> macro;  // mean over criteria with a defined alpha
};

// One matrix per criterion with items as units. Binary criteria use nominal
// and Likert criteria interval distance unless `force_level` is set.
AlphaReport PerCriterionAlpha(std::span<const AnnotationRecord> records, const Questionnaire& q,
                              std::optional<Level> force_level = std::nullopt);

// Likert answers become 1 iff value >= threshold (1..4); each (annotator,
// item, category) cell is the weighted mean of the category's binary
// answers. Units are "<item>/<category>".
ReliabilityMatrix BinarizeAndAggregate(std::span<const AnnotationRecord> records,
                                       const Questionnaire& q, int threshold);

// value >= cut becomes 1, otherwise 0; missing stays missing.
ReliabilityMatrix ThresholdMatrix(const ReliabilityMatrix& matrix, double cut);

struct Distribution {
  std::size_t n = 0;
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Linear interpolation between order statistics (p in [0, 1]).
double Quantile(std::span<const double> sorted, double p);
Distribution Describe(std::vector<double> values);

struct CategoryScore {
  std::string group;  // e.g. "<model>/<dataset>", "all" without grouping
  std::string label;  // category name, or the criterion id for General
  Distribution distribution;
};

// For every group: one row per ETR category (per-(annotator, item) weighted
// share of respected criteria) and one row per General criterion (raw 0-4
// answers). `item_groups` maps item ids to a group label.
std::vector<CategoryScore> CategoryScores(std::span<const AnnotationRecord> records,
                                          const Questionnaire& q,
                                          const std::map<std::string, std::string>* item_groups = nullptr);

Json AlphaReportToJson(const AlphaReport& report);
Json CategoryScoresToJson(std::span<const CategoryScore> scores);
std::string RenderAlphaReport(const AlphaReport& report, bool csv);
std::string RenderCategoryScores(std::span<const CategoryScore> scores, bool csv);

}  // namespace etr::agreement

#endif  // ETR_AGREEMENT_H_
