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

#include "etr/agreement.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "etr/error.h"

namespace etr::agreement {

std::string_view CategoryName(Category c) {
  switch (c) {
    case Category::kIC: return "IC";
    case Category::kSC: return "SC";
    case Category::kWC: return "WC";
    case Category::kIllustrations: return "Illustrations";
    case Category::kGeneral: return "General";
  }
  return "";
}

std::optional<Category> ParseCategory(std::string_view name) {
  for (Category c : {Category::kIC, Category::kSC, Category::kWC, Category::kIllustrations,
                     Category::kGeneral}) {
    if (CategoryName(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view ScaleName(Scale s) { return s == Scale::kBinary ? "binary" : "likert5"; }

std::optional<Scale> ParseScale(std::string_view name) {
  if (name == "binary") return Scale::kBinary;
  if (name == "likert5") return Scale::kLikert5;
  return std::nullopt;
}

std::string_view LevelName(Level level) { return level == Level::kNominal ? "nominal" : "interval"; }

std::optional<Level> ParseLevel(std::string_view name) {
  if (name == "nominal") return Level::kNominal;
  if (name == "interval") return Level::kInterval;
  return std::nullopt;
}

Questionnaire::Questionnaire(std::vector<Criterion> criteria, std::string name)
    : name_(std::move(name)), criteria_(std::move(criteria)) {
  if (criteria_.empty()) throw Error("questionnaire has no criteria");
  std::set<std::string> ids;
  for (const auto& c : criteria_) {
    if (c.id.empty()) throw Error("criterion with empty id");
    if (!ids.insert(c.id).second) throw Error("duplicate criterion id '" + c.id + "'");
    const bool general = c.category == Category::kGeneral;
    if (general != (c.scale == Scale::kLikert5)) {
      throw Error(fmt::format("criterion '{}': scale {} does not match category {}", c.id,
                              ScaleName(c.scale), CategoryName(c.category)));
    }
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw Error("criterion '" + c.id + "': weight must be positive");
    }
  }
}

Questionnaire Questionnaire::FromJson(const Json& j) {
  if (!j.is_object() || !j.contains("criteria") || !j["criteria"].is_array()) {
    throw Error("questionnaire must be an object with a 'criteria' array");
  }
  std::vector<Criterion> criteria;
  for (const auto& item : j["criteria"]) {
    Criterion c;
    c.id = RequireString(item, "id");
    const std::string category = RequireString(item, "category");
    const auto cat = ParseCategory(category);
    if (!cat) throw Error("criterion '" + c.id + "': unknown category '" + category + "'");
    c.category = *cat;
    const std::string scale = RequireString(item, "scale");
    const auto sc = ParseScale(scale);
    if (!sc) throw Error("criterion '" + c.id + "': unknown scale '" + scale + "'");
    c.scale = *sc;
    c.prompt = OptionalString(item, "prompt");
    if (item.contains("weight")) {
      if (!item["weight"].is_number()) throw Error("criterion '" + c.id + "': weight must be a number");
      c.weight = item["weight"].get<double>();
    }
    criteria.push_back(std::move(c));
  }
  return Questionnaire(std::move(criteria), OptionalString(j, "name"));
}

Questionnaire Questionnaire::Load(const std::filesystem::path& path) {
  const std::string content = ReadFile(path);
  Json j;
  try {
    j = Json::parse(content);
  } catch (const Json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  try {
    return FromJson(j);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

Json Questionnaire::ToJson() const {
  Json criteria = Json::array();
  for (const auto& c : criteria_) {
    criteria.push_back({{"id", c.id},
                        {"category", CategoryName(c.category)},
                        {"prompt", c.prompt},
                        {"scale", ScaleName(c.scale)},
                        {"weight", c.weight}});
  }
  Json j = {{"criteria", criteria}};
  if (!name_.empty()) j["name"] = name_;
  return j;
}

const Criterion* Questionnaire::Find(std::string_view id) const {
  for (const auto& c : criteria_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::size_t Questionnaire::Count(Scale scale) const {
  return static_cast<std::size_t>(std::count_if(
      criteria_.begin(), criteria_.end(), [scale](const Criterion& c) { return c.scale == scale; }));
}

bool AnnotationRecord::SameContent(const AnnotationRecord& other) const {
  auto present = [](const std::map<std::string, std::optional<int>>& answers) {
    std::map<std::string, int> out;
    for (const auto& [k, v] : answers) {
      if (v) out[k] = *v;
    }
    return out;
  };
  return annotator_id == other.annotator_id && item_id == other.item_id &&
         present(answers) == present(other.answers);
}

Json RecordToJson(const AnnotationRecord& record) {
  Json answers = Json::object();
  for (const auto& [k, v] : record.answers) answers[k] = v ? Json(*v) : Json(nullptr);
  Json j = {{"annotator_id", record.annotator_id},
            {"item_id", record.item_id},
            {"answers", answers}};
  if (!record.timestamp.empty()) j["timestamp"] = record.timestamp;
  return j;
}

AnnotationRecord RecordFromJson(const Json& j) {
  if (!j.is_object()) throw Error("record must be a JSON object");
  AnnotationRecord r;
  r.annotator_id = RequireString(j, "annotator_id");
  r.item_id = RequireString(j, "item_id");
  r.timestamp = OptionalString(j, "timestamp");
  auto it = j.find("answers");
  if (it == j.end() || !it->is_object()) throw Error("record needs an 'answers' object");
  for (const auto& [k, v] : it->items()) {
    if (v.is_null()) {
      r.answers[k] = std::nullopt;
    } else if (v.is_number_integer()) {
      r.answers[k] = v.get<int>();
    } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
               std::abs(v.get<double>()) < 1e6) {
      r.answers[k] = static_cast<int>(v.get<double>());
    } else {
      throw Error("answer for '" + k + "' must be an integer or null");
    }
  }
  return r;
}

std::vector<std::string> Validate(const AnnotationRecord& record, const Questionnaire& q) {
  std::vector<std::string> reasons;
  if (record.annotator_id.empty()) reasons.push_back("empty annotator_id");
  if (record.item_id.empty()) reasons.push_back("empty item_id");
  for (const auto& [id, value] : record.answers) {
    const Criterion* c = q.Find(id);
    if (!c) {
      reasons.push_back("unknown criterion '" + id + "'");
      continue;
    }
    if (value && (*value < 0 || *value > c->MaxValue())) {
      reasons.push_back(fmt::format("criterion '{}': {} out of range 0–{}", id, *value,
                                    c->MaxValue()));
    }
  }
  return reasons;
}

AnnotationExport ParseAnnotationExport(std::string_view content, const std::string& origin) {
  AnnotationExport out;
  bool first = true;
  ForEachJsonLine(content, origin, [&](const Json& record, int) {
    if (first && record.contains("header")) {
      out.header = record["header"];
      if (out.header.contains("questionnaire")) {
        out.questionnaire = Questionnaire::FromJson(out.header["questionnaire"]);
      }
      first = false;
      return;
    }
    first = false;
    out.records.push_back(RecordFromJson(record));
  });
  return out;
}

AnnotationExport LoadAnnotationExport(const std::filesystem::path& path) {
  return ParseAnnotationExport(ReadFile(path), path.string());
}

std::string SerializeAnnotationExport(const Json& header, std::vector<AnnotationRecord> records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.annotator_id, a.item_id) < std::tie(b.annotator_id, b.item_id);
  });
  std::string out = ToLine(Json{{"header", header}}) + "\n";
  for (const auto& r : records) out += ToLine(RecordToJson(r)) + "\n";
  return out;
}

double Alpha(const ReliabilityMatrix& matrix, Level level) {
  if (matrix.annotators.size() < 2 || matrix.cells.size() < 2) throw Error("insufficient data");

  // Distinct values.
  std::vector<double> values;
  for (const auto& row : matrix.cells) {
    for (const auto& cell : row) {
      if (cell) values.push_back(*cell);
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t k = values.size();
  auto index_of = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
  };

  // Coincidence matrix.
  std::vector<double> o(k * k, 0.0);
  std::vector<double> counts(k);
  for (std::size_t u = 0; u < matrix.units.size(); ++u) {
    std::fill(counts.begin(), counts.end(), 0.0);
    double m = 0.0;
    for (const auto& row : matrix.cells) {
      if (u < row.size() && row[u]) {
        counts[index_of(*row[u])] += 1.0;
        m += 1.0;
      }
    }
    if (m < 2.0) continue;
    for (std::size_t a = 0; a < k; ++a) {
      if (counts[a] == 0.0) continue;
      for (std::size_t b = 0; b < k; ++b) {
        const double pairs = counts[a] * (a == b ? counts[b] - 1.0 : counts[b]);
        o[a * k + b] += pairs / (m - 1.0);
      }
    }
  }

  std::vector<double> marginals(k, 0.0);
  double n = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) marginals[a] += o[a * k + b];
    n += marginals[a];
  }
  if (n < 2.0) throw Error("insufficient data");

  auto delta2 = [&](std::size_t a, std::size_t b) {
    if (level == Level::kNominal) return a == b ? 0.0 : 1.0;
    const double d = values[a] - values[b];
    return d * d;
  };
  double observed = 0.0, expected = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      observed += o[a * k + b] * delta2(a, b);
      expected += marginals[a] * marginals[b] * delta2(a, b);
    }
  }
  observed /= n;
  expected /= n * (n - 1.0);
  if (!(expected > 0.0)) throw Error("insufficient data");
  if (observed == 0.0) return 1.0;
  return 1.0 - observed / expected;
}

namespace {

struct Indexed {
  std::vector<std::string> annotators;
  std::vector<std::string> items;
  // (annotator, item) -> record
  std::map<std::pair<std::string, std::string>, const AnnotationRecord*> by_key;
};

Indexed IndexRecords(std::span<const AnnotationRecord> records) {
  Indexed idx;
  std::set<std::string> annotators, items;
  for (const auto& r : records) {
    annotators.insert(r.annotator_id);
    items.insert(r.item_id);
    if (!idx.by_key.emplace(std::make_pair(r.annotator_id, r.item_id), &r).second) {
      throw Error("duplicate record for annotator '" + r.annotator_id + "' and item '" +
                  r.item_id + "'");
    }
  }
  idx.annotators.assign(annotators.begin(), annotators.end());
  idx.items.assign(items.begin(), items.end());
  return idx;
}

std::optional<int> AnswerOf(const AnnotationRecord& r, const std::string& criterion) {
  auto it = r.answers.find(criterion);
  return it == r.answers.end() ? std::nullopt : it->second;
}

// Weighted share of respected criteria within `category`; nullopt when none
// of them is answered. Likert answers are binarized at `threshold`.
std::optional<double> CategoryShare(const AnnotationRecord& r, const Questionnaire& q,
                                    Category category, int threshold) {
  double num = 0.0, den = 0.0;
  for (const auto& c : q.criteria()) {
    if (c.category != category) continue;
    const auto v = AnswerOf(r, c.id);
    if (!v) continue;
    const double b = c.scale == Scale::kBinary ? (*v != 0 ? 1.0 : 0.0) : (*v >= threshold ? 1.0 : 0.0);
    num += c.weight * b;
    den += c.weight;
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

constexpr Category kEtrCategories[] = {Category::kIC, Category::kSC, Category::kWC,
                                       Category::kIllustrations};

}  // namespace

AlphaReport PerCriterionAlpha(std::span<const AnnotationRecord> records, const Questionnaire& q,
                              std::optional<Level> force_level) {
  const Indexed idx = IndexRecords(records);
  AlphaReport report;
  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& c : q.criteria()) {
    CriterionAlpha ca;
    ca.criterion_id = c.id;
    ca.level = force_level.value_or(c.scale == Scale::kBinary ? Level::kNominal : Level::kInterval);
    ReliabilityMatrix m;
    m.annotators = idx.annotators;
    m.units = idx.items;
    for (const auto& a : idx.annotators) {
      std::vector<std::optional<double>> row;
      for (const auto& item : idx.items) {
        auto it = idx.by_key.find({a, item});
        std::optional<int> v = it == idx.by_key.end() ? std::nullopt : AnswerOf(*it->second, c.id);
        row.push_back(v ? std::optional<double>(*v) : std::nullopt);
      }
      m.cells.push_back(std::move(row));
    }
    try {
      ca.alpha = Alpha(m, ca.level);
      sum += *ca.alpha;
      ++defined;
    } catch (const Error&) {
      ca.alpha = std::nullopt;
    }
    report.per_criterion.push_back(std::move(ca));
  }
  if (defined > 0) report.macro = sum / static_cast<double>(defined);
  return report;
}

ReliabilityMatrix BinarizeAndAggregate(std::span<const AnnotationRecord> records,
                                       const Questionnaire& q, int threshold) {
  if (threshold < 1 || threshold > 4) throw Error("invalid threshold (expected 1..4)");
  const Indexed idx = IndexRecords(records);
  std::vector<Category> categories;
  for (Category cat : {Category::kIC, Category::kSC, Category::kWC, Category::kIllustrations,
                       Category::kGeneral}) {
    const bool used = std::any_of(q.criteria().begin(), q.criteria().end(),
                                  [cat](const Criterion& c) { return c.category == cat; });
    if (used) categories.push_back(cat);
  }
  ReliabilityMatrix m;
  m.annotators = idx.annotators;
  for (const auto& item : idx.items) {
    for (Category cat : categories) m.units.push_back(item + "/" + std::string(CategoryName(cat)));
  }
  for (const auto& a : idx.annotators) {
    std::vector<std::optional<double>> row;
    for (const auto& item : idx.items) {
      auto it = idx.by_key.find({a, item});
      for (Category cat : categories) {
        row.push_back(it == idx.by_key.end() ? std::nullopt
                                             : CategoryShare(*it->second, q, cat, threshold));
      }
    }
    m.cells.push_back(std::move(row));
  }
  return m;
}

ReliabilityMatrix ThresholdMatrix(const ReliabilityMatrix& matrix, double cut) {
  ReliabilityMatrix out = matrix;
  for (auto& row : out.cells) {
    for (auto& cell : row) {
      if (cell) cell = *cell >= cut ? 1.0 : 0.0;
    }
  }
  return out;
}

double Quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Distribution Describe(std::vector<double> values) {
  Distribution d;
  d.n = values.size();
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  d.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  d.min = values.front();
  d.max = values.back();
  d.q1 = Quantile(values, 0.25);
  d.median = Quantile(values, 0.5);
  d.q3 = Quantile(values, 0.75);
  return d;
}

std::vector<CategoryScore> CategoryScores(std::span<const AnnotationRecord> records,
                                          const Questionnaire& q,
                                          const std::map<std::string, std::string>* item_groups) {
  // group -> label -> values, in first-seen label order per group.
  std::map<std::string, std::vector<std::pair<std::string, std::vector<double>>>> groups;
  auto slot = [&](const std::string& group, const std::string& label) -> std::vector<double>& {
    auto& labels = groups[group];
    if (labels.empty()) {
      for (Category cat : kEtrCategories) labels.push_back({std::string(CategoryName(cat)), {}});
      for (const auto& c : q.criteria()) {
        if (c.category == Category::kGeneral) labels.push_back({c.id, {}});
      }
    }
    for (auto& [l, values] : labels) {
      if (l == label) return values;
    }
    labels.push_back({label, {}});
    return labels.back().second;
  };

  std::vector<const AnnotationRecord*> ordered;
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return std::tie(a->annotator_id, a->item_id) < std::tie(b->annotator_id, b->item_id);
  });
  for (const auto* r : ordered) {
    std::string group = "all";
    if (item_groups) {
      auto it = item_groups->find(r->item_id);
      if (it != item_groups->end()) group = it->second;
    }
    for (Category cat : kEtrCategories) {
      if (auto share = CategoryShare(*r, q, cat, /*threshold=*/1)) {
        slot(group, std::string(CategoryName(cat))).push_back(*share);
      }
    }
    for (const auto& c : q.criteria()) {
      if (c.category != Category::kGeneral) continue;
      if (auto v = AnswerOf(*r, c.id)) slot(group, c.id).push_back(*v);
    }
  }

  std::vector<CategoryScore> out;
  for (auto& [group, labels] : groups) {
    for (auto& [label, values] : labels) {
      if (values.empty()) continue;
      out.push_back({group, label, Describe(std::move(values))});
    }
  }
  return out;
}

Json AlphaReportToJson(const AlphaReport& report) {
  Json per = Json::array();
  for (const auto& c : report.per_criterion) {
    per.push_back({{"criterion_id", c.criterion_id},
                   {"level", LevelName(c.level)},
                   {"alpha", c.alpha ? Json(*c.alpha) : Json(nullptr)}});
  }
  return {{"per_criterion", per}, {"macro", report.macro ? Json(*report.macro) : Json(nullptr)}};
}

Json CategoryScoresToJson(std::span<const CategoryScore> scores) {
  Json out = Json::array();
  for (const auto& s : scores) {
    const auto& d = s.distribution;
    out.push_back({{"group", s.group}, {"label", s.label}, {"n", d.n}, {"mean", d.mean},
                   {"min", d.min}, {"q1", d.q1}, {"median", d.median}, {"q3", d.q3},
                   {"max", d.max}});
  }
  return out;
}

std::string RenderAlphaReport(const AlphaReport& report, bool csv) {
  auto value = [csv](const std::optional<double>& a) {
    if (!a) return std::string(csv ? "" : "undefined");
    return csv ? fmt::format("{}", *a) : fmt::format("{:.4f}", *a);
  };
  std::string out;
  if (csv) {
    out = "criterion,level,alpha\n";
    for (const auto& c : report.per_criterion) {
      out += fmt::format("{},{},{}\n", c.criterion_id, LevelName(c.level), value(c.alpha));
    }
    out += fmt::format("#macro,,{}\n", value(report.macro));
    return out;
  }
  std::size_t width = 9;
  for (const auto& c : report.per_criterion) width = std::max(width, c.criterion_id.size());
  out += fmt::format("{:<{}}  {:<8}  {:>9}\n", "criterion", width, "level", "alpha");
  for (const auto& c : report.per_criterion) {
    out += fmt::format("{:<{}}  {:<8}  {:>9}\n", c.criterion_id, width, LevelName(c.level), value(c.alpha));
  }
  out += fmt::format("{:<{}}  {:<8}  {:>9}\n", "macro", width, "", value(report.macro));
  return out;
}

std::string RenderCategoryScores(std::span<const CategoryScore> scores, bool csv) {
  std::string out;
  if (csv) {
    out = "group,label,n,mean,min,q1,median,q3,max\n";
    for (const auto& s : scores) {
      const auto& d = s.distribution;
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", s.group, s.label, d.n, d.mean, d.min,
                         d.q1, d.median, d.q3, d.max);
    }
    return out;
  }
  std::size_t gw = 5, lw = 5;
  for (const auto& s : scores) {
    gw = std::max(gw, s.group.size());
    lw = std::max(lw, s.label.size());
  }
  out += fmt::format("{:<{}}  {:<{}}  {:>5}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}\n", "group",
                     gw, "label", lw, "n", "mean", "min", "q1", "median", "q3", "max");
  for (const auto& s : scores) {
    const auto& d = s.distribution;
    out += fmt::format("{:<{}}  {:<{}}  {:>5}  {:>6.2f}  {:>6.2f}  {:>6.2f}  {:>6.2f}  {:>6.2f}  {:>6.2f}\n",
                       s.group, gw, s.label, lw, d.n, d.mean, d.min, d.q1, d.median, d.q3, d.max);
  }
  return out;
}

}  // namespace etr::agreement
