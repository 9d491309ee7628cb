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

#ifndef ETR_SERVICE_H_
#define ETR_SERVICE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "etr/agreement.h"
#include "etr/campaign_store.h"
#include "etr/error.h"
#include "etr/jsonl.h"

namespace etr::service {

struct PoolItem {
  std::string item_id;
  std::string model_label;
  std::string dataset_tag;
  std::string source;
  std::string candidate;
};

PoolItem PoolItemFromJson(const Json& j);
Json PoolItemToJson(const PoolItem& item);
// One PoolItem object per line.
std::vector<PoolItem> LoadPool(const std::filesystem::path& path);

struct SamplingPolicy {
  int per_model_in_domain = 20;
  int per_model_out_domain = 10;
  std::uint64_t seed = 0;
  std::string in_domain_tag = "etr-fr";
  std::string out_domain_tag = "etr-fr-politic";
  // "shuffled": seeded shuffle of the sampled items; "blocked": grouped by
  // dataset tag, then model, then item id.
  std::string presentation = "shuffled";
};

SamplingPolicy PolicyFromJson(const Json& j);
Json PolicyToJson(const SamplingPolicy& policy);

// The ordered item ids every annotator receives. For each model label the
// policy's counts are drawn from that model's in-domain and out-of-domain
// items by a seeded shuffle of their sorted ids. Throws etr::Error naming
// the first deficient (model, tag).
std::vector<std::string> SampleItems(const std::vector<PoolItem>& pool, const SamplingPolicy& policy);

struct CampaignSpec {
  std::string campaign_id;  // generated when empty
  agreement::Questionnaire questionnaire;
  std::vector<PoolItem> pool;
  std::vector<std::string> roster;
  SamplingPolicy policy;
};

struct CreatedCampaign {
  std::string campaign_id;
  std::map<std::string, std::string> tokens;  // annotator -> bearer token
  std::size_t items_per_annotator = 0;
};

enum class SubmitStatus { kAccepted, kDuplicate, kRejected, kConflict };

struct SubmitResult {
  SubmitStatus status = SubmitStatus::kRejected;
  std::vector<std::string> reasons;
};

struct AnnotatorProgress {
  std::size_t done = 0;
  std::size_t pending = 0;
};

// Thrown for an unknown campaign id.
class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what) : Error(what) {}
};

struct ServiceOptions {
  std::size_t snapshot_every = 64;
};

// Annotation campaigns persisted under one data directory, one
// subdirectory per campaign. Submissions to a campaign are serialized by a
// per-campaign writer lock; readers take an immutable snapshot of the
// accepted records and never wait on a writer's disk I/O.
class CampaignService {
 public:
  explicit CampaignService(std::filesystem::path data_dir, ServiceOptions options = {});
  ~CampaignService();

  CreatedCampaign CreateCampaign(CampaignSpec spec);

  SubmitResult Submit(const std::string& campaign_id, agreement::AnnotationRecord record);

  std::map<std::string, AnnotatorProgress> Progress(const std::string& campaign_id) const;

  // Header line (campaign id and questionnaire), then accepted records in
  // (annotator, item) order.
  std::string Export(const std::string& campaign_id) const;

  // Per-criterion and macro alpha, the binarized-aggregate alpha when a
  // threshold is given, and category score tables grouped by model and
  // dataset. The report is also written to the campaign directory.
  Json AgreementReport(const std::string& campaign_id, std::optional<agreement::Level> level,
                       std::optional<int> threshold);

  // Campaign description safe to show annotators: no model labels.
  Json PublicInfo(const std::string& campaign_id) const;

  // The annotator's items in presentation order with source, candidate and
  // any accepted answers. No model labels.
  Json Assignment(const std::string& campaign_id, const std::string& annotator) const;

  bool CheckToken(const std::string& campaign_id, const std::string& annotator,
                  const std::string& token) const;
  // Annotator owning `token` in the campaign, if any.
  std::optional<std::string> AnnotatorForToken(const std::string& campaign_id,
                                               const std::string& token) const;

  std::vector<std::string> CampaignIds() const;
  std::vector<agreement::AnnotationRecord> Records(const std::string& campaign_id) const;

 private:
  struct Campaign;
  std::shared_ptr<Campaign> Find(const std::string& campaign_id) const;
  void LoadExisting();

  std::filesystem::path data_dir_;
  ServiceOptions options_;
  mutable std::shared_mutex campaigns_mu_;
  std::map<std::string, std::shared_ptr<Campaign>> campaigns_;
};

}  // namespace etr::service

#endif  // ETR_SERVICE_H_
