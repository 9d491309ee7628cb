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

#include "etr/service.h"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <random>
#include <regex>
#include <set>

#include "etr/error.h"
#include "etr/random.h"

namespace etr::service {

using agreement::AnnotationRecord;

PoolItem PoolItemFromJson(const Json& j) {
  PoolItem item;
  item.item_id = RequireString(j, "item_id");
  item.model_label = RequireString(j, "model_label");
  item.dataset_tag = RequireString(j, "dataset_tag");
  item.source = RequireString(j, "source");
  item.candidate = RequireString(j, "candidate");
  if (item.item_id.empty()) throw Error("pool item with empty item_id");
  return item;
}

Json PoolItemToJson(const PoolItem& item) {
  return {{"item_id", item.item_id},   {"model_label", item.model_label},
          {"dataset_tag", item.dataset_tag}, {"source", item.source},
          {"candidate", item.candidate}};
}

std::vector<PoolItem> LoadPool(const std::filesystem::path& path) {
  std::vector<PoolItem> pool;
  ForEachJsonLine(path, [&](const Json& j, int) { pool.push_back(PoolItemFromJson(j)); });
  return pool;
}

SamplingPolicy PolicyFromJson(const Json& j) {
  SamplingPolicy p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw Error("policy must be an object");
  auto count = [&](const char* key, int& field) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer() || j[key].get<int>() < 0) {
      throw Error(std::string("policy.") + key + " must be a non-negative integer");
    }
    field = j[key].get<int>();
  };
  count("per_model_in_domain", p.per_model_in_domain);
  count("per_model_out_domain", p.per_model_out_domain);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw Error("policy.seed must be a non-negative integer");
    p.seed = j["seed"].get<std::uint64_t>();
  }
  p.in_domain_tag = OptionalString(j, "in_domain_tag", p.in_domain_tag);
  p.out_domain_tag = OptionalString(j, "out_domain_tag", p.out_domain_tag);
  p.presentation = OptionalString(j, "presentation", p.presentation);
  if (p.presentation != "shuffled" && p.presentation != "blocked") {
    throw Error("policy.presentation must be 'shuffled' or 'blocked'");
  }
  return p;
}

Json PolicyToJson(const SamplingPolicy& p) {
  return {{"per_model_in_domain", p.per_model_in_domain},
          {"per_model_out_domain", p.per_model_out_domain},
          {"seed", p.seed},
          {"in_domain_tag", p.in_domain_tag},
          {"out_domain_tag", p.out_domain_tag},
          {"presentation", p.presentation}};
}

std::vector<std::string> SampleItems(const std::vector<PoolItem>& pool, const SamplingPolicy& policy) {
  // model -> tag -> item ids
  std::map<std::string, std::map<std::string, std::vector<std::string>>> by_model;
  std::map<std::string, const PoolItem*> by_id;
  for (const auto& item : pool) {
    if (!by_id.emplace(item.item_id, &item).second) {
      throw Error("duplicate item_id '" + item.item_id + "' in pool");
    }
    by_model[item.model_label][item.dataset_tag].push_back(item.item_id);
  }
  if (by_model.empty()) throw Error("empty item pool");

  SeededRng rng(policy.seed);
  std::vector<std::string> sampled;
  const std::pair<const std::string*, int> wanted[] = {
      {&policy.in_domain_tag, policy.per_model_in_domain},
      {&policy.out_domain_tag, policy.per_model_out_domain}};
  for (auto& [model, tags] : by_model) {
    for (const auto& [tag, count] : wanted) {
      auto ids = tags[*tag];
      if (ids.size() < static_cast<std::size_t>(count)) {
        throw Error(fmt::format("insufficient pool for model '{}' and dataset '{}': need {}, have {}",
                                model, *tag, count, ids.size()));
      }
      std::sort(ids.begin(), ids.end());
      rng.Shuffle(ids);
      sampled.insert(sampled.end(), ids.begin(), ids.begin() + count);
    }
  }

  if (policy.presentation == "shuffled") {
    rng.Shuffle(sampled);
  } else {
    auto rank = [&](const std::string& id) {
      const PoolItem& it = *by_id.at(id);
      return std::make_tuple(it.dataset_tag == policy.in_domain_tag ? 0 : 1, it.model_label, id);
    };
    std::sort(sampled.begin(), sampled.end(),
              [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  }
  return sampled;
}

namespace {

struct State {
  std::vector<AnnotationRecord> records;  // acceptance order
  std::map<std::pair<std::string, std::string>, std::size_t> index;
};

bool ValidId(const std::string& id) {
  static const std::regex pattern("[A-Za-z0-9_][A-Za-z0-9._-]{0,63}");
  return std::regex_match(id, pattern);
}

std::string NewToken() {
  std::random_device rd;
  std::string token;
  for (int i = 0; i < 4; ++i) token += fmt::format("{:08x}", rd());
  return token;
}

std::string UtcNow() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

constexpr const char* kCampaignFile = "campaign.json";

}  // namespace

struct CampaignService::Campaign {
  std::string id;
  agreement::Questionnaire questionnaire;
  std::vector<PoolItem> pool;
  std::map<std::string, std::size_t> pool_index;
  std::vector<std::string> assigned;
  std::set<std::string> assigned_set;
  std::vector<std::string> roster;
  std::map<std::string, std::string> tokens;
  SamplingPolicy policy;
  std::filesystem::path dir;
  std::unique_ptr<ResponseLog> log;

  std::mutex write_mu;
  mutable std::mutex state_mu;  // guards the pointer swap only
  std::shared_ptr<const State> state = std::make_shared<State>();

  Campaign(std::string id_, agreement::Questionnaire q) : id(std::move(id_)), questionnaire(std::move(q)) {}

  std::shared_ptr<const State> Snapshot() const {
    std::lock_guard<std::mutex> lock(state_mu);
    return state;
  }

  void Publish(std::shared_ptr<const State> next) {
    std::lock_guard<std::mutex> lock(state_mu);
    state = std::move(next);
  }

  void Index() {
    pool_index.clear();
    for (std::size_t i = 0; i < pool.size(); ++i) pool_index[pool[i].item_id] = i;
    assigned_set = {assigned.begin(), assigned.end()};
  }

  Json ToJson() const {
    Json pool_json = Json::array();
    for (const auto& item : pool) pool_json.push_back(PoolItemToJson(item));
    return {{"campaign_id", id},       {"questionnaire", questionnaire.ToJson()},
            {"pool", pool_json},       {"assigned", assigned},
            {"roster", roster},        {"tokens", tokens},
            {"policy", PolicyToJson(policy)}};
  }

  static std::shared_ptr<Campaign> FromJson(const Json& j, std::filesystem::path dir) {
    auto c = std::make_shared<Campaign>(j.at("campaign_id").get<std::string>(),
                                        agreement::Questionnaire::FromJson(j.at("questionnaire")));
    for (const auto& item : j.at("pool")) c->pool.push_back(PoolItemFromJson(item));
    c->assigned = j.at("assigned").get<std::vector<std::string>>();
    c->roster = j.at("roster").get<std::vector<std::string>>();
    c->tokens = j.at("tokens").get<std::map<std::string, std::string>>();
    c->policy = PolicyFromJson(j.at("policy"));
    c->dir = std::move(dir);
    c->Index();
    return c;
  }

  void OpenLog(std::size_t snapshot_every) {
    log = std::make_unique<ResponseLog>(dir, snapshot_every);
    auto next = std::make_shared<State>();
    for (auto& r : log->Replay()) {
      next->index[{r.annotator_id, r.item_id}] = next->records.size();
      next->records.push_back(std::move(r));
    }
    Publish(std::move(next));
  }
};

CampaignService::CampaignService(std::filesystem::path data_dir, ServiceOptions options)
    : data_dir_(std::move(data_dir)), options_(options) {
  std::error_code ec;
  std::filesystem::create_directories(data_dir_, ec);
  if (ec) throw IoError("cannot create data directory " + data_dir_.string() + ": " + ec.message());
  LoadExisting();
}

CampaignService::~CampaignService() = default;

void CampaignService::LoadExisting() {
  for (const auto& entry : std::filesystem::directory_iterator(data_dir_)) {
    if (!entry.is_directory()) continue;
    const auto file = entry.path() / kCampaignFile;
    if (!std::filesystem::exists(file)) continue;
    Json j;
    try {
      j = Json::parse(ReadFile(file));
    } catch (const Json::exception& e) {
      throw Error(file.string() + ": " + e.what());
    }
    auto campaign = Campaign::FromJson(j, entry.path());
    campaign->OpenLog(options_.snapshot_every);
    campaigns_[campaign->id] = std::move(campaign);
  }
}

std::shared_ptr<CampaignService::Campaign> CampaignService::Find(const std::string& campaign_id) const {
  std::shared_lock lock(campaigns_mu_);
  auto it = campaigns_.find(campaign_id);
  if (it == campaigns_.end()) throw NotFound("unknown campaign '" + campaign_id + "'");
  return it->second;
}

std::vector<std::string> CampaignService::CampaignIds() const {
  std::shared_lock lock(campaigns_mu_);
  std::vector<std::string> ids;
  for (const auto& [id, c] : campaigns_) ids.push_back(id);
  return ids;
}

CreatedCampaign CampaignService::CreateCampaign(CampaignSpec spec) {
  if (spec.roster.empty()) throw Error("roster is empty");
  std::set<std::string> names;
  for (const auto& a : spec.roster) {
    if (!ValidId(a)) throw Error("invalid annotator id '" + a + "'");
    if (!names.insert(a).second) throw Error("duplicate annotator '" + a + "'");
  }
  auto assigned = SampleItems(spec.pool, spec.policy);

  std::unique_lock lock(campaigns_mu_);
  std::string id = spec.campaign_id;
  if (id.empty()) {
    for (int n = 1;; ++n) {
      id = fmt::format("campaign-{:04d}", n);
      if (!campaigns_.count(id) && !std::filesystem::exists(data_dir_ / id)) break;
    }
  } else if (!ValidId(id)) {
    throw Error("invalid campaign id '" + id + "'");
  } else if (campaigns_.count(id) || std::filesystem::exists(data_dir_ / id)) {
    throw Error("campaign '" + id + "' already exists");
  }

  auto campaign = std::make_shared<Campaign>(id, std::move(spec.questionnaire));
  campaign->pool = std::move(spec.pool);
  campaign->assigned = std::move(assigned);
  campaign->roster = std::move(spec.roster);
  campaign->policy = spec.policy;
  campaign->dir = data_dir_ / id;
  for (const auto& a : campaign->roster) campaign->tokens[a] = NewToken();
  campaign->Index();

  std::error_code ec;
  std::filesystem::create_directories(campaign->dir, ec);
  if (ec) throw IoError("cannot create " + campaign->dir.string() + ": " + ec.message());
  WriteFileAtomic(campaign->dir / kCampaignFile, campaign->ToJson().dump(2));
  campaign->OpenLog(options_.snapshot_every);
  campaigns_[id] = campaign;

  return {id, campaign->tokens, campaign->assigned.size()};
}

SubmitResult CampaignService::Submit(const std::string& campaign_id, AnnotationRecord record) {
  auto c = Find(campaign_id);
  SubmitResult result;
  if (std::find(c->roster.begin(), c->roster.end(), record.annotator_id) == c->roster.end()) {
    result.reasons.push_back("unknown annotator '" + record.annotator_id + "'");
  }
  if (!c->assigned_set.count(record.item_id)) {
    result.reasons.push_back("item '" + record.item_id + "' is not assigned");
  }
  for (auto& reason : agreement::Validate(record, c->questionnaire)) {
    result.reasons.push_back(std::move(reason));
  }
  if (!result.reasons.empty()) {
    result.status = SubmitStatus::kRejected;
    return result;
  }

  std::lock_guard<std::mutex> writer(c->write_mu);
  const auto current = c->Snapshot();
  const auto key = std::make_pair(record.annotator_id, record.item_id);
  if (auto it = current->index.find(key); it != current->index.end()) {
    if (current->records[it->second].SameContent(record)) {
      result.status = SubmitStatus::kDuplicate;
    } else {
      result.status = SubmitStatus::kConflict;
      result.reasons.push_back("conflicting resubmission for item '" + record.item_id + "'");
    }
    return result;
  }
  if (record.timestamp.empty()) record.timestamp = UtcNow();
  auto next = std::make_shared<State>(*current);
  next->index[key] = next->records.size();
  next->records.push_back(record);
  c->log->Append(record, next->records);
  c->Publish(std::move(next));
  result.status = SubmitStatus::kAccepted;
  return result;
}

std::map<std::string, AnnotatorProgress> CampaignService::Progress(const std::string& campaign_id) const {
  auto c = Find(campaign_id);
  const auto state = c->Snapshot();
  std::map<std::string, AnnotatorProgress> out;
  for (const auto& a : c->roster) out[a] = {0, c->assigned.size()};
  for (const auto& r : state->records) {
    auto& p = out[r.annotator_id];
    ++p.done;
    --p.pending;
  }
  return out;
}

std::vector<AnnotationRecord> CampaignService::Records(const std::string& campaign_id) const {
  return Find(campaign_id)->Snapshot()->records;
}

std::string CampaignService::Export(const std::string& campaign_id) const {
  auto c = Find(campaign_id);
  const Json header = {{"format", "etr-annotations"},
                       {"version", 1},
                       {"campaign_id", c->id},
                       {"questionnaire", c->questionnaire.ToJson()}};
  return agreement::SerializeAnnotationExport(header, c->Snapshot()->records);
}

Json CampaignService::AgreementReport(const std::string& campaign_id,
                                      std::optional<agreement::Level> level,
                                      std::optional<int> threshold) {
  auto c = Find(campaign_id);
  const auto state = c->Snapshot();
  const auto& records = state->records;

  std::map<std::string, std::size_t> raters_per_item;
  for (const auto& r : records) ++raters_per_item[r.item_id];
  const bool overlap = std::any_of(raters_per_item.begin(), raters_per_item.end(),
                                   [](const auto& kv) { return kv.second >= 2; });
  if (!overlap) throw Error("insufficient data");

  const auto alphas = agreement::PerCriterionAlpha(records, c->questionnaire, level);
  if (!alphas.macro) throw Error("insufficient data");

  Json report = agreement::AlphaReportToJson(alphas);
  report["campaign_id"] = c->id;
  report["level"] = level ? std::string(agreement::LevelName(*level)) : std::string("auto");
  if (threshold) {
    const auto matrix = agreement::ThresholdMatrix(
        agreement::BinarizeAndAggregate(records, c->questionnaire, *threshold), 0.5);
    Json binarized = {{"threshold", *threshold}, {"cut", 0.5}, {"alpha", nullptr}};
    try {
      binarized["alpha"] = agreement::Alpha(matrix, agreement::Level::kNominal);
    } catch (const Error&) {
    }
    report["binarized"] = binarized;
  }
  std::map<std::string, std::string> groups;
  for (const auto& item : c->pool) groups[item.item_id] = item.model_label + "/" + item.dataset_tag;
  report["category_scores"] =
      agreement::CategoryScoresToJson(agreement::CategoryScores(records, c->questionnaire, &groups));

  WriteFileAtomic(c->dir / "agreement.json", report.dump(2));
  return report;
}

Json CampaignService::PublicInfo(const std::string& campaign_id) const {
  auto c = Find(campaign_id);
  return {{"campaign_id", c->id},
          {"questionnaire", c->questionnaire.ToJson()},
          {"roster", c->roster},
          {"items_per_annotator", c->assigned.size()}};
}

Json CampaignService::Assignment(const std::string& campaign_id, const std::string& annotator) const {
  auto c = Find(campaign_id);
  if (std::find(c->roster.begin(), c->roster.end(), annotator) == c->roster.end()) {
    throw NotFound("unknown annotator '" + annotator + "'");
  }
  const auto state = c->Snapshot();
  Json items = Json::array();
  for (const auto& id : c->assigned) {
    const PoolItem& item = c->pool[c->pool_index.at(id)];
    Json entry = {{"item_id", id}, {"source", item.source}, {"candidate", item.candidate}};
    auto it = state->index.find({annotator, id});
    if (it == state->index.end()) {
      entry["status"] = "pending";
      entry["answers"] = nullptr;
    } else {
      entry["status"] = "done";
      entry["answers"] = agreement::RecordToJson(state->records[it->second])["answers"];
    }
    items.push_back(std::move(entry));
  }
  return {{"campaign_id", c->id}, {"annotator_id", annotator}, {"items", items}};
}

bool CampaignService::CheckToken(const std::string& campaign_id, const std::string& annotator,
                                 const std::string& token) const {
  auto c = Find(campaign_id);
  auto it = c->tokens.find(annotator);
  return it != c->tokens.end() && !token.empty() && it->second == token;
}

std::optional<std::string> CampaignService::AnnotatorForToken(const std::string& campaign_id,
                                                              const std::string& token) const {
  auto c = Find(campaign_id);
  for (const auto& [annotator, t] : c->tokens) {
    if (!token.empty() && t == token) return annotator;
  }
  return std::nullopt;
}

}  // namespace etr::service
