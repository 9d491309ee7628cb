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

#include "etr/campaign_store.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <set>

#include "etr/error.h"
#include "etr/jsonl.h"

namespace etr::service {
namespace {

constexpr const char* kLogName = "responses.log";
constexpr const char* kSnapshotName = "snapshot.json";

void WriteAll(int fd, std::string_view data, const std::filesystem::path& path) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      ThrowIo("append failed", path.string());
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

ResponseLog::ResponseLog(std::filesystem::path dir, std::size_t snapshot_every)
    : dir_(std::move(dir)), snapshot_every_(snapshot_every == 0 ? 1 : snapshot_every) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
}

ResponseLog::~ResponseLog() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<agreement::AnnotationRecord> ResponseLog::Replay() {
  std::vector<agreement::AnnotationRecord> records;
  std::set<std::string> keys;  // serialized content already loaded
  const auto snapshot = dir_ / kSnapshotName;
  if (std::filesystem::exists(snapshot)) {
    const Json j = Json::parse(ReadFile(snapshot));
    for (const auto& r : j.at("records")) {
      records.push_back(agreement::RecordFromJson(r));
      keys.insert(ToLine(r));
    }
  }

  const auto log = dir_ / kLogName;
  if (std::filesystem::exists(log)) {
    std::string content = ReadFile(log);
    // Drop a torn tail left by a crash in the middle of an append.
    const auto last_newline = content.rfind('\n');
    const std::size_t complete = last_newline == std::string::npos ? 0 : last_newline + 1;
    if (complete != content.size()) {
      std::filesystem::resize_file(log, complete);
      content.resize(complete);
    }
    ForEachJsonLine(content, log.string(), [&](const Json& r, int) {
      if (keys.insert(ToLine(r)).second) records.push_back(agreement::RecordFromJson(r));
    });
  }
  OpenForAppend();
  return records;
}

void ResponseLog::OpenForAppend() {
  if (fd_ >= 0) return;
  const auto log = dir_ / kLogName;
  errno = 0;
  fd_ = ::open(log.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) ThrowIo("cannot open", log.string());
}

void ResponseLog::Append(const agreement::AnnotationRecord& record,
                         const std::vector<agreement::AnnotationRecord>& all) {
  OpenForAppend();
  const auto log = dir_ / kLogName;
  WriteAll(fd_, ToLine(agreement::RecordToJson(record)) + "\n", log);
  if (::fdatasync(fd_) != 0) ThrowIo("fsync failed", log.string());
  if (++since_snapshot_ >= snapshot_every_) WriteSnapshot(all);
}

void ResponseLog::WriteSnapshot(const std::vector<agreement::AnnotationRecord>& all) {
  Json records = Json::array();
  for (const auto& r : all) records.push_back(agreement::RecordToJson(r));
  WriteFileAtomic(dir_ / kSnapshotName, Json{{"count", all.size()}, {"records", records}}.dump());
  OpenForAppend();
  const auto log = dir_ / kLogName;
  if (::ftruncate(fd_, 0) != 0) ThrowIo("truncate failed", log.string());
  if (::fdatasync(fd_) != 0) ThrowIo("fsync failed", log.string());
  since_snapshot_ = 0;
}

}  // namespace etr::service
