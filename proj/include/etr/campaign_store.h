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

#ifndef ETR_CAMPAIGN_STORE_H_
#define ETR_CAMPAIGN_STORE_H_

#include <cstddef>
#include <filesystem>
#include <vector>

#include "etr/agreement.h"

namespace etr::service {

// Crash-safe store for one campaign's accepted responses.
//
// Every accepted record is appended to responses.log as one JSON line and
// fsync'ed before Append returns. Every `snapshot_every` appends the full
// record list is written to snapshot.json (temp file + rename) and the log is
// truncated. Replay reads the snapshot, then the log, skipping records the
// snapshot already holds (a crash between rename and truncate leaves them in
// both) and ignoring a torn final line.
class ResponseLog {
 public:
  explicit ResponseLog(std::filesystem::path dir, std::size_t snapshot_every = 64);
  ~ResponseLog();

  ResponseLog(const ResponseLog&) = delete;
  ResponseLog& operator=(const ResponseLog&) = delete;

  // Records in acceptance order. Call once, before the first Append.
  std::vector<agreement::AnnotationRecord> Replay();

  // `all` is the complete accepted list including `record`; it is only read
  // when a snapshot is due.
  void Append(const agreement::AnnotationRecord& record,
              const std::vector<agreement::AnnotationRecord>& all);

  void WriteSnapshot(const std::vector<agreement::AnnotationRecord>& all);

 private:
  void OpenForAppend();

  std::filesystem::path dir_;
  std::size_t snapshot_every_;
  std::size_t since_snapshot_ = 0;
  int fd_ = -1;
};

}  // namespace etr::service

#endif  // ETR_CAMPAIGN_STORE_H_
