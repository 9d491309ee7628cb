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

#include "etr/jsonl.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <fstream>
#include <sstream>

#include "etr/error.h"

namespace etr {

std::string ReadFile(const std::filesystem::path& path) {
  errno = 0;
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) ThrowIo("read failed", path.string());
  return buf.str();
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view data) {
  auto tmp = path;
  tmp += ".tmp";
  errno = 0;
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) ThrowIo("cannot write", tmp.string());
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      ThrowIo("write failed", tmp.string());
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    ThrowIo("fsync failed", tmp.string());
  }
  ::close(fd);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void ForEachJsonLine(std::string_view text, const std::string& origin,
                     const std::function<void(const Json&, int)>& fn) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(origin + ":" + std::to_string(line_no) +
                  ": malformed record: " + e.what());
    }
    if (!record.is_object()) {
      throw Error(origin + ":" + std::to_string(line_no) +
                  ": malformed record: expected a JSON object");
    }
    try {
      fn(record, line_no);
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      throw Error(origin + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Json::exception& e) {
      throw Error(origin + ":" + std::to_string(line_no) +
                  ": malformed record: " + e.what());
    }
  }
}

void ForEachJsonLine(const std::filesystem::path& path,
                     const std::function<void(const Json&, int)>& fn) {
  ForEachJsonLine(ReadFile(path), path.string(), fn);
}

std::string ToLine(const Json& record) { return record.dump(); }

std::string RequireString(const Json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end()) throw Error(std::string("missing field '") + field + "'");
  if (!it->is_string()) throw Error(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

std::string OptionalString(const Json& record, const char* field,
                           const std::string& fallback) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw Error(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

}  // namespace etr
