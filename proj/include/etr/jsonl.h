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

#ifndef ETR_JSONL_H_
#define ETR_JSONL_H_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace etr {

using Json = nlohmann::json;

// Calls `fn(record, line_number)` for every non-blank line of a UTF-8
// line-delimited JSON file. Line numbers start at 1. Parse failures and
// etr::Error thrown by `fn` are reported as etr::Error prefixed with
// "file:line: "; an unreadable file as etr::IoError.
void ForEachJsonLine(const std::filesystem::path& path,
                     const std::function<void(const Json&, int)>& fn);

// Same, over an in-memory buffer. `origin` is used in error messages.
void ForEachJsonLine(std::string_view text, const std::string& origin,
                     const std::function<void(const Json&, int)>& fn);

std::string ReadFile(const std::filesystem::path& path);

// Writes via a temporary file and rename so readers never see a partial file.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

// Compact single-line serialization with sorted keys (nlohmann objects are
// already key-ordered), used for every line-delimited output.
std::string ToLine(const Json& record);

// Field accessors that raise etr::Error with a readable message.
std::string RequireString(const Json& record, const char* field);
std::string OptionalString(const Json& record, const char* field,
                           const std::string& fallback = "");

}  // namespace etr

#endif  // ETR_JSONL_H_
