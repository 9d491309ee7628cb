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

#include "etr/embeddings.h"

#include <cmath>

#include "etr/error.h"
#include "etr/jsonl.h"

namespace etr::metrics {

void EmbeddingTable::Add(const std::string& id, EmbeddedText text) {
  if (text.vectors.size() != text.tokens.size()) {
    throw Error("embedding for '" + id + "': vector count differs from token count");
  }
  for (const auto& v : text.vectors) {
    if (v.size() != dimension_) throw Error("embedding for '" + id + "': dimension mismatch");
    for (double x : v) {
      if (!std::isfinite(x)) throw Error("embedding for '" + id + "': non-finite component");
    }
  }
  if (!texts_.emplace(id, std::move(text)).second) {
    throw Error("duplicate embedding id '" + id + "'");
  }
}

const EmbeddedText& EmbeddingTable::Get(const std::string& id) const {
  auto it = texts_.find(id);
  if (it == texts_.end()) throw Error("missing embedding for id '" + id + "'");
  return it->second;
}

EmbeddingTable EmbeddingTable::Parse(std::string_view content, const std::string& origin) {
  EmbeddingTable table;
  bool have_header = false;
  ForEachJsonLine(content, origin, [&](const Json& record, int) {
    if (!have_header) {
      auto dim = record.find("dimension");
      if (dim == record.end() || !dim->is_number_unsigned() || dim->get<std::size_t>() == 0) {
        throw Error("first record must be a header {\"dimension\": d} with d > 0");
      }
      table.dimension_ = dim->get<std::size_t>();
      have_header = true;
      return;
    }
    EmbeddedText text;
    const std::string id = RequireString(record, "id");
    text.tokens = record.at("tokens").get<std::vector<std::string>>();
    text.vectors = record.at("vectors").get<std::vector<Vector>>();
    table.Add(id, std::move(text));
  });
  if (!have_header) throw Error(origin + ": missing header record");
  return table;
}

EmbeddingTable EmbeddingTable::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path), path.string());
}

}  // namespace etr::metrics
