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

#ifndef ETR_EMBEDDINGS_H_
#define ETR_EMBEDDINGS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "etr/metrics.h"

namespace etr::metrics {

struct EmbeddedText {
  std::vector<std::string> tokens;
  std::vector<Vector> vectors;  // one per token
};

// Per-text token vectors produced by an external encoder.
//
// File format (UTF-8, one JSON object per line):
//
//   {"dimension": 768}
//   {"id": "doc-1", "tokens": ["Le", "chat"], "vectors": [[...], [...]]}
//
// The header record must come first. Every vector has exactly `dimension`
// finite components and there is one vector per token.
class EmbeddingTable {
 public:
  static EmbeddingTable Load(const std::filesystem::path& path);
  static EmbeddingTable Parse(std::string_view content, const std::string& origin);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return texts_.size(); }
  bool Contains(const std::string& id) const { return texts_.count(id) > 0; }
  // Throws etr::Error when the id is absent.
  const EmbeddedText& Get(const std::string& id) const;

  void Add(const std::string& id, EmbeddedText text);
  explicit EmbeddingTable(std::size_t dimension = 0) : dimension_(dimension) {}

 private:
  std::size_t dimension_;
  std::map<std::string, EmbeddedText> texts_;
};

}  // namespace etr::metrics

#endif  // ETR_EMBEDDINGS_H_
