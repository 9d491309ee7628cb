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

#include "etr/error.h"

#include <cerrno>
#include <cstring>

namespace etr {

void ThrowIo(const std::string& what, const std::string& path) {
  std::string msg = what + ": " + path;
  if (errno != 0) msg += " (" + std::string(std::strerror(errno)) + ")";
  throw IoError(msg);
}

}  // namespace etr
