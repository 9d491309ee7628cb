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

#ifndef ETR_ERROR_H_
#define ETR_ERROR_H_

#include <stdexcept>
#include <string>

namespace etr {

// Invalid input or a request that violates a contract. The CLI maps it to
// exit status 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem or network failure. The CLI maps it to exit status 2.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

[[noreturn]] void ThrowIo(const std::string& what, const std::string& path);

}  // namespace etr

#endif  // ETR_ERROR_H_
