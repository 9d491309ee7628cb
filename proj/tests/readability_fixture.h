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

#ifndef ETR_TESTS_READABILITY_FIXTURE_H_
#define ETR_TESTS_READABILITY_FIXTURE_H_

#include "etr/metrics.h"

namespace fixture {

// Counts chosen by hand; expected values evaluated by hand from
// 209 - 1.15 w/s - 0.68 * 100 syl/w and w/s + 100 long/w.
struct ReadabilityCase {
  etr::metrics::ReadabilityCounts counts;
  double kmre;
  double lix;
};

inline const ReadabilityCase kReadability[] = {
    {{10, 1, 15, 0}, 95.5, 10.0},
    {{10, 2, 10, 2}, 135.25, 25.0},
    {{1, 1, 1, 0}, 139.85, 1.0},
    {{20, 4, 30, 5}, 101.25, 30.0},
    {{25, 1, 50, 10}, 44.25, 65.0},
    {{8, 8, 8, 0}, 139.85, 1.0},
    {{100, 5, 160, 30}, 77.2, 50.0},
    {{3, 2, 7, 1}, 207.275 - 476.0 / 3.0, 1.5 + 100.0 / 3.0},
    {{50, 10, 75, 12}, 101.25, 29.0},
    {{12, 3, 30, 6}, 34.4, 54.0},
};

}  // namespace fixture

#endif  // ETR_TESTS_READABILITY_FIXTURE_H_
