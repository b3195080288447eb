// Copyright 2026 The mtsim Authors
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

#pragma once

#include <string>

#include "mtsim/text.h"

namespace mtsim {

// A placed transcript span inside a mixture. Intervals are half-open:
// [start_s, end_s).
struct Turn {
  std::string speaker;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;

  Tokens tokens() const { return tokenize(text); }
  bool operator==(const Turn&) const = default;
};

inline bool overlaps(const Turn& a, const Turn& b) {
  return a.start_s < b.end_s && b.start_s < a.end_s;
}

}  // namespace mtsim
