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
#include <string_view>
#include <vector>

namespace mtsim {

using Tokens = std::vector<std::string>;

// Change-of-turn token inserted between consecutive turns on one channel.
inline constexpr std::string_view kCotToken = "<cot>";

// Whitespace tokenization; used everywhere a transcript becomes words.
Tokens tokenize(std::string_view text);

std::string join(const Tokens& tokens, std::string_view sep = " ");

// Scoring-time normalization: lowercase and strip leading/trailing ASCII
// punctuation per token. Tokens that become empty are dropped.
Tokens normalize(const Tokens& tokens);

// Removes every occurrence of `token`.
Tokens strip_token(const Tokens& tokens, std::string_view token);

}  // namespace mtsim
