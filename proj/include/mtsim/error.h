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

#include <stdexcept>
#include <string>

namespace mtsim {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration, flags or input records.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Parse failure in a line-delimited file; carries the 1-based line number.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : ConfigError(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Unreadable, unwritable or undecodable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// A simulation constraint set that could not be met (retries exhausted,
// pool too small).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Arrangement preconditions violated (too many speakers, simultaneity).
class ArrangementError : public Error {
 public:
  using Error::Error;
};

// Scoring could not run within the configured limits.
class ScoringError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtsim
