/*
 * Copyright 2026 The btel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef BTEL_ERROR_H_
#define BTEL_ERROR_H_

#include <stdexcept>
#include <string>

namespace btel {

// Malformed input: bad header, ragged CSV, non-finite value, corrupt model.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or invalid configuration value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// The requested storage budget cannot hold even a d' = 1 model.
class InfeasibleBudget : public std::runtime_error {
 public:
  InfeasibleBudget(const std::string& what, std::size_t minimum_bytes)
      : std::runtime_error(what), minimum_bytes_(minimum_bytes) {}

  std::size_t minimum_bytes() const { return minimum_bytes_; }

 private:
  std::size_t minimum_bytes_;
};

}  // namespace btel

#endif  // BTEL_ERROR_H_
