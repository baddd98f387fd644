// Copyright 2026 The qweather Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qweather {

/// Failure class of an error. The numeric values of the first four double as
/// CLI exit codes.
enum class ErrorKind : int {
  config = 2,
  data = 3,
  training = 4,
  report = 5,
  invalid_argument = 6,
  io = 7,
  internal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Network or HTTP failure. Safe to retry with the same request key.
class TransportError : public Error {
 public:
  TransportError(std::string request_key, const std::string& what)
      : Error(ErrorKind::data, what + " (request " + request_key + ")"), request_key_(std::move(request_key)) {}
  [[nodiscard]] const std::string& request_key() const noexcept { return request_key_; }
  [[nodiscard]] static constexpr bool retriable() noexcept { return true; }

 private:
  std::string request_key_;
};

/// Malformed payload or file. `line` is 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(ErrorKind::data, line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class MissingParameterError : public Error {
 public:
  MissingParameterError(const std::string& code, std::vector<std::string> available)
      : Error(ErrorKind::data, build_message(code, available)), available_(std::move(available)) {}
  [[nodiscard]] const std::vector<std::string>& available() const noexcept { return available_; }

 private:
  static std::string build_message(const std::string& code, const std::vector<std::string>& available) {
    std::string msg = "parameter '" + code + "' not present; available:";
    for (const auto& a : available) msg += " " + a;
    return msg;
  }
  std::vector<std::string> available_;
};

/// Pearson correlation is undefined (constant or too-short series).
class UndefinedCorrelationError : public Error {
 public:
  explicit UndefinedCorrelationError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what) : Error(ErrorKind::training, what) {}
};

class ReportError : public Error {
 public:
  explicit ReportError(const std::string& what) : Error(ErrorKind::report, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

}  // namespace qweather
