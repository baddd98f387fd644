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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qweather::util {

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);
/// Strict parse of a whole field; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string sha256_hex(std::string_view bytes);
/// SHA-1 over "blob <len>\0<bytes>", i.e. what `git hash-object` prints.
std::string git_blob_sha1_hex(std::string_view bytes);

}  // namespace qweather::util
