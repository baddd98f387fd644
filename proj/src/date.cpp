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

#include "qweather/date.hpp"

#include <charconv>
#include <cstdio>

#include "qweather/error.hpp"

namespace qweather {

namespace {

int parse_digits(std::string_view text, std::string_view whole) {
  int v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw ParseError("malformed date '" + std::string(whole) + "'");
  }
  std::from_chars(text.data(), text.data() + text.size(), v);
  return v;
}

Date make_date(int y, int m, int d, std::string_view whole) {
  const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw ParseError("invalid calendar date '" + std::string(whole) + "'");
  return date;
}

}  // namespace

Date parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParseError("malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  return make_date(parse_digits(text.substr(0, 4), text), parse_digits(text.substr(5, 2), text),
                   parse_digits(text.substr(8, 2), text), text);
}

Date parse_compact_date(std::string_view text) {
  if (text.size() != 8) throw ParseError("malformed date '" + std::string(text) + "', expected YYYYMMDD");
  return make_date(parse_digits(text.substr(0, 4), text), parse_digits(text.substr(4, 2), text),
                   parse_digits(text.substr(6, 2), text), text);
}

std::string to_iso(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::string to_compact(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02u%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

Date add_days(Date d, long days) { return Date{std::chrono::sys_days{d} + std::chrono::days{days}}; }

long days_between(Date a, Date b) {
  return (std::chrono::sys_days{b} - std::chrono::sys_days{a}).count();
}

}  // namespace qweather
