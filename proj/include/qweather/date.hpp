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

#include <chrono>
#include <string>
#include <string_view>

namespace qweather {

using Date = std::chrono::year_month_day;

/// Parses `YYYY-MM-DD`. Throws ParseError on malformed or invalid dates.
Date parse_iso_date(std::string_view text);
/// Parses `YYYYMMDD` as used by the POWER API.
Date parse_compact_date(std::string_view text);

std::string to_iso(Date d);
std::string to_compact(Date d);

Date add_days(Date d, long days);
/// b - a in days.
long days_between(Date a, Date b);

}  // namespace qweather
