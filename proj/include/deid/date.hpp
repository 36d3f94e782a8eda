// Copyright 2026 The Deid Authors
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

// Civil-date helpers. Dates are plain std::chrono::sys_days; release weeks
// run Sunday through Saturday.

#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "deid/error.hpp"

namespace deid {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD. Throws kValidation on anything else.
inline Date parse_iso_date(std::string_view text) {
  auto bad = [&] {
    return Error(ErrorCode::kValidation,
                 "invalid ISO-8601 date '" + std::string(text) + "'");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse = [&](std::string_view part, auto& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc() || ptr != part.data() + part.size()) throw bad();
  };
  parse(text.substr(0, 4), y);
  parse(text.substr(5, 2), m);
  parse(text.substr(8, 2), d);
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) throw bad();
  return Date{ymd};
}

inline std::string format_iso_date(Date date) {
  std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

inline bool is_sunday(Date date) {
  return std::chrono::weekday{date} == std::chrono::Sunday;
}

/// The Sunday on or before `date`.
inline Date week_start(Date date) {
  return date - (std::chrono::weekday{date} - std::chrono::Sunday);
}

inline std::int64_t days_between(Date from, Date to) {
  return (to - from).count();
}

}  // namespace deid
