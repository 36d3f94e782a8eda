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


// Independent reference implementations used by the tests. Each one takes
// the slow, obvious route so it shares no code path with the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "deid/taxonomy.hpp"

namespace deid::oracle {

/// Materializes every individual, shuffles, and counts the first n by bin.
inline std::vector<std::int64_t> shuffle_draw(const std::vector<std::int64_t>& pool, std::int64_t n,
                                              std::mt19937_64& rng) {
  std::vector<std::size_t> people;
  for (std::size_t b = 0; b < pool.size(); ++b)
    for (std::int64_t i = 0; i < pool[b]; ++i) people.push_back(b);
  std::shuffle(people.begin(), people.end(), rng);
  std::vector<std::int64_t> out(pool.size(), 0);
  for (std::int64_t i = 0; i < n; ++i) ++out[people[static_cast<std::size_t>(i)]];
  return out;
}

struct Record {
  AtomicBin bin;
  int day = 0;
};

/// PK at `day`: for each record released that day, count the records in
/// the window [day-L+1, day] whose generalized demographics match.
inline double brute_force_pk(const std::vector<Record>& records, int day, int lag,
                             const GeneralizationPolicy& p, int k) {
  int released = 0, at_risk = 0;
  for (const auto& r : records) {
    if (r.day != day) continue;
    ++released;
    int group = 0;
    for (const auto& o : records) {
      if (o.day > day || o.day < day - lag + 1) continue;
      if (generalize_bin(o.bin, p) == generalize_bin(r.bin, p)) ++group;
    }
    if (group < k) ++at_risk;
  }
  return released == 0 ? -1.0 : static_cast<double>(at_risk) / released;
}

/// Smallest 1-based rank r with r >= p*n, found by scanning.
inline std::size_t scan_rank(double p, std::size_t n) {
  for (std::size_t r = 1; r <= n; ++r)
    if (static_cast<double>(r) >= p * static_cast<double>(n) - 1e-9) return r;
  return n;
}

struct Summary {
  double mean, lower, upper;
};

inline Summary sort_and_index(std::vector<double> v, double coverage) {
  std::sort(v.begin(), v.end());
  double sum = 0;
  for (double x : v) sum += x;
  double tail = (1 - coverage) / 2;
  return {sum / static_cast<double>(v.size()), v[scan_rank(tail, v.size()) - 1],
          v[scan_rank(1 - tail, v.size()) - 1]};
}

/// Every L-day sum ending on a week day, over history followed by the week.
inline std::int64_t min_rolling_sum(const std::vector<std::int64_t>& history,
                                    const std::vector<std::int64_t>& week, int lag) {
  std::vector<std::int64_t> all = history;
  all.insert(all.end(), week.begin(), week.end());
  std::int64_t best = INT64_MAX;
  for (std::size_t end = history.size(); end < all.size(); ++end) {
    std::int64_t s = 0;
    for (int i = 0; i < lag; ++i) s += all[end - static_cast<std::size_t>(i)];
    best = std::min(best, s);
  }
  return best;
}

/// Marketer risk as an average over expanded records.
inline double marketer_per_record(const std::vector<std::pair<std::int64_t, std::int64_t>>& groups) {
  std::vector<double> per_record;
  for (auto [count, f] : groups)
    for (std::int64_t i = 0; i < count; ++i) per_record.push_back(1.0 / static_cast<double>(f));
  double s = 0;
  for (double x : per_record) s += x;
  return s / static_cast<double>(per_record.size());
}

}  // namespace deid::oracle
