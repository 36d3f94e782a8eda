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

// Deterministic synthetic counties, case seasons and forecasts for demos
// and tests. The demographic shares are rough and only meant to give a
// realistic spread of group sizes.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "deid/engine.hpp"
#include "deid/population.hpp"
#include "deid/rng.hpp"
#include "deid/taxonomy.hpp"

namespace deid::synthetic {

/// Splits `total` proportionally to `weights` by largest remainder; ties
/// go to the lower index.
inline std::vector<std::int64_t> allocate(std::int64_t total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::int64_t> out(weights.size(), 0);
  if (total <= 0 || sum <= 0) return out;
  std::vector<std::pair<double, std::size_t>> rem;
  std::int64_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double exact = static_cast<double>(total) * weights[i] / sum;
    out[i] = static_cast<std::int64_t>(std::floor(exact));
    used += out[i];
    rem.emplace_back(exact - static_cast<double>(out[i]), i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < total; ++i, ++used) out[rem[i % rem.size()].second] += 1;
  return out;
}

/// A county of `total` residents over the atomic bins of `h`. Shares vary a
/// little with `seed` so counties are not identical.
inline PopulationTable county(const std::string& fips, std::int64_t total, std::uint64_t seed,
                              const HierarchyPtr& h = default_hierarchy()) {
  Xoshiro256 rng = make_stream(seed, fips, StreamPurpose::kSynthetic, 0);
  const auto n_age = h->domain_size(Attribute::kAge);
  const auto n_race = h->domain_size(Attribute::kRace);
  const auto n_sex = h->domain_size(Attribute::kSex);
  const auto n_eth = h->domain_size(Attribute::kEthnicity);
  auto jitter = [&] { return 0.75 + 0.5 * rng.uniform01(); };

  std::vector<double> age(n_age), race(n_race), sex(n_sex), eth(n_eth);
  for (std::size_t a = 0; a < n_age; ++a) {
    double years = static_cast<double>(a);
    double w = years < 60 ? 1.0 : std::exp(-(years - 60) / 12.0);
    if (a + 1 == n_age) w *= 0.5;
    age[a] = w * jitter();
  }
  const double race_base[] = {0.62, 0.2, 0.06, 0.01, 0.003, 0.107};
  for (std::size_t r = 0; r < n_race; ++r) race[r] = (r < 6 ? race_base[r] : 0.05) * jitter();
  for (std::size_t s = 0; s < n_sex; ++s) sex[s] = 1.0;
  for (std::size_t e = 0; e < n_eth; ++e) eth[e] = (e == 0 ? 0.15 : 0.85) * jitter();

  std::vector<double> weights(h->bin_count());
  for (std::size_t b = 0; b < weights.size(); ++b) {
    AtomicBin bin = h->bin_at(b);
    weights[b] = age[static_cast<std::size_t>(bin.age)] * race[static_cast<std::size_t>(bin.race)] *
                 sex[static_cast<std::size_t>(bin.sex)] * eth[static_cast<std::size_t>(bin.ethnicity)];
  }
  return PopulationTable(h, fips, allocate(total, weights));
}

struct SeasonShape {
  double baseline = 0.0001;  // daily cases per resident outside the spike
  double peak = 0.001;       // daily cases per resident at the spike peak
  double peak_day = 0.6;     // fraction of the season
  double width_days = 30;
  double noise = 0.25;       // multiplicative day-to-day noise
};

/// A daily series of `days` days with a quiet baseline and one spike, scaled
/// to the county population and kept within it.
inline CaseSeries season(const PopulationTable& pop, Date start, int days, std::uint64_t seed,
                         const SeasonShape& shape = {}) {
  Xoshiro256 rng = make_stream(seed, pop.fips(), StreamPurpose::kSynthetic, 1);
  CaseSeries s;
  s.fips = pop.fips();
  s.periodicity = Periodicity::kDaily;
  s.start = start;
  const double n = static_cast<double>(pop.total());
  const double centre = shape.peak_day * days;
  std::int64_t remaining = pop.total() / 2;
  for (int d = 0; d < days; ++d) {
    double z = (d - centre) / shape.width_days;
    double rate = shape.baseline + (shape.peak - shape.baseline) * std::exp(-0.5 * z * z);
    double mult = 1.0 + shape.noise * (2.0 * rng.uniform01() - 1.0);
    auto c = static_cast<std::int64_t>(std::llround(std::max(0.0, rate * n * mult)));
    c = std::min(c, remaining);
    remaining -= c;
    s.counts.push_back(c);
  }
  return s;
}

/// Weekly point forecasts for every week overlapping `daily`, equal to the
/// actual weekly total times a random factor in [1 - error, 1 + error].
inline std::map<Date, std::int64_t> forecast(const CaseSeries& daily, double error, std::uint64_t seed) {
  Xoshiro256 rng = make_stream(seed, daily.fips, StreamPurpose::kSynthetic, 2);
  std::map<Date, std::int64_t> out;
  const CaseSeries weekly = to_weekly(daily);
  for (std::size_t w = 0; w < weekly.size(); ++w) {
    double f = 1.0 + error * (2.0 * rng.uniform01() - 1.0);
    out[weekly.date_at(w)] = std::llround(static_cast<double>(weekly.counts[w]) * f);
  }
  return out;
}

}  // namespace deid::synthetic
