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

// Univariate hypergeometric variates: number of "good" items in a uniform
// sample without replacement of `sample` items from good + bad.
//
// Small samples are simulated item by item; larger ones use Stadlober's
// ratio-of-uniforms method (HRUA) with the Frohne corrections, the same
// construction NumPy's legacy generator uses.

#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>

namespace deid {

namespace detail {

inline const std::array<double, 128>& log_factorial_table() {
  static const std::array<double, 128> table = [] {
    std::array<double, 128> t{};
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  return table;
}

inline double log_factorial(std::int64_t k) {
  assert(k >= 0);
  const auto& table = log_factorial_table();
  if (static_cast<std::size_t>(k) < table.size()) return table[static_cast<std::size_t>(k)];
  constexpr double kHalfLog2Pi = 0.9189385332046728;
  const double x = static_cast<double>(k);
  // Stirling series through the 1/x^3 term; error < 1e-15 for x >= 128.
  return (x + 0.5) * std::log(x) - x + kHalfLog2Pi + (1.0 / x) * (1.0 / 12.0 - 1.0 / (360.0 * x * x));
}

template <class Rng>
std::int64_t hypergeometric_hrua(std::int64_t good, std::int64_t bad, std::int64_t sample,
                                 Rng& rng) {
  constexpr double kD1 = 1.7155277699214135;  // 2 sqrt(2/e)
  constexpr double kD2 = 0.8989161620588988;  // 3 - 2 sqrt(3/e)

  const std::int64_t popsize = good + bad;
  const std::int64_t m = std::min(sample, popsize - sample);
  const std::int64_t min_gb = std::min(good, bad);
  const std::int64_t max_gb = std::max(good, bad);

  const double p = static_cast<double>(min_gb) / static_cast<double>(popsize);
  const double q = static_cast<double>(max_gb) / static_cast<double>(popsize);
  const double a = static_cast<double>(m) * p + 0.5;
  const double var = static_cast<double>(popsize - m) * static_cast<double>(m) * p * q /
                     static_cast<double>(popsize - 1);
  const double c = std::sqrt(var + 0.5);
  const double h = kD1 * c + kD2;
  const auto mode = static_cast<std::int64_t>(
      std::floor(static_cast<double>(m + 1) * static_cast<double>(min_gb + 1) /
                 static_cast<double>(popsize + 2)));
  const double g = log_factorial(mode) + log_factorial(min_gb - mode) +
                   log_factorial(m - mode) + log_factorial(max_gb - m + mode);
  const double b = std::min(static_cast<double>(std::min(m, min_gb) + 1), std::floor(a + 16 * c));

  std::int64_t k = 0;
  while (true) {
    const double u = rng.uniform01();
    const double v = rng.uniform01();
    if (u == 0.0) continue;
    const double x = a + h * (v - 0.5) / u;
    if (x < 0.0 || x >= b) continue;
    k = static_cast<std::int64_t>(std::floor(x));
    const double t = g - (log_factorial(k) + log_factorial(min_gb - k) + log_factorial(m - k) +
                          log_factorial(max_gb - m + k));
    if (u * (4.0 - u) - 3.0 <= t) break;
    if (u * (u - t) >= 1.0) continue;
    if (2.0 * std::log(u) <= t) break;
  }
  if (good > bad) k = m - k;
  if (m < sample) k = good - k;
  return k;
}

/// Item-by-item simulation; O(sample). Requires sample <= good + bad.
template <class Rng>
std::int64_t hypergeometric_sequential(std::int64_t good, std::int64_t bad, std::int64_t sample,
                                       Rng& rng) {
  std::int64_t remaining_good = good;
  std::int64_t remaining = good + bad;
  std::int64_t taken = 0;
  for (std::int64_t i = 0; i < sample && remaining_good > 0; ++i) {
    if (static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(remaining))) <
        remaining_good) {
      ++taken;
      --remaining_good;
    }
    --remaining;
  }
  return taken;
}

}  // namespace detail

inline constexpr std::int64_t kHypergeometricSequentialCutoff = 10;

/// Draws the number of good items. Preconditions: all arguments >= 0 and
/// sample <= good + bad.
template <class Rng>
std::int64_t sample_hypergeometric(std::int64_t good, std::int64_t bad, std::int64_t sample,
                                   Rng& rng) {
  assert(good >= 0 && bad >= 0 && sample >= 0 && sample <= good + bad);
  if (sample == 0 || good == 0) return 0;
  if (bad == 0) return sample;
  const std::int64_t total = good + bad;
  if (sample == total) return good;
  if (sample > total / 2) {
    // Complement: the items left behind form a sample of size total - sample.
    return good - sample_hypergeometric(good, bad, total - sample, rng);
  }
  if (sample < kHypergeometricSequentialCutoff) {
    return detail::hypergeometric_sequential(good, bad, sample, rng);
  }
  return detail::hypergeometric_hrua(good, bad, sample, rng);
}

}  // namespace deid
