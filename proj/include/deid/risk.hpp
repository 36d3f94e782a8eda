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

// Re-identification risk measures over simulated case draws.
//
// PK risk: the fraction of released records whose group (records sharing
// the generalized demographics and a diagnosis date inside the attacker's
// lagging window) has fewer than k members.
//
// Marketer risk: the expected fraction of released records an attacker
// re-identifies by matching each record against its population group, i.e.
// (1/n) * sum over records of 1/F, F = population size of the record's group.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deid/engine.hpp"
#include "deid/error.hpp"
#include "deid/population.hpp"
#include "deid/taxonomy.hpp"

namespace deid {

enum class Schedule { kDaily, kWeekly };

inline std::string_view to_string(Schedule s) { return s == Schedule::kDaily ? "daily" : "weekly"; }

inline Schedule parse_schedule(std::string_view text) {
  if (text == "daily") return Schedule::kDaily;
  if (text == "weekly") return Schedule::kWeekly;
  throw Error(ErrorCode::kInvalidArgument,
              "schedule must be 'daily' or 'weekly', got '" + std::string(text) + "'");
}

struct RiskParams {
  int k = 11;
  double threshold = 0.01;
  int lagging_days = 1;  // daily schedule only
  Schedule schedule = Schedule::kDaily;
  int n_replicates = 1000;
  double coverage = 0.95;

  void validate() const {
    auto bad = [](const std::string& m) { return Error(ErrorCode::kInvalidArgument, m); };
    if (k < 2) throw bad("k must be >= 2");
    if (!(threshold > 0.0 && threshold < 1.0)) throw bad("threshold must lie in (0, 1)");
    if (lagging_days < 1) throw bad("lagging period must be >= 1 day");
    if (n_replicates < 1) throw bad("replicate count must be >= 1");
    if (!(coverage >= 0.0 && coverage < 1.0)) throw bad("quantile coverage must lie in [0, 1)");
  }
};

// ---------------------------------------------------------------------------
// Summaries

struct RiskSummary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// 1-based nearest-rank position for probability p in a sample of n:
/// ceil(p * n) clamped to [1, n]. The small tolerance keeps p * n that is an
/// integer up to rounding (0.975 * 1000) on that integer.
inline std::size_t nearest_rank(double p, std::size_t n) {
  double r = std::ceil(p * static_cast<double>(n) - 1e-9);
  return static_cast<std::size_t>(std::clamp(r, 1.0, static_cast<double>(n)));
}

inline std::pair<double, double> coverage_probabilities(double coverage) {
  const double tail = (1.0 - coverage) / 2.0;
  return {tail, 1.0 - tail};
}

/// Mean plus nearest-rank quantiles at (1-c)/2 and 1-(1-c)/2. Reorders
/// `values` in place.
inline RiskSummary summarize_in_place(std::span<double> values, double coverage) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot summarize an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  const auto [lo_p, hi_p] = coverage_probabilities(coverage);
  const std::size_t n = values.size();
  const std::size_t lo_rank = nearest_rank(lo_p, n);
  const std::size_t hi_rank = nearest_rank(hi_p, n);
  RiskSummary s;
  s.mean = sum / static_cast<double>(n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(hi_rank - 1), values.end());
  s.upper = values[hi_rank - 1];
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo_rank - 1),
                   values.begin() + static_cast<std::ptrdiff_t>(hi_rank));
  s.lower = values[lo_rank - 1];
  return s;
}

inline RiskSummary summarize(std::span<const double> values, double coverage) {
  std::vector<double> copy(values.begin(), values.end());
  return summarize_in_place(copy, coverage);
}

inline bool meets_threshold(double upper, const RiskParams& params) {
  return upper <= params.threshold;
}

// ---------------------------------------------------------------------------
// PK risk

/// Scratch buffer for group counting under one policy at a time. Not
/// thread-safe; give each worker its own.
class GroupCounter {
 public:
  /// Number of records in `release` whose group, counted over all records in
  /// `window` (which must include the release), is smaller than k.
  std::int64_t pk_numerator(const PolicyIndex& index, std::span<const SparseCounts* const> window,
                            const SparseCounts& release, std::int64_t k) {
    if (counts_.size() < index.key_count()) counts_.resize(index.key_count(), 0);
    const auto& key = index.key_table();
    for (const SparseCounts* day : window)
      for (const auto& e : *day) counts_[key[e.bin]] += e.count;
    std::int64_t numerator = 0;
    for (const auto& e : release) {
      if (counts_[key[e.bin]] < k) numerator += e.count;
    }
    for (const SparseCounts* day : window)
      for (const auto& e : *day) counts_[key[e.bin]] = 0;
    return numerator;
  }

  std::int64_t pk_numerator(const PolicyIndex& index, const SparseCounts& release, std::int64_t k) {
    const SparseCounts* window[] = {&release};
    return pk_numerator(index, window, release, k);
  }

 private:
  std::vector<std::int64_t> counts_;
};

/// nullopt means nothing was released at that time point.
using RiskValue = std::optional<double>;

inline RiskValue pk_from_counts(std::int64_t numerator, std::int64_t released) {
  if (released == 0) return std::nullopt;
  return static_cast<double>(numerator) / static_cast<double>(released);
}

/// Daily-schedule PK at time index t with the window [t-L+1, t] clamped to
/// the start of the trace.
inline RiskValue pk_risk_at(const ReplicateTrace& trace, std::size_t t, const GeneralizationPolicy& p,
                            const RiskParams& params) {
  if (params.schedule != Schedule::kDaily || trace.periodicity != Periodicity::kDaily) {
    throw Error(ErrorCode::kScheduleMismatch,
                "pk_risk_at needs a daily schedule and a daily trace; use pk_risk_weekly");
  }
  if (t >= trace.size()) {
    throw Error(ErrorCode::kInvalidArgument, "time index " + std::to_string(t) + " beyond trace");
  }
  PolicyIndex index(p);
  std::vector<const SparseCounts*> window;
  const std::size_t first = t + 1 >= static_cast<std::size_t>(params.lagging_days)
                                ? t + 1 - static_cast<std::size_t>(params.lagging_days)
                                : 0;
  for (std::size_t i = first; i <= t; ++i) window.push_back(&trace.draws[i]);
  GroupCounter counter;
  auto num = counter.pk_numerator(index, window, trace.draws[t], params.k);
  return pk_from_counts(num, sparse_total(trace.draws[t]));
}

/// Weekly-schedule PK for week w (Sunday-Saturday, counted from the week
/// containing the trace start). Groups form within the week only.
inline RiskValue pk_risk_weekly(const ReplicateTrace& trace, std::size_t w, const GeneralizationPolicy& p,
                                const RiskParams& params) {
  if (params.schedule != Schedule::kWeekly) {
    throw Error(ErrorCode::kScheduleMismatch, "pk_risk_weekly needs a weekly schedule");
  }
  SparseCounts week;
  if (trace.periodicity == Periodicity::kWeekly) {
    if (w >= trace.size()) {
      throw Error(ErrorCode::kInvalidArgument, "week index " + std::to_string(w) + " beyond trace");
    }
    week = trace.draws[w];
  } else {
    const Date first_sunday = week_start(trace.start);
    const Date begin = first_sunday + std::chrono::days(7 * static_cast<std::int64_t>(w));
    const Date end = begin + std::chrono::days(7);
    if (begin > trace.start + std::chrono::days(static_cast<std::int64_t>(trace.size()) - 1)) {
      throw Error(ErrorCode::kInvalidArgument, "week index " + std::to_string(w) + " beyond trace");
    }
    std::map<std::uint32_t, std::int64_t> merged;
    for (std::size_t t = 0; t < trace.size(); ++t) {
      Date d = trace.start + std::chrono::days(static_cast<std::int64_t>(t));
      if (d < begin || d >= end) continue;
      for (const auto& e : trace.draws[t]) merged[e.bin] += e.count;
    }
    for (const auto& [bin, count] : merged) week.push_back({bin, count});
  }
  PolicyIndex index(p);
  GroupCounter counter;
  auto num = counter.pk_numerator(index, week, params.k);
  return pk_from_counts(num, sparse_total(week));
}

// ---------------------------------------------------------------------------
// Marketer risk

inline double marketer_risk(const std::map<GeneralizedKey, std::int64_t>& sample,
                            const PopulationTable& pop, const GeneralizationPolicy& p) {
  std::map<GeneralizedKey, std::int64_t> by_group;
  std::int64_t n = 0;
  for (const auto& [sampled_key, count] : sample) {
    if (count < 0) throw Error(ErrorCode::kInvalidArgument, "negative sampled count");
    GeneralizedKey key = sampled_key;
    key.date_cell.reset();
    by_group[key] += count;
    n += count;
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "marketer risk of an empty sample");
  auto population = aggregate(pop, p);
  double expected = 0.0;
  for (const auto& [key, count] : by_group) {
    if (count == 0) continue;
    auto it = population.find(key);
    std::int64_t f = it == population.end() ? 0 : it->second;
    if (f < count) {
      throw Error(ErrorCode::kInconsistency,
                  "sampled group " + key_label(key, p) + " has " + std::to_string(count) +
                      " records but only " + std::to_string(f) + " residents");
    }
    expected += static_cast<double>(count) / static_cast<double>(f);
  }
  return expected / static_cast<double>(n);
}

}  // namespace deid
