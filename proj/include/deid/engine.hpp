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

// Monte Carlo case reporting. New cases are drawn without replacement from
// the still-uninfected population, one multivariate hypergeometric draw per
// time point, at atomic-bin granularity. Individuals are never materialized.

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "deid/csv.hpp"
#include "deid/date.hpp"
#include "deid/error.hpp"
#include "deid/hypergeometric.hpp"
#include "deid/population.hpp"
#include "deid/rng.hpp"

namespace deid {

enum class Periodicity { kDaily, kWeekly };

inline std::string_view to_string(Periodicity p) {
  return p == Periodicity::kDaily ? "daily" : "weekly";
}

inline int period_days(Periodicity p) { return p == Periodicity::kDaily ? 1 : 7; }

struct CaseSeries {
  std::string fips;
  Periodicity periodicity = Periodicity::kDaily;
  Date start{};
  std::vector<std::int64_t> counts;

  std::size_t size() const { return counts.size(); }
  Date date_at(std::size_t i) const {
    return start + std::chrono::days(static_cast<std::int64_t>(i) * period_days(periodicity));
  }
  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

/// Sums a daily series into Sunday-Saturday weeks. The first and last weeks
/// may be partial.
inline CaseSeries to_weekly(const CaseSeries& daily) {
  if (daily.periodicity == Periodicity::kWeekly) return daily;
  CaseSeries weekly;
  weekly.fips = daily.fips;
  weekly.periodicity = Periodicity::kWeekly;
  weekly.start = week_start(daily.start);
  for (std::size_t i = 0; i < daily.size(); ++i) {
    auto w = static_cast<std::size_t>(days_between(weekly.start, daily.date_at(i)) / 7);
    if (weekly.counts.size() <= w) weekly.counts.resize(w + 1, 0);
    weekly.counts[w] += daily.counts[i];
  }
  return weekly;
}

/// Reads `fips,date,new_cases`. Each county's dates must be contiguous at the
/// expected periodicity; weekly dates must be Sundays.
inline std::map<std::string, CaseSeries> load_case_series(std::istream& in, Periodicity periodicity) {
  auto table = csv::read(in);
  auto cols = table.require({"fips", "date", "new_cases"});
  std::map<std::string, std::map<Date, std::pair<std::int64_t, std::size_t>>> rows;
  for (const auto& row : table.rows) {
    const auto& fips = row.fields[cols[0]];
    if (!is_valid_fips(fips)) {
      throw Error(ErrorCode::kValidation,
                  csv::where(row) + ": fips must be a 5-digit code, got '" + fips + "'");
    }
    Date date;
    try {
      date = parse_iso_date(row.fields[cols[1]]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": " + e.what());
    }
    if (periodicity == Periodicity::kWeekly && !is_sunday(date)) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": week must start Sunday, got " +
                                              format_iso_date(date));
    }
    auto n = csv::parse_int(row, row.fields[cols[2]], "new_cases");
    if (n < 0) {
      throw Error(ErrorCode::kValidation,
                  csv::where(row) + ": new_cases must be nonnegative, got " + std::to_string(n));
    }
    auto [it, inserted] = rows[fips].emplace(date, std::make_pair(n, row.line));
    if (!inserted) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": duplicate date " +
                                              format_iso_date(date) + " for county " + fips +
                                              " (first given on line " +
                                              std::to_string(it->second.second) + ")");
    }
  }
  std::map<std::string, CaseSeries> out;
  for (auto& [fips, by_date] : rows) {
    CaseSeries s;
    s.fips = fips;
    s.periodicity = periodicity;
    s.start = by_date.begin()->first;
    for (const auto& [date, value] : by_date) {
      auto expected = s.date_at(s.counts.size());
      if (date != expected) {
        throw Error(ErrorCode::kValidation, "line " + std::to_string(value.second) + ": county " +
                                                fips + " series has a gap; expected " +
                                                format_iso_date(expected) + ", found " +
                                                format_iso_date(date));
      }
      s.counts.push_back(value.first);
    }
    out.emplace(fips, std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

struct BinCount {
  std::uint32_t bin = 0;
  std::int64_t count = 0;

  friend bool operator==(const BinCount&, const BinCount&) = default;
};

/// Sparse per-bin counts, sorted by bin, zero entries omitted.
using SparseCounts = std::vector<BinCount>;

inline std::int64_t sparse_total(const SparseCounts& s) {
  std::int64_t t = 0;
  for (const auto& e : s) t += e.count;
  return t;
}

inline std::vector<std::int64_t> to_dense(const SparseCounts& s, std::size_t bin_count) {
  std::vector<std::int64_t> out(bin_count, 0);
  for (const auto& e : s) out[e.bin] += e.count;
  return out;
}

inline SparseCounts to_sparse(std::span<const std::int64_t> dense) {
  SparseCounts out;
  for (std::size_t b = 0; b < dense.size(); ++b) {
    if (dense[b] != 0) out.push_back({static_cast<std::uint32_t>(b), dense[b]});
  }
  return out;
}

/// Draws below this many cases per bin are taken one individual at a time
/// through a Fenwick tree (O(n log B)); larger draws run the sequential
/// conditional hypergeometric sweep over bins (O(B)). Both are exact.
inline constexpr std::int64_t kIndividualDrawFactor = 1;

/// The uninfected pool of one replicate. Supports exact uniform draws without
/// replacement and depletes itself as cases are drawn.
class SusceptiblePool {
 public:
  SusceptiblePool() = default;
  explicit SusceptiblePool(std::span<const std::int64_t> counts) { reset(counts); }

  void reset(std::span<const std::int64_t> counts) {
    counts_.assign(counts.begin(), counts.end());
    drawn_.assign(counts_.size(), 0);
    total_ = 0;
    for (auto c : counts_) total_ += c;
    rebuild_tree();
  }

  std::int64_t total() const { return total_; }
  std::size_t bin_count() const { return counts_.size(); }
  std::int64_t count(std::size_t bin) const { return counts_[bin]; }
  std::span<const std::int64_t> counts() const { return counts_; }

  /// Removes `n` uniformly chosen individuals; writes the per-bin tally to
  /// `out` (sorted by bin). Requires n <= total().
  template <class Rng>
  void draw(std::int64_t n, Rng& rng, SparseCounts& out) {
    out.clear();
    if (n <= 0) return;
    if (n > total_) {
      throw Error(ErrorCode::kInsufficientPopulation,
                  "cannot draw " + std::to_string(n) + " cases from a pool of " +
                      std::to_string(total_));
    }
    if (n <= kIndividualDrawFactor * static_cast<std::int64_t>(counts_.size())) {
      draw_individuals(n, rng, out);
    } else {
      draw_conditional(n, rng, out);
    }
  }

 private:
  void rebuild_tree() {
    const std::size_t n = counts_.size();
    tree_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      tree_[i + 1] += counts_[i];
      std::size_t parent = (i + 1) + ((i + 1) & (~(i + 1) + 1));
      if (parent <= n) tree_[parent] += tree_[i + 1];
    }
    top_bit_ = n == 0 ? 0 : std::bit_floor(n);
  }

  // Smallest bin whose inclusive prefix sum exceeds `target`.
  std::size_t find(std::int64_t target) const {
    std::size_t pos = 0;
    for (std::size_t step = top_bit_; step != 0; step >>= 1) {
      std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    return pos;  // 0-based bin index
  }

  void decrement(std::size_t bin) {
    for (std::size_t i = bin + 1; i < tree_.size(); i += i & (~i + 1)) --tree_[i];
  }

  template <class Rng>
  void draw_individuals(std::int64_t n, Rng& rng, SparseCounts& out) {
    touched_.clear();
    for (std::int64_t i = 0; i < n; ++i) {
      auto target = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total_)));
      std::size_t bin = find(target);
      if (drawn_[bin]++ == 0) touched_.push_back(static_cast<std::uint32_t>(bin));
      --counts_[bin];
      decrement(bin);
      --total_;
    }
    std::sort(touched_.begin(), touched_.end());
    out.reserve(touched_.size());
    for (auto bin : touched_) {
      out.push_back({bin, drawn_[bin]});
      drawn_[bin] = 0;
    }
  }

  template <class Rng>
  void draw_conditional(std::int64_t n, Rng& rng, SparseCounts& out) {
    std::int64_t remaining = n;
    std::int64_t left = total_;
    for (std::size_t b = 0; b < counts_.size() && remaining > 0; ++b) {
      const std::int64_t good = counts_[b];
      if (good == 0) continue;
      const std::int64_t x = sample_hypergeometric(good, left - good, remaining, rng);
      left -= good;
      if (x > 0) {
        counts_[b] -= x;
        remaining -= x;
        out.push_back({static_cast<std::uint32_t>(b), x});
      }
    }
    total_ -= n;
    rebuild_tree();
  }

  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> tree_;
  std::vector<std::int64_t> drawn_;
  std::vector<std::uint32_t> touched_;
  std::int64_t total_ = 0;
  std::size_t top_bit_ = 0;
};

/// Multivariate hypergeometric draw of `n` from `pool` (the pool itself is
/// left untouched). Throws kInsufficientPopulation when n exceeds the pool.
template <class Rng>
std::vector<std::int64_t> draw_without_replacement(std::span<const std::int64_t> pool,
                                                   std::int64_t n, Rng& rng) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "draw size must be nonnegative");
  SusceptiblePool p(pool);
  SparseCounts out;
  p.draw(n, rng, out);
  return to_dense(out, pool.size());
}

/// Steps one replicate through a case series, depleting its own pool.
class ReplicateSimulator {
 public:
  ReplicateSimulator() : rng_(0) {}

  ReplicateSimulator(const PopulationTable& pop, std::uint64_t seed, std::uint64_t replicate_index,
                     StreamPurpose purpose = StreamPurpose::kSimulation)
      : rng_(0) {
    reset(pop, seed, replicate_index, purpose);
  }

  void reset(const PopulationTable& pop, std::uint64_t seed, std::uint64_t replicate_index,
             StreamPurpose purpose = StreamPurpose::kSimulation) {
    pool_.reset(pop.counts());
    rng_ = make_stream(seed, pop.fips(), purpose, replicate_index);
  }

  /// Draws the cases reported at `time_index`.
  void step(std::int64_t n, std::size_t time_index, SparseCounts& out) {
    if (n > pool_.total()) {
      throw Error(ErrorCode::kInsufficientPopulation,
                  "time index " + std::to_string(time_index) + ": " + std::to_string(n) +
                      " new cases exceed the " + std::to_string(pool_.total()) +
                      " uninfected residents left");
    }
    pool_.draw(n, rng_, out);
  }

  const SusceptiblePool& pool() const { return pool_; }

 private:
  SusceptiblePool pool_;
  Xoshiro256 rng_;
};

struct ReplicateTrace {
  std::string fips;
  Periodicity periodicity = Periodicity::kDaily;
  Date start{};
  std::uint64_t seed = 0;
  std::uint64_t replicate_index = 0;
  std::vector<SparseCounts> draws;  // per time point

  std::size_t size() const { return draws.size(); }
};

/// Throws kInsufficientPopulation naming the first time index at which the
/// cumulative case count exceeds the population.
inline void check_series_fits(const PopulationTable& pop, const CaseSeries& series) {
  std::int64_t cumulative = 0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (series.counts[t] < 0) {
      throw Error(ErrorCode::kValidation, "negative case count at time index " + std::to_string(t));
    }
    cumulative += series.counts[t];
    if (cumulative > pop.total()) {
      throw Error(ErrorCode::kInsufficientPopulation,
                  "county " + pop.fips() + ": cumulative cases " + std::to_string(cumulative) +
                      " exceed population " + std::to_string(pop.total()) + " at time index " +
                      std::to_string(t) + " (" + format_iso_date(series.date_at(t)) + ")");
    }
  }
}

inline ReplicateTrace simulate_replicate(const PopulationTable& pop, const CaseSeries& series,
                                         std::uint64_t seed, std::uint64_t replicate_index) {
  check_series_fits(pop, series);
  ReplicateTrace trace;
  trace.fips = pop.fips();
  trace.periodicity = series.periodicity;
  trace.start = series.start;
  trace.seed = seed;
  trace.replicate_index = replicate_index;
  trace.draws.resize(series.size());
  ReplicateSimulator sim(pop, seed, replicate_index);
  for (std::size_t t = 0; t < series.size(); ++t) sim.step(series.counts[t], t, trace.draws[t]);
  return trace;
}

/// One draw of `n_cases` from the fully susceptible population. Identical to
/// the first time point of simulate_replicate under the same seed and index.
inline SparseCounts simulate_single_draw(const PopulationTable& pop, std::int64_t n_cases,
                                         std::uint64_t seed, std::uint64_t replicate_index) {
  if (n_cases < 0) throw Error(ErrorCode::kInvalidArgument, "case count must be nonnegative");
  if (n_cases > pop.total()) {
    throw Error(ErrorCode::kInsufficientPopulation,
                "county " + pop.fips() + ": " + std::to_string(n_cases) +
                    " cases exceed population " + std::to_string(pop.total()));
  }
  ReplicateSimulator sim(pop, seed, replicate_index);
  SparseCounts out;
  sim.step(n_cases, 0, out);
  return out;
}

}  // namespace deid
