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

// Longitudinal risk estimation: run n replicates of a case series through
// the simulator and summarize the PK risk of every release under one or
// more policies.
//
// Replicates advance in lock-step, one time point at a time, so memory stays
// O(replicates x bins) regardless of series length. Each replicate owns its
// random stream, which makes the output independent of the worker count.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deid/engine.hpp"
#include "deid/parallel.hpp"
#include "deid/risk.hpp"
#include "deid/taxonomy.hpp"

namespace deid {

struct ReleaseRisk {
  Date date{};
  std::int64_t released = 0;           // records released at this time point
  bool withheld = false;
  std::optional<RiskSummary> summary;  // empty when nothing was released
  int n_evaluable = 0;                 // replicates with >= 1 released record
};

struct PolicyRiskSeries {
  std::string code;
  std::vector<ReleaseRisk> releases;
};

/// Immediate-predecessor structure of a policy list: for each policy, the
/// policies in the list that are one level finer on exactly one attribute.
/// A zero PK numerator for any of those implies zero for the policy itself,
/// because coarsening only merges groups.
class LatticePlan {
 public:
  explicit LatticePlan(std::span<const PolicyIndex> policies) : parents_(policies.size()) {
    order_.resize(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i) order_[i] = i;
    auto depth = [&](std::size_t i) {
      int d = 0;
      for (int l : policies[i].policy().levels()) d += l;
      return d;
    };
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return depth(a) < depth(b); });
    for (std::size_t i = 0; i < policies.size(); ++i) {
      for (std::size_t j = 0; j < policies.size(); ++j) {
        if (i == j || !same_hierarchy(policies[i].policy(), policies[j].policy())) continue;
        const auto& ci = policies[i].policy().levels();
        const auto& cj = policies[j].policy().levels();
        int diff = 0;
        bool one_step = true;
        for (std::size_t a = 0; a < ci.size(); ++a) {
          if (ci[a] == cj[a]) continue;
          if (ci[a] != cj[a] + 1) one_step = false;
          ++diff;
        }
        if (diff == 1 && one_step) parents_[i].push_back(j);
      }
    }
  }

  /// Evaluation order in which every policy follows its parents.
  const std::vector<std::size_t>& order() const { return order_; }
  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }

 private:
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> parents_;
};

namespace detail {

inline CaseSeries series_for_schedule(const CaseSeries& series, Schedule schedule) {
  if (schedule == Schedule::kWeekly) return to_weekly(series);
  if (series.periodicity != Periodicity::kDaily) {
    throw Error(ErrorCode::kScheduleMismatch,
                "daily release schedule needs a daily case series for county " + series.fips);
  }
  return series;
}

struct ReplicateState {
  ReplicateSimulator sim;
  std::vector<SparseCounts> ring;  // last L draws
  std::vector<char> released;      // whether each ring slot was released
};

/// Shared lock-step driver. `policies_at(t)` returns the policy indices to
/// evaluate at time t (into `policies`); an empty list with `withheld(t)`
/// true means the release is withheld. `emit(t, j, numerators)` receives one
/// numerator per replicate for policy j.
template <class PoliciesAt, class Withheld, class Emit>
void run_lockstep(const PopulationTable& pop, const CaseSeries& series,
                  std::span<const PolicyIndex> policies, const RiskParams& params, std::uint64_t seed,
                  unsigned threads, PoliciesAt&& policies_at, Withheld&& withheld, Emit&& emit) {
  check_series_fits(pop, series);
  const std::size_t window_len =
      params.schedule == Schedule::kDaily ? static_cast<std::size_t>(params.lagging_days) : 1;
  const auto n_rep = static_cast<std::size_t>(params.n_replicates);
  const LatticePlan plan(policies);

  std::vector<ReplicateState> states(n_rep);
  parallel_for(n_rep, threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t r = begin; r < end; ++r) {
      states[r].sim.reset(pop, seed, r);
      states[r].ring.assign(window_len, {});
      states[r].released.assign(window_len, 0);
    }
  });

  const unsigned workers = resolve_threads(threads);
  std::vector<GroupCounter> counters(workers);
  std::vector<std::int64_t> numerators;  // [policy][replicate]
  std::vector<char> active(policies.size(), 0);

  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::vector<std::size_t>& todo = policies_at(t);
    const bool is_withheld = withheld(t);
    std::fill(active.begin(), active.end(), 0);
    for (auto j : todo) active[j] = 1;
    numerators.assign(policies.size() * n_rep, 0);
    const std::int64_t n_t = series.counts[t];
    const std::size_t slot = t % window_len;

    parallel_for(n_rep, threads, [&](std::size_t begin, std::size_t end, unsigned worker) {
      GroupCounter& counter = counters[worker];
      std::vector<const SparseCounts*> window;
      for (std::size_t r = begin; r < end; ++r) {
        auto& st = states[r];
        st.sim.step(n_t, t, st.ring[slot]);
        st.released[slot] = is_withheld ? 0 : 1;
        if (is_withheld || n_t == 0) continue;
        window.clear();
        const std::size_t depth = std::min(window_len, t + 1);
        for (std::size_t back = 0; back < depth; ++back) {
          std::size_t s = (t - back) % window_len;
          if (st.released[s]) window.push_back(&st.ring[s]);
        }
        for (std::size_t j : plan.order()) {
          if (!active[j]) continue;
          bool zero = false;
          for (std::size_t parent : plan.parents(j)) {
            if (active[parent] && numerators[parent * n_rep + r] == 0) {
              zero = true;
              break;
            }
          }
          numerators[j * n_rep + r] =
              zero ? 0 : counter.pk_numerator(policies[j], window, st.ring[slot], params.k);
        }
      }
    });

    for (auto j : todo) {
      emit(t, j, std::span<const std::int64_t>(numerators.data() + j * n_rep, n_rep));
    }
  }
}

inline ReleaseRisk summarize_release(Date date, std::int64_t released, bool withheld,
                                     std::span<const std::int64_t> numerators,
                                     const RiskParams& params, std::vector<double>& scratch) {
  ReleaseRisk out;
  out.date = date;
  out.released = released;
  out.withheld = withheld;
  if (withheld || released == 0) return out;
  scratch.resize(numerators.size());
  for (std::size_t r = 0; r < numerators.size(); ++r) {
    scratch[r] = static_cast<double>(numerators[r]) / static_cast<double>(released);
  }
  out.summary = summarize_in_place(scratch, params.coverage);
  out.n_evaluable = static_cast<int>(numerators.size());
  return out;
}

}  // namespace detail

/// PK risk distribution of every release under each policy applied statically.
/// Weekly schedules aggregate a daily series into Sunday-Saturday weeks.
inline std::vector<PolicyRiskSeries> estimate_policy_risks(const PopulationTable& pop,
                                                           const CaseSeries& series,
                                                           std::span<const PolicyIndex> policies,
                                                           const RiskParams& params,
                                                           std::uint64_t seed, unsigned threads = 1) {
  params.validate();
  const CaseSeries s = detail::series_for_schedule(series, params.schedule);
  std::vector<PolicyRiskSeries> out(policies.size());
  for (std::size_t j = 0; j < policies.size(); ++j) {
    out[j].code = policies[j].policy().code();
    out[j].releases.reserve(s.size());
  }
  std::vector<std::size_t> all(policies.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  std::vector<double> scratch;
  detail::run_lockstep(
      pop, s, policies, params, seed, threads, [&](std::size_t) -> const std::vector<std::size_t>& { return all; },
      [](std::size_t) { return false; },
      [&](std::size_t t, std::size_t j, std::span<const std::int64_t> num) {
        out[j].releases.push_back(
            detail::summarize_release(s.date_at(t), s.counts[t], false, num, params, scratch));
      });
  return out;
}

/// PK risk distribution of every release when release t is generalized under
/// `per_release[t]` (nullptr = withheld). Withheld records never join a later
/// release's lagging window.
inline std::vector<ReleaseRisk> estimate_release_risks(const PopulationTable& pop,
                                                       const CaseSeries& series,
                                                       std::span<const PolicyIndex* const> per_release,
                                                       const RiskParams& params, std::uint64_t seed,
                                                       unsigned threads = 1) {
  params.validate();
  const CaseSeries s = detail::series_for_schedule(series, params.schedule);
  if (per_release.size() != s.size()) {
    throw Error(ErrorCode::kAlignment, "county " + s.fips + ": " + std::to_string(per_release.size()) +
                                           " release policies for " + std::to_string(s.size()) +
                                           " releases");
  }
  // Distinct policies, each compiled once.
  std::vector<PolicyIndex> distinct;
  std::vector<std::optional<std::size_t>> slot_of(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (!per_release[t]) continue;
    const auto& code = per_release[t]->policy();
    std::size_t j = 0;
    while (j < distinct.size() && !(distinct[j].policy() == code)) ++j;
    if (j == distinct.size()) distinct.push_back(*per_release[t]);
    slot_of[t] = j;
  }
  std::vector<ReleaseRisk> out(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) {
    out[t].date = s.date_at(t);
    out[t].released = s.counts[t];
    out[t].withheld = !slot_of[t].has_value();
  }
  std::vector<std::size_t> todo;
  std::vector<double> scratch;
  detail::run_lockstep(
      pop, s, distinct, params, seed, threads,
      [&](std::size_t t) -> const std::vector<std::size_t>& {
        todo.clear();
        if (slot_of[t] && s.counts[t] > 0) todo.push_back(*slot_of[t]);
        return todo;
      },
      [&](std::size_t t) { return !slot_of[t].has_value(); },
      [&](std::size_t t, std::size_t, std::span<const std::int64_t> num) {
        out[t] = detail::summarize_release(s.date_at(t), s.counts[t], false, num, params, scratch);
      });
  return out;
}

}  // namespace deid
