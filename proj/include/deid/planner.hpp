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

// Policy search over case volumes, per-category summaries, weekly policy
// selection from case forecasts, and evaluation of selected sequences.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deid/engine.hpp"
#include "deid/framework.hpp"
#include "deid/parallel.hpp"
#include "deid/population.hpp"
#include "deid/risk.hpp"
#include "deid/taxonomy.hpp"

namespace deid {

inline const std::vector<std::int64_t>& default_case_grid() {
  static const std::vector<std::int64_t> grid = {5,   11,   25,   50,    100,   250,
                                                 500, 1000, 2500, 5000, 10000, 25000};
  return grid;
}

// ---------------------------------------------------------------------------
// Search

struct SearchTable {
  std::string scope;      // county fips or category label
  std::string hierarchy;  // hierarchy set name
  std::vector<std::int64_t> grid;
  RiskParams params;
  std::uint64_t seed = 0;
  std::int64_t population = 0;  // county scope only
  std::vector<std::string> codes;  // policy order
  std::map<std::string, std::optional<std::int64_t>> entries;  // nullopt = never within grid
  std::vector<std::string> warnings;
  std::optional<std::int64_t> frontier_violations;  // set in verification mode

  std::optional<std::int64_t> entry(const std::string& code) const {
    auto it = entries.find(code);
    if (it == entries.end()) {
      throw Error(ErrorCode::kInvalidArgument, "policy " + code + " is not in table " + scope);
    }
    return it->second;
  }

  bool acceptable(const std::string& code, std::int64_t volume) const {
    auto e = entry(code);
    return e && *e <= volume;
  }

  std::size_t acceptable_count(std::int64_t volume) const {
    std::size_t n = 0;
    for (const auto& [code, e] : entries) n += e && *e <= volume ? 1 : 0;
    return n;
  }
};

struct SearchOptions {
  unsigned threads = 1;
  /// Keep testing policies after they first meet the threshold and count
  /// volumes at which a met policy fails again.
  bool verify = false;
};

inline void check_grid(std::span<const std::int64_t> grid) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "case-volume grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1) throw Error(ErrorCode::kInvalidArgument, "case volumes must be >= 1");
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "case-volume grid must be strictly ascending");
    }
  }
}

/// Minimal grid volume at which each policy's PK upper bound meets the
/// threshold. Each (volume, replicate) draws once from the full population
/// and every policy is scored on that draw.
inline SearchTable search_county(const PopulationTable& pop, std::span<const GeneralizationPolicy> policies,
                                 std::span<const std::int64_t> grid, const RiskParams& params,
                                 std::uint64_t seed, const SearchOptions& options = {}) {
  params.validate();
  check_grid(grid);
  if (policies.empty()) throw Error(ErrorCode::kInvalidArgument, "no policies to search");

  SearchTable table;
  table.scope = pop.fips();
  table.hierarchy = policies.front().hierarchy().name();
  table.grid.assign(grid.begin(), grid.end());
  table.params = params;
  table.seed = seed;
  table.population = pop.total();
  for (const auto& p : policies) {
    if (!same_atomic_domains(p.hierarchy(), pop.hierarchy())) {
      throw Error(ErrorCode::kMixedHierarchy, "policy " + p.code() + " does not fit the population bins");
    }
    if (table.entries.count(p.code())) {
      throw Error(ErrorCode::kInvalidArgument, "policy " + p.code() + " listed twice");
    }
    table.codes.push_back(p.code());
    table.entries[p.code()] = std::nullopt;
  }
  if (options.verify) table.frontier_violations = 0;

  const std::vector<PolicyIndex> compiled = compile_policies({policies.begin(), policies.end()});
  const LatticePlan plan(compiled);
  const auto n_rep = static_cast<std::size_t>(params.n_replicates);
  const unsigned workers = resolve_threads(options.threads);
  std::vector<GroupCounter> counters(workers);
  std::vector<std::int64_t> numerators;
  std::vector<char> active(policies.size());
  std::vector<double> scratch;

  for (std::int64_t v : grid) {
    if (v > pop.total()) {
      table.warnings.push_back("county " + pop.fips() + ": volume " + std::to_string(v) +
                               " exceeds population " + std::to_string(pop.total()) + "; skipped");
      continue;
    }
    bool any = false;
    for (std::size_t j = 0; j < policies.size(); ++j) {
      active[j] = options.verify || !table.entries[table.codes[j]].has_value();
      any = any || active[j];
    }
    if (!any) continue;

    numerators.assign(policies.size() * n_rep, 0);
    const std::uint64_t vseed = derive_seed(seed, static_cast<std::uint64_t>(v));
    parallel_for(n_rep, options.threads, [&](std::size_t begin, std::size_t end, unsigned worker) {
      GroupCounter& counter = counters[worker];
      ReplicateSimulator sim;
      SparseCounts draw;
      for (std::size_t r = begin; r < end; ++r) {
        sim.reset(pop, vseed, r, StreamPurpose::kSearch);
        sim.step(v, 0, draw);
        for (std::size_t j : plan.order()) {
          if (!active[j]) continue;
          bool zero = false;
          for (std::size_t parent : plan.parents(j)) {
            if (active[parent] && numerators[parent * n_rep + r] == 0) {
              zero = true;
              break;
            }
          }
          numerators[j * n_rep + r] = zero ? 0 : counter.pk_numerator(compiled[j], draw, params.k);
        }
      }
    });

    for (std::size_t j = 0; j < policies.size(); ++j) {
      if (!active[j]) continue;
      scratch.resize(n_rep);
      for (std::size_t r = 0; r < n_rep; ++r) {
        scratch[r] = static_cast<double>(numerators[j * n_rep + r]) / static_cast<double>(v);
      }
      const bool met = meets_threshold(summarize_in_place(scratch, params.coverage).upper, params);
      auto& e = table.entries[table.codes[j]];
      if (met && !e) e = v;
      if (!met && e && options.verify) ++*table.frontier_violations;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// County categories

struct CountyCategory {
  std::string label;
  std::int64_t lower = 1;             // inclusive
  std::optional<std::int64_t> upper;  // exclusive; nullopt = unbounded

  bool contains(std::int64_t population) const {
    return population >= lower && (!upper || population < *upper);
  }
};

/// Population-size categories with half-open bounds [lower, upper).
inline const std::vector<CountyCategory>& default_categories() {
  static const std::vector<CountyCategory> cats = {
      {"<1,000", 1, 1000},
      {"1,000-50,000", 1000, 50000},
      {"50,000-100,000", 50000, 100000},
      {"100,000-1,000,000", 100000, 1000000},
      {">1,000,000", 1000000, std::nullopt},
  };
  return cats;
}

inline const CountyCategory* categorize(std::int64_t population, std::span<const CountyCategory> cats) {
  for (const auto& c : cats)
    if (c.contains(population)) return &c;
  return nullptr;
}

/// Per-category tables: a policy's entry is the largest member-county entry,
/// or never if any member never meets. Only non-empty categories appear.
inline std::vector<SearchTable> summarize_by_category(const std::map<std::string, SearchTable>& tables,
                                                      std::span<const CountyCategory> cats,
                                                      std::vector<std::string>* warnings = nullptr) {
  std::vector<SearchTable> out;
  for (const auto& cat : cats) {
    std::optional<SearchTable> agg;
    std::size_t members = 0;
    for (const auto& [fips, t] : tables) {
      if (t.population <= 0 || !cat.contains(t.population)) continue;
      ++members;
      if (!agg) {
        agg = t;
        agg->scope = cat.label;
        agg->population = 0;
        agg->warnings.clear();
        agg->frontier_violations.reset();
        continue;
      }
      if (t.codes != agg->codes || t.grid != agg->grid || t.hierarchy != agg->hierarchy) {
        throw Error(ErrorCode::kInconsistency,
                    "county " + fips + " was searched with a different grid or policy list");
      }
      for (const auto& code : agg->codes) {
        auto& e = agg->entries[code];
        auto c = t.entries.at(code);
        e = e && c ? std::optional<std::int64_t>(std::max(*e, *c)) : std::nullopt;
      }
    }
    if (agg) {
      agg->warnings.push_back(std::to_string(members) + " member counties");
      out.push_back(std::move(*agg));
    }
  }
  if (warnings) {
    for (const auto& [fips, t] : tables) {
      if (t.population <= 0) warnings->push_back("county " + fips + " has zero population; excluded");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selection statistic

/// Spreads a weekly total over Sunday..Saturday: floor(w/7) each, plus one
/// extra case on each of the first w mod 7 days.
inline std::array<std::int64_t, 7> distribute_weekly_forecast(std::int64_t weekly_point) {
  if (weekly_point < 0) throw Error(ErrorCode::kInvalidArgument, "weekly forecast must be >= 0");
  std::array<std::int64_t, 7> days{};
  const std::int64_t base = weekly_point / 7;
  const std::int64_t rem = weekly_point % 7;
  for (std::int64_t d = 0; d < 7; ++d) days[static_cast<std::size_t>(d)] = base + (d < rem ? 1 : 0);
  return days;
}

enum class StatisticMode { kMinDaily, kMinRollingSum, kWeeklyTotal };

struct SelectionStatistic {
  StatisticMode mode = StatisticMode::kMinDaily;
  int window = 1;  // kMinRollingSum only
};

/// `week` holds the days of the week being planned (usually 7; fewer at the
/// edges of a series). `history` holds the actual counts of the days right
/// before it, oldest first; rolling sums need at least window-1 of them.
inline std::int64_t weekly_selection_statistic(std::span<const std::int64_t> history,
                                               std::span<const std::int64_t> week,
                                               SelectionStatistic stat) {
  if (week.empty() || week.size() > 7) {
    throw Error(ErrorCode::kInvalidArgument, "a week holds 1 to 7 days");
  }
  switch (stat.mode) {
    case StatisticMode::kMinDaily:
      return *std::min_element(week.begin(), week.end());
    case StatisticMode::kWeeklyTotal: {
      std::int64_t s = 0;
      for (auto c : week) s += c;
      return s;
    }
    case StatisticMode::kMinRollingSum: {
      if (stat.window < 1) throw Error(ErrorCode::kInvalidArgument, "rolling window must be >= 1");
      const auto need = static_cast<std::size_t>(stat.window - 1);
      if (history.size() < need) {
        throw Error(ErrorCode::kInvalidArgument,
                    "rolling sum over " + std::to_string(stat.window) + " days needs " +
                        std::to_string(need) + " days of history, got " + std::to_string(history.size()));
      }
      std::vector<std::int64_t> seq(history.end() - static_cast<std::ptrdiff_t>(need), history.end());
      seq.insert(seq.end(), week.begin(), week.end());
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (std::size_t d = 0; d < week.size(); ++d) {
        std::int64_t s = 0;
        for (std::size_t i = d; i <= d + need; ++i) s += seq[i];
        best = std::min(best, s);
      }
      return best;
    }
  }
  return 0;
}

/// The statistic matching the risk windows of a schedule.
inline SelectionStatistic statistic_for(const RiskParams& params) {
  if (params.schedule == Schedule::kWeekly) return {StatisticMode::kWeeklyTotal, 1};
  if (params.lagging_days == 1) return {StatisticMode::kMinDaily, 1};
  return {StatisticMode::kMinRollingSum, params.lagging_days};
}

// ---------------------------------------------------------------------------
// Preference and selection

/// Ranks policies by sum over attributes of weight * (coarsest level - level),
/// breaking ties by finer level on the attributes in `tie_order`.
struct PreferenceRule {
  std::array<int, kNumAttributes> weights{4, 3, 1, 2};  // indexed by Attribute
  std::array<Attribute, kNumAttributes> tie_order = kAllAttributes;

  int utility(const GeneralizationPolicy& p) const {
    int u = 0;
    for (auto a : kAllAttributes) {
      int coarsest = static_cast<int>(p.hierarchy().attribute(a).levels.size()) - 1;
      u += weights[index_of(a)] * (coarsest - p.level(a));
    }
    return u;
  }

  /// Strict: true if `a` ranks above `b`.
  bool prefers(const GeneralizationPolicy& a, const GeneralizationPolicy& b) const {
    int ua = utility(a), ub = utility(b);
    if (ua != ub) return ua > ub;
    for (auto attr : tie_order) {
      if (a.level(attr) != b.level(attr)) return a.level(attr) < b.level(attr);
    }
    return false;
  }
};

inline constexpr std::string_view kWithhold = "WITHHOLD";

enum class DecisionSource { kForecast, kActual };

inline std::string_view to_string(DecisionSource s) {
  return s == DecisionSource::kForecast ? "forecast" : "actual";
}

inline DecisionSource parse_source(std::string_view text) {
  if (text == "forecast") return DecisionSource::kForecast;
  if (text == "actual") return DecisionSource::kActual;
  throw Error(ErrorCode::kInvalidArgument,
              "source must be 'forecast' or 'actual', got '" + std::string(text) + "'");
}

struct ReleaseDecision {
  std::string fips;
  Date week_start{};
  std::optional<std::string> policy;  // nullopt = WITHHOLD
  std::int64_t statistic = 0;
  DecisionSource source = DecisionSource::kForecast;

  std::string label() const { return policy ? *policy : std::string(kWithhold); }
  friend bool operator==(const ReleaseDecision&, const ReleaseDecision&) = default;
};

/// Most preferred policy whose entry is at most `statistic`; WITHHOLD if none.
inline ReleaseDecision select_policy(const SearchTable& table, std::int64_t statistic,
                                     const PreferenceRule& pref, const HierarchyPtr& h) {
  ReleaseDecision d;
  d.fips = table.scope;
  d.statistic = statistic;
  std::optional<GeneralizationPolicy> best;
  for (const auto& code : table.codes) {
    if (!table.acceptable(code, statistic)) continue;
    auto p = parse_policy_code(code, h);
    if (!best || pref.prefers(p, *best)) best = std::move(p);
  }
  if (best) d.policy = best->code();
  return d;
}

/// Weekly decisions covering every week that overlaps `actual` (a daily
/// series). Forecast points are keyed by the week's Sunday. Days before the
/// series start count as zero cases in rolling-sum history.
inline std::vector<ReleaseDecision> plan_weekly_decisions(const SearchTable& table, const HierarchyPtr& h,
                                                          const CaseSeries& actual,
                                                          const std::map<Date, std::int64_t>* forecast,
                                                          DecisionSource source, const RiskParams& params,
                                                          const PreferenceRule& pref = {}) {
  if (actual.periodicity != Periodicity::kDaily) {
    throw Error(ErrorCode::kScheduleMismatch, "policy selection needs a daily actual series");
  }
  if (source == DecisionSource::kForecast && !forecast) {
    throw Error(ErrorCode::kInvalidArgument, "forecast source selected but no forecasts given");
  }
  std::vector<ReleaseDecision> out;
  if (actual.size() == 0) return out;
  const SelectionStatistic stat = statistic_for(params);
  const std::int64_t hist_len = stat.mode == StatisticMode::kMinRollingSum ? stat.window - 1 : 0;
  const Date first = actual.start;
  const Date last = actual.date_at(actual.size() - 1);
  auto actual_on = [&](Date d) -> std::int64_t {
    if (d < first || d > last) return 0;
    return actual.counts[static_cast<std::size_t>(days_between(first, d))];
  };

  for (Date ws = week_start(first); ws <= last; ws += std::chrono::days(7)) {
    const Date d0 = std::max(ws, first);
    const Date d1 = std::min(ws + std::chrono::days(6), last);
    std::vector<std::int64_t> week;
    if (source == DecisionSource::kActual) {
      for (Date d = d0; d <= d1; d += std::chrono::days(1)) week.push_back(actual_on(d));
    } else {
      auto it = forecast->find(ws);
      if (it == forecast->end()) {
        throw Error(ErrorCode::kValidation,
                    "county " + actual.fips + ": no forecast for week " + format_iso_date(ws));
      }
      if (stat.mode == StatisticMode::kWeeklyTotal) {
        week.push_back(it->second);
      } else {
        auto days = distribute_weekly_forecast(it->second);
        for (Date d = d0; d <= d1; d += std::chrono::days(1)) {
          week.push_back(days[static_cast<std::size_t>(days_between(ws, d))]);
        }
      }
    }
    std::vector<std::int64_t> history;
    for (std::int64_t back = hist_len; back >= 1; --back) history.push_back(actual_on(d0 - std::chrono::days(back)));
    const std::int64_t s = weekly_selection_statistic(history, week, stat);
    ReleaseDecision d = select_policy(table, s, pref, h);
    d.fips = actual.fips;
    d.week_start = ws;
    d.source = source;
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Baseline policy

/// Static k-anonymity baseline: ages 0-17, 18-49, 50-64, 65+, all six race
/// categories, sex and ethnicity kept. Lives in its own hierarchy set derived
/// from `base`, so it is not part of the searched lattice.
inline GeneralizationPolicy builtin_k_anonymous_policy(const HierarchyPtr& base = default_hierarchy()) {
  std::array<AttributeHierarchy, kNumAttributes> attrs;
  for (auto a : kAllAttributes) attrs[index_of(a)] = base->attribute(a);
  auto& age = attrs[index_of(Attribute::kAge)];
  age.levels = {age_level_from_starts('K', {0, 18, 50, 65}, base->max_age()),
                suppressed_level(age.domain_size())};
  auto& race = attrs[index_of(Attribute::kRace)];
  race.levels = {race.levels.front(), race.levels.back()};
  auto h = std::make_shared<const HierarchySet>(base->name() + "+k-anonymous-baseline", base->max_age(),
                                                std::move(attrs));
  return GeneralizationPolicy(h, {0, 0, 0, 0});
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvaluationOptions {
  unsigned threads = 1;
  /// Withheld releases that had cases count as meeting the threshold.
  bool withhold_counts_as_met = true;
};

struct EvaluationRow {
  Date date{};
  std::string decision;  // policy code or WITHHOLD
  ReleaseRisk risk;
  bool evaluable = false;      // released (or withheld) at least one case
  std::optional<bool> meets;   // set when evaluable
};

struct EvaluationReport {
  std::string fips;
  std::string label;  // "dynamic" or the static policy code
  RiskParams params;
  std::vector<EvaluationRow> rows;
  std::int64_t n_evaluable = 0;
  std::int64_t n_met = 0;
  std::optional<double> proportion;  // nullopt when nothing is evaluable
};

namespace detail {

inline EvaluationReport build_report(const std::string& fips, std::string label, const RiskParams& params,
                                     std::vector<std::string> decisions, std::vector<ReleaseRisk> risks,
                                     const EvaluationOptions& options) {
  EvaluationReport rep;
  rep.fips = fips;
  rep.label = std::move(label);
  rep.params = params;
  for (std::size_t t = 0; t < risks.size(); ++t) {
    EvaluationRow row;
    row.date = risks[t].date;
    row.decision = std::move(decisions[t]);
    row.risk = std::move(risks[t]);
    row.evaluable = row.risk.released > 0;
    if (row.evaluable) {
      row.meets = row.risk.withheld ? options.withhold_counts_as_met
                                    : meets_threshold(row.risk.summary->upper, params);
      ++rep.n_evaluable;
      rep.n_met += *row.meets ? 1 : 0;
    }
    rep.rows.push_back(std::move(row));
  }
  if (rep.n_evaluable > 0) {
    rep.proportion = static_cast<double>(rep.n_met) / static_cast<double>(rep.n_evaluable);
  }
  return rep;
}

}  // namespace detail

/// Simulates the actual series and applies each week's decision to the
/// releases of that week. Decisions must be for this county and cover every
/// week that has a release.
inline EvaluationReport evaluate_sequence(std::span<const ReleaseDecision> decisions, const CaseSeries& actual,
                                          const PopulationTable& pop, const RiskParams& params,
                                          std::uint64_t seed, const EvaluationOptions& options = {}) {
  params.validate();
  const CaseSeries s = detail::series_for_schedule(actual, params.schedule);
  std::map<Date, const ReleaseDecision*> by_week;
  for (const auto& d : decisions) {
    if (d.fips != actual.fips) {
      throw Error(ErrorCode::kAlignment, "decision for county " + d.fips + " given for county " + actual.fips);
    }
    if (!is_sunday(d.week_start)) {
      throw Error(ErrorCode::kAlignment, "decision week " + format_iso_date(d.week_start) +
                                             " for county " + d.fips + " does not start on a Sunday");
    }
    if (!by_week.emplace(d.week_start, &d).second) {
      throw Error(ErrorCode::kAlignment, "county " + d.fips + ": two decisions for week " +
                                             format_iso_date(d.week_start));
    }
  }
  std::map<std::string, PolicyIndex> compiled;
  std::vector<const PolicyIndex*> per_release(s.size(), nullptr);
  std::vector<std::string> labels(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) {
    const Date ws = week_start(s.date_at(t));
    auto it = by_week.find(ws);
    if (it == by_week.end()) {
      throw Error(ErrorCode::kAlignment,
                  "county " + actual.fips + ": no decision for week " + format_iso_date(ws));
    }
    const auto& d = *it->second;
    labels[t] = d.label();
    if (!d.policy) continue;
    auto c = compiled.find(*d.policy);
    if (c == compiled.end()) {
      c = compiled.emplace(*d.policy, PolicyIndex(parse_policy_code(*d.policy, pop.hierarchy_ptr()))).first;
    }
    per_release[t] = &c->second;
  }
  auto risks = estimate_release_risks(pop, s, per_release, params, seed, options.threads);
  return detail::build_report(actual.fips, "dynamic", params, std::move(labels), std::move(risks), options);
}

/// Applies one policy to every release.
inline EvaluationReport evaluate_static(const GeneralizationPolicy& policy, const CaseSeries& actual,
                                        const PopulationTable& pop, const RiskParams& params,
                                        std::uint64_t seed, const EvaluationOptions& options = {}) {
  params.validate();
  if (!same_atomic_domains(policy.hierarchy(), pop.hierarchy())) {
    throw Error(ErrorCode::kMixedHierarchy, "policy " + policy.code() + " does not fit the population bins");
  }
  const CaseSeries s = detail::series_for_schedule(actual, params.schedule);
  const PolicyIndex index(policy);
  std::vector<const PolicyIndex*> per_release(s.size(), &index);
  std::vector<std::string> labels(s.size(), policy.code());
  auto risks = estimate_release_risks(pop, s, per_release, params, seed, options.threads);
  return detail::build_report(actual.fips, policy.code(), params, std::move(labels), std::move(risks),
                              options);
}

/// Mean and central quantile range of per-county proportions within each
/// population category. Counties with no evaluable release are left out.
struct CategorySummary {
  std::string category;
  std::string label;
  Schedule schedule = Schedule::kDaily;
  std::size_t n_counties = 0;
  std::optional<RiskSummary> proportion;
};

inline std::vector<CategorySummary> summarize_evaluations(const std::vector<EvaluationReport>& reports,
                                                          const PopulationSet& pops,
                                                          std::span<const CountyCategory> cats,
                                                          double coverage = 0.95) {
  std::map<std::pair<std::string, int>, std::vector<const EvaluationReport*>> groups;
  for (const auto& r : reports) groups[{r.label, static_cast<int>(r.params.schedule)}].push_back(&r);
  std::vector<CategorySummary> out;
  for (const auto& cat : cats) {
    for (const auto& [key, members] : groups) {
      CategorySummary s;
      s.category = cat.label;
      s.label = key.first;
      s.schedule = static_cast<Schedule>(key.second);
      std::vector<double> props;
      for (const auto* r : members) {
        auto it = pops.find(r->fips);
        if (it == pops.end() || !cat.contains(it->second.total())) continue;
        ++s.n_counties;
        if (r->proportion) props.push_back(*r->proportion);
      }
      if (s.n_counties == 0) continue;
      if (!props.empty()) s.proportion = summarize(props, coverage);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace deid
