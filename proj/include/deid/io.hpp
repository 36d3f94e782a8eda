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

// File formats for search tables, forecasts, decisions and risk reports.
// Writers emit shortest round-trip decimal forms so repeated runs are
// byte-identical.

#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deid/csv.hpp"
#include "deid/date.hpp"
#include "deid/error.hpp"
#include "deid/planner.hpp"
#include "deid/risk.hpp"

namespace deid::io {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Risk parameters

inline Json params_to_json(const RiskParams& p) {
  return Json{{"k", p.k},
              {"threshold", p.threshold},
              {"lagging_days", p.lagging_days},
              {"schedule", std::string(to_string(p.schedule))},
              {"n_replicates", p.n_replicates},
              {"coverage", p.coverage}};
}

inline RiskParams params_from_json(const Json& j, RiskParams p = {}) {
  if (j.contains("k")) p.k = j.at("k").get<int>();
  if (j.contains("threshold")) p.threshold = j.at("threshold").get<double>();
  if (j.contains("lagging_days")) p.lagging_days = j.at("lagging_days").get<int>();
  if (j.contains("schedule")) p.schedule = parse_schedule(j.at("schedule").get<std::string>());
  if (j.contains("n_replicates")) p.n_replicates = j.at("n_replicates").get<int>();
  if (j.contains("coverage")) p.coverage = j.at("coverage").get<double>();
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Populations and case series

/// Long-format population rows; zero bins are left out.
inline void write_population(std::ostream& out, const PopulationSet& pops) {
  out << "fips,age,sex,race,ethnicity,count\n";
  for (const auto& [fips, pop] : pops) {
    const auto& h = pop.hierarchy();
    const auto counts = pop.counts();
    for (std::size_t b = 0; b < counts.size(); ++b) {
      if (counts[b] == 0) continue;
      AtomicBin bin = h.bin_at(b);
      auto label = [&](Attribute a, int v) { return csv::escape(h.attribute(a).values[static_cast<std::size_t>(v)]); };
      out << fips << ',' << bin.age << ',' << label(Attribute::kSex, bin.sex) << ','
          << label(Attribute::kRace, bin.race) << ',' << label(Attribute::kEthnicity, bin.ethnicity) << ','
          << counts[b] << '\n';
    }
  }
}

inline void write_case_series(std::ostream& out, const std::vector<CaseSeries>& series) {
  out << "fips,date,new_cases\n";
  for (const auto& s : series)
    for (std::size_t t = 0; t < s.size(); ++t) out << s.fips << ',' << format_iso_date(s.date_at(t)) << ',' << s.counts[t] << '\n';
}

// ---------------------------------------------------------------------------
// Search tables

inline Json search_table_to_json(const SearchTable& t) {
  Json entries = Json::array();
  for (const auto& code : t.codes) {
    const auto& e = t.entries.at(code);
    entries.push_back(Json{{"policy", code}, {"min_volume", e ? Json(*e) : Json(nullptr)}});
  }
  Json j{{"scope", t.scope},
         {"hierarchy", t.hierarchy},
         {"population", t.population},
         {"seed", t.seed},
         {"grid", t.grid},
         {"params", params_to_json(t.params)},
         {"entries", std::move(entries)},
         {"warnings", t.warnings}};
  if (t.frontier_violations) j["frontier_violations"] = *t.frontier_violations;
  return j;
}

inline SearchTable search_table_from_json(const Json& j) {
  try {
    SearchTable t;
    t.scope = j.at("scope").get<std::string>();
    t.hierarchy = j.at("hierarchy").get<std::string>();
    t.population = j.value("population", std::int64_t{0});
    t.seed = j.value("seed", std::uint64_t{0});
    t.grid = j.at("grid").get<std::vector<std::int64_t>>();
    t.params = params_from_json(j.at("params"));
    for (const auto& e : j.at("entries")) {
      auto code = e.at("policy").get<std::string>();
      const auto& v = e.at("min_volume");
      t.codes.push_back(code);
      t.entries[code] = v.is_null() ? std::nullopt : std::optional<std::int64_t>(v.get<std::int64_t>());
    }
    if (j.contains("warnings")) t.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("frontier_violations")) t.frontier_violations = j.at("frontier_violations").get<std::int64_t>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("malformed search table: ") + e.what());
  }
}

inline SearchTable read_search_table(std::istream& in) {
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("search table is not valid JSON: ") + e.what());
  }
  return search_table_from_json(j);
}

inline void write_search_table_json(std::ostream& out, const SearchTable& t) {
  out << search_table_to_json(t).dump(2) << '\n';
}

/// One row per policy; `min_volume` is empty when never met within the grid.
inline void write_search_table_csv(std::ostream& out, const SearchTable& t) {
  out << "scope,policy,min_volume\n";
  for (const auto& code : t.codes) {
    const auto& e = t.entries.at(code);
    out << csv::escape(t.scope) << ',' << code << ',' << (e ? std::to_string(*e) : "") << '\n';
  }
}

/// Number of acceptable policies at every grid volume.
inline void write_frontier_csv(std::ostream& out, const SearchTable& t) {
  out << "scope,volume,acceptable_policies\n";
  for (auto v : t.grid) out << csv::escape(t.scope) << ',' << v << ',' << t.acceptable_count(v) << '\n';
}

// ---------------------------------------------------------------------------
// Forecasts and decisions

using ForecastSet = std::map<std::string, std::map<Date, std::int64_t>>;

/// Reads `fips,week_start,point_estimate`. Fractional estimates are rounded
/// to the nearest case (halves away from zero).
inline ForecastSet load_forecasts(std::istream& in) {
  auto table = csv::read(in);
  auto cols = table.require({"fips", "week_start", "point_estimate"});
  ForecastSet out;
  for (const auto& row : table.rows) {
    const auto& fips = row.fields[cols[0]];
    if (!is_valid_fips(fips)) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": fips must be a 5-digit code, got '" + fips + "'");
    }
    Date ws;
    try {
      ws = parse_iso_date(row.fields[cols[1]]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": " + e.what());
    }
    if (!is_sunday(ws)) {
      throw Error(ErrorCode::kValidation,
                  csv::where(row) + ": week must start Sunday, got " + format_iso_date(ws));
    }
    double v = csv::parse_double(row, row.fields[cols[2]], "point_estimate");
    if (v < 0) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": point_estimate must be nonnegative");
    }
    if (!out[fips].emplace(ws, std::llround(v)).second) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": duplicate forecast for county " + fips +
                                              " week " + format_iso_date(ws));
    }
  }
  return out;
}

inline void write_forecasts(std::ostream& out, const ForecastSet& f) {
  out << "fips,week_start,point_estimate\n";
  for (const auto& [fips, weeks] : f)
    for (const auto& [ws, v] : weeks) out << fips << ',' << format_iso_date(ws) << ',' << v << '\n';
}

inline void write_decisions(std::ostream& out, const std::vector<ReleaseDecision>& decisions) {
  out << "fips,week_start,decision,statistic,source\n";
  for (const auto& d : decisions) {
    out << d.fips << ',' << format_iso_date(d.week_start) << ',' << d.label() << ',' << d.statistic << ','
        << to_string(d.source) << '\n';
  }
}

/// Decisions grouped by county, in file order.
inline std::map<std::string, std::vector<ReleaseDecision>> load_decisions(std::istream& in) {
  auto table = csv::read(in);
  auto cols = table.require({"fips", "week_start", "decision", "statistic", "source"});
  std::map<std::string, std::vector<ReleaseDecision>> out;
  for (const auto& row : table.rows) {
    ReleaseDecision d;
    d.fips = row.fields[cols[0]];
    if (!is_valid_fips(d.fips)) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": fips must be a 5-digit code");
    }
    try {
      d.week_start = parse_iso_date(row.fields[cols[1]]);
      d.source = parse_source(row.fields[cols[4]]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": " + e.what());
    }
    if (!is_sunday(d.week_start)) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": week must start Sunday, got " +
                                              format_iso_date(d.week_start));
    }
    const auto& label = row.fields[cols[2]];
    if (label != kWithhold) d.policy = label;
    d.statistic = csv::parse_int(row, row.fields[cols[3]], "statistic");
    out[d.fips].push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Risk reports

inline void write_risk_report_header(std::ostream& out) {
  out << "fips,release_date,policy,k,mean,lower,upper,meets_threshold,n_evaluable\n";
}

/// Empty risk fields mark releases with no records or withheld releases.
inline void write_risk_report_rows(std::ostream& out, const EvaluationReport& r) {
  for (const auto& row : r.rows) {
    out << r.fips << ',' << format_iso_date(row.date) << ',' << row.decision << ',' << r.params.k << ',';
    if (row.risk.summary) {
      const auto& s = *row.risk.summary;
      out << format_double(s.mean) << ',' << format_double(s.lower) << ',' << format_double(s.upper);
    } else {
      out << ",,";
    }
    out << ',' << (row.meets ? (*row.meets ? "true" : "false") : "") << ',' << row.risk.n_evaluable << '\n';
  }
}

inline void write_county_summary_header(std::ostream& out) {
  out << "fips,label,schedule,releases,evaluable,met,proportion\n";
}

inline void write_county_summary_row(std::ostream& out, const EvaluationReport& r) {
  out << r.fips << ',' << csv::escape(r.label) << ',' << to_string(r.params.schedule) << ',' << r.rows.size()
      << ',' << r.n_evaluable << ',' << r.n_met << ',' << (r.proportion ? format_double(*r.proportion) : "")
      << '\n';
}

/// Category x label x schedule proportions, the layout of a policy
/// comparison table.
inline void write_category_summary(std::ostream& out, const std::vector<CategorySummary>& rows) {
  out << "category,label,schedule,n_counties,mean,lower,upper\n";
  for (const auto& s : rows) {
    out << csv::escape(s.category) << ',' << csv::escape(s.label) << ',' << to_string(s.schedule) << ','
        << s.n_counties << ',';
    if (s.proportion) {
      out << format_double(s.proportion->mean) << ',' << format_double(s.proportion->lower) << ','
          << format_double(s.proportion->upper);
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

/// Long-format plotting data: one row per (release, series).
inline void write_timeseries_header(std::ostream& out) { out << "fips,label,date,series,value\n"; }

inline void write_timeseries_rows(std::ostream& out, const EvaluationReport& r, int rolling_days) {
  std::vector<std::int64_t> released;
  for (const auto& row : r.rows) released.push_back(row.risk.released);
  for (std::size_t t = 0; t < r.rows.size(); ++t) {
    const auto& row = r.rows[t];
    const std::string prefix = r.fips + ',' + csv::escape(r.label) + ',' + format_iso_date(row.date) + ',';
    std::int64_t rolling = 0;
    for (std::size_t i = t + 1 > static_cast<std::size_t>(rolling_days) ? t + 1 - rolling_days : 0; i <= t; ++i) {
      rolling += released[i];
    }
    out << prefix << "cases," << row.risk.released << '\n';
    out << prefix << "rolling_cases," << rolling << '\n';
    out << prefix << "decision," << row.decision << '\n';
    if (row.risk.summary) {
      out << prefix << "pk_mean," << format_double(row.risk.summary->mean) << '\n';
      out << prefix << "pk_lower," << format_double(row.risk.summary->lower) << '\n';
      out << prefix << "pk_upper," << format_double(row.risk.summary->upper) << '\n';
    }
  }
}

}  // namespace deid::io
