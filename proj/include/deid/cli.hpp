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

// Command implementations behind the `deid` tool. Every command reads its
// inputs from files named in a run config, writes plain CSV/JSON, and leaves
// a manifest (seed, RNG id, parameters, input and output digests) next to
// its outputs. Nothing in the outputs depends on the worker count or on the
// wall clock.
//
// Needs OpenSSL's libcrypto for SHA-256.

#pragma once

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deid/deid.hpp"

namespace deid::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidCode:
    case ErrorCode::kValidation:
    case ErrorCode::kIo:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

// ---------------------------------------------------------------------------
// Run config

struct RunConfig {
  std::optional<fs::path> hierarchy;  // built-in hierarchy when empty
  std::optional<fs::path> population;
  std::optional<fs::path> cases;
  std::optional<fs::path> forecasts;
  std::optional<fs::path> decisions;  // evaluate: defaults to the select output
  std::optional<fs::path> tables;     // select: defaults to the search output
  RiskParams params;
  std::vector<std::int64_t> grid = default_case_grid();
  PreferenceRule preference;
  std::uint64_t seed = 1;
  std::vector<std::string> counties;  // empty = all
  fs::path out = "out";
  unsigned threads = 0;
  bool withhold_counts_as_met = true;
  bool verify = false;
};

inline Attribute parse_attribute(const std::string& name) {
  for (auto a : kAllAttributes)
    if (attribute_name(a) == name) return a;
  throw Error(ErrorCode::kValidation, "unknown attribute '" + name + "'");
}

inline PreferenceRule preference_from_json(const Json& j) {
  PreferenceRule rule;
  if (j.contains("weights")) {
    for (const auto& [name, w] : j.at("weights").items()) rule.weights[index_of(parse_attribute(name))] = w.get<int>();
  }
  if (j.contains("tie_order")) {
    auto names = j.at("tie_order").get<std::vector<std::string>>();
    std::set<Attribute> seen;
    if (names.size() != kNumAttributes) throw Error(ErrorCode::kValidation, "tie_order must list all four attributes");
    for (std::size_t i = 0; i < names.size(); ++i) {
      rule.tie_order[i] = parse_attribute(names[i]);
      if (!seen.insert(rule.tie_order[i]).second) {
        throw Error(ErrorCode::kValidation, "tie_order repeats '" + names[i] + "'");
      }
    }
  }
  return rule;
}

inline Json preference_to_json(const PreferenceRule& rule) {
  Json weights = Json::object();
  for (auto a : kAllAttributes) weights[std::string(attribute_name(a))] = rule.weights[index_of(a)];
  Json order = Json::array();
  for (auto a : rule.tie_order) order.push_back(std::string(attribute_name(a)));
  return Json{{"weights", weights}, {"tie_order", order}};
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    out.push_back(item.substr(first, item.find_last_not_of(" \t") - first + 1));
  }
  return out;
}

/// Relative paths in the config resolve against the config's directory.
inline RunConfig parse_run_config(const Json& j, const fs::path& base_dir) {
  RunConfig cfg;
  auto path = [&](const char* key) -> std::optional<fs::path> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    fs::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  try {
    cfg.hierarchy = path("hierarchy");
    cfg.population = path("population");
    cfg.cases = path("cases");
    cfg.forecasts = path("forecasts");
    cfg.decisions = path("decisions");
    cfg.tables = path("tables");
    if (auto out = path("out")) cfg.out = *out;
    if (j.contains("params")) cfg.params = io::params_from_json(j.at("params"));
    if (j.contains("grid")) cfg.grid = j.at("grid").get<std::vector<std::int64_t>>();
    if (j.contains("preference")) cfg.preference = preference_from_json(j.at("preference"));
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("counties")) {
      const auto& c = j.at("counties");
      cfg.counties = c.is_string() ? split_list(c.get<std::string>()) : c.get<std::vector<std::string>>();
    }
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    cfg.withhold_counts_as_met = j.value("withhold_counts_as_met", true);
    cfg.verify = j.value("verify", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("run config: ") + e.what());
  }
  check_grid(cfg.grid);
  return cfg;
}

inline RunConfig load_run_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIo, "cannot open run config " + file.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, "run config " + file.string() + ": " + e.what());
  }
  return parse_run_config(j, file.parent_path());
}

// ---------------------------------------------------------------------------
// Files

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file and a rename so readers never see a
/// partial file.
inline void write_file(const fs::path& p, const std::string& bytes) {
  fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + p.string());
    out << bytes;
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + p.string());
  }
  fs::rename(tmp, p);
}

/// Tracks the digests of everything a command read and wrote.
class Manifest {
 public:
  Manifest(std::string command, const RunConfig& cfg) : command_(std::move(command)), cfg_(cfg) {}

  std::string add_input(const std::string& role, const fs::path& p) {
    std::string bytes = read_file(p);
    inputs_.push_back(Json{{"role", role}, {"file", p.filename().string()}, {"sha256", sha256_hex(bytes)}});
    return bytes;
  }

  void write_output(const fs::path& dir, const std::string& name, const std::string& bytes) {
    write_file(dir / name, bytes);
    outputs_.push_back(Json{{"file", name}, {"sha256", sha256_hex(bytes)}});
  }

  void set(const std::string& key, Json value) { extra_[key] = std::move(value); }

  void finish(const fs::path& file) {
    Json j{{"tool", "deid"},
           {"version", std::string(kVersion)},
           {"command", command_},
           {"rng", std::string(kRngAlgorithm)},
           {"seed", cfg_.seed},
           {"params", io::params_to_json(cfg_.params)},
           {"grid", cfg_.grid},
           {"preference", preference_to_json(cfg_.preference)},
           {"withhold_counts_as_met", cfg_.withhold_counts_as_met},
           {"counties", cfg_.counties}};
    for (auto& [k, v] : extra_.items()) j[k] = v;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    write_file(file, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  const RunConfig& cfg_;
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
  Json extra_ = Json::object();
};

// ---------------------------------------------------------------------------
// Inputs

struct Inputs {
  HierarchyPtr hierarchy;
  PopulationSet populations;
  std::map<std::string, CaseSeries> cases;
  std::optional<io::ForecastSet> forecasts;
};

inline const fs::path& require_path(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw Error(ErrorCode::kValidation, std::string("run config names no ") + what + " file");
  return *p;
}

inline std::string with_file(const fs::path& p, const Error& e) { return p.filename().string() + ": " + e.what(); }

template <class Fn>
auto parse_input(const fs::path& p, const std::string& bytes, Fn&& fn) {
  std::istringstream in(bytes);
  try {
    return fn(in);
  } catch (const Error& e) {
    throw Error(e.code(), with_file(p, e));
  }
}

inline Inputs load_inputs(const RunConfig& cfg, Manifest& m, bool need_cases, bool need_forecasts) {
  Inputs in;
  if (cfg.hierarchy) {
    auto bytes = m.add_input("hierarchy", *cfg.hierarchy);
    in.hierarchy = parse_input(*cfg.hierarchy, bytes, [](std::istream& s) { return load_hierarchy_config(s); });
  } else {
    in.hierarchy = default_hierarchy();
  }
  const auto& pop_path = require_path(cfg.population, "population");
  auto pop_bytes = m.add_input("population", pop_path);
  in.populations = parse_input(pop_path, pop_bytes, [&](std::istream& s) { return load_population(s, in.hierarchy); });
  if (need_cases) {
    const auto& p = require_path(cfg.cases, "cases");
    auto bytes = m.add_input("cases", p);
    in.cases = parse_input(p, bytes, [](std::istream& s) { return load_case_series(s, Periodicity::kDaily); });
  }
  if (need_forecasts) {
    const auto& p = require_path(cfg.forecasts, "forecasts");
    auto bytes = m.add_input("forecasts", p);
    in.forecasts = parse_input(p, bytes, [](std::istream& s) { return io::load_forecasts(s); });
  }
  return in;
}

/// Counties to process: the config filter, or every county in `available`.
template <class Map>
std::vector<std::string> selected_counties(const RunConfig& cfg, const Map& available, const char* what) {
  std::vector<std::string> out;
  if (cfg.counties.empty()) {
    for (const auto& [fips, v] : available) out.push_back(fips);
    return out;
  }
  for (const auto& fips : cfg.counties) {
    if (!available.count(fips)) {
      throw Error(ErrorCode::kValidation, "county " + fips + " is not in the " + what + " input");
    }
    out.push_back(fips);
  }
  return out;
}

inline std::string category_slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (c == '<') out += "lt";
    else if (c == '>') out += "gt";
    else if (c == ',') continue;
    else out.push_back(c);
  }
  return out;
}

inline fs::path search_dir(const RunConfig& cfg) { return cfg.out / "search" / ("k" + std::to_string(cfg.params.k)); }

inline fs::path decisions_file(const RunConfig& cfg, DecisionSource source) {
  return cfg.out / "decisions" / ("k" + std::to_string(cfg.params.k)) /
         ("decisions_" + std::string(to_string(cfg.params.schedule)) + "_" + std::string(to_string(source)) + ".csv");
}

inline fs::path evaluation_dir(const RunConfig& cfg) {
  return cfg.out / "evaluation" / ("k" + std::to_string(cfg.params.k)) / std::string(to_string(cfg.params.schedule));
}

// ---------------------------------------------------------------------------
// validate

inline int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Manifest m("validate", cfg);
  int failures = 0;
  auto fail = [&](const std::string& msg) {
    err << "error: " << msg << '\n';
    ++failures;
  };
  HierarchyPtr h = default_hierarchy();
  if (cfg.hierarchy) {
    try {
      auto bytes = m.add_input("hierarchy", *cfg.hierarchy);
      h = parse_input(*cfg.hierarchy, bytes, [](std::istream& s) { return load_hierarchy_config(s); });
      out << "hierarchy: " << h->name() << ", " << enumerate_policies(h).size() << " policies\n";
    } catch (const Error& e) {
      fail(e.what());
      return kExitValidation;
    }
  } else {
    out << "hierarchy: built-in, " << enumerate_policies(h).size() << " policies\n";
  }

  std::optional<PopulationSet> pops;
  if (!cfg.population) {
    fail("run config names no population file");
  } else {
    try {
      auto bytes = m.add_input("population", *cfg.population);
      pops = parse_input(*cfg.population, bytes, [&](std::istream& s) { return load_population(s, h); });
      std::int64_t total = 0;
      for (const auto& [fips, p] : *pops) total += p.total();
      out << "population: " << pops->size() << " counties, " << total << " residents\n";
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  std::optional<std::map<std::string, CaseSeries>> cases;
  if (cfg.cases) {
    try {
      auto bytes = m.add_input("cases", *cfg.cases);
      cases = parse_input(*cfg.cases, bytes, [](std::istream& s) { return load_case_series(s, Periodicity::kDaily); });
      std::size_t rows = 0;
      std::optional<Date> first, last;
      for (const auto& [fips, s] : *cases) {
        rows += s.size();
        if (s.size() == 0) continue;
        first = first ? std::min(*first, s.start) : s.start;
        last = last ? std::max(*last, s.date_at(s.size() - 1)) : s.date_at(s.size() - 1);
      }
      out << "cases: " << rows << " rows, " << cases->size() << " counties";
      if (first) out << ", " << format_iso_date(*first) << " to " << format_iso_date(*last);
      out << '\n';
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  if (cfg.forecasts) {
    try {
      auto bytes = m.add_input("forecasts", *cfg.forecasts);
      auto f = parse_input(*cfg.forecasts, bytes, [](std::istream& s) { return io::load_forecasts(s); });
      std::size_t rows = 0;
      for (const auto& [fips, weeks] : f) rows += weeks.size();
      out << "forecasts: " << rows << " rows, " << f.size() << " counties\n";
      if (cases) {
        for (const auto& [fips, s] : *cases) {
          if (s.size() == 0) continue;
          std::size_t missing = 0;
          for (Date ws = week_start(s.start); ws <= s.date_at(s.size() - 1); ws += std::chrono::days(7)) {
            if (!f.count(fips) || !f.at(fips).count(ws)) ++missing;
          }
          if (missing) out << "warning: county " << fips << " lacks forecasts for " << missing << " weeks\n";
        }
      }
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  if (pops && cases) {
    std::size_t covered = 0;
    for (const auto& [fips, s] : *cases) {
      auto it = pops->find(fips);
      if (it == pops->end()) {
        fail(cfg.cases->filename().string() + ": county " + fips + " has cases but no population rows");
        continue;
      }
      ++covered;
      try {
        check_series_fits(it->second, s);
      } catch (const Error& e) {
        fail(cfg.cases->filename().string() + ": " + e.what());
      }
    }
    out << "coverage: " << covered << " of " << cases->size() << " case-series counties have population data\n";
  }
  for (const auto& fips : cfg.counties) {
    if (pops && !pops->count(fips)) fail("county " + fips + " from the county filter has no population rows");
  }
  out << (failures ? "validation failed: " + std::to_string(failures) + " problem(s)\n" : std::string("ok\n"));
  return failures ? kExitValidation : kExitOk;
}

// ---------------------------------------------------------------------------
// search

inline int cmd_search(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Manifest m("search", cfg);
  Inputs in = load_inputs(cfg, m, false, false);
  const auto policies = enumerate_policies(in.hierarchy);
  const auto counties = selected_counties(cfg, in.populations, "population");
  const fs::path dir = search_dir(cfg);
  SearchOptions opts{cfg.threads, cfg.verify};

  std::map<std::string, SearchTable> tables;
  for (const auto& fips : counties) {
    const auto& pop = in.populations.at(fips);
    SearchTable t;
    try {
      t = search_county(pop, policies, cfg.grid, cfg.params, cfg.seed, opts);
    } catch (const Error& e) {
      throw Error(e.code(), "county " + fips + ": " + e.what());
    }
    for (const auto& w : t.warnings) err << "warning: " << w << '\n';
    std::ostringstream js, cs;
    io::write_search_table_json(js, t);
    io::write_search_table_csv(cs, t);
    m.write_output(dir, "county_" + fips + ".json", js.str());
    m.write_output(dir, "county_" + fips + ".csv", cs.str());
    out << "county " << fips << ": " << t.acceptable_count(cfg.grid.back()) << " of " << policies.size()
        << " policies acceptable by volume " << cfg.grid.back() << '\n';
    tables.emplace(fips, std::move(t));
  }

  std::vector<std::string> warnings;
  auto cats = summarize_by_category(tables, default_categories(), &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  std::ostringstream frontier;
  frontier << "scope,volume,acceptable_policies\n";
  for (const auto& [fips, t] : tables)
    for (auto v : t.grid) frontier << t.scope << ',' << v << ',' << t.acceptable_count(v) << '\n';
  for (const auto& t : cats) {
    std::ostringstream js, cs;
    io::write_search_table_json(js, t);
    io::write_search_table_csv(cs, t);
    const std::string slug = category_slug(t.scope);
    m.write_output(dir, "category_" + slug + ".json", js.str());
    m.write_output(dir, "category_" + slug + ".csv", cs.str());
    for (auto v : t.grid) frontier << csv::escape(t.scope) << ',' << v << ',' << t.acceptable_count(v) << '\n';
  }
  m.write_output(dir, "frontier.csv", frontier.str());
  m.finish(dir / "manifest.json");
  out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// select

inline int cmd_select(const RunConfig& cfg, DecisionSource source, std::ostream& out, std::ostream& err) {
  Manifest m("select", cfg);
  m.set("source", std::string(to_string(source)));
  Inputs in = load_inputs(cfg, m, true, source == DecisionSource::kForecast);
  const fs::path tables_dir = cfg.tables ? *cfg.tables : search_dir(cfg);
  if (!fs::is_directory(tables_dir)) {
    throw Error(ErrorCode::kIo, "search tables directory " + tables_dir.string() + " does not exist");
  }
  std::map<std::string, SearchTable> county_tables;
  std::map<std::string, SearchTable> category_tables;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(tables_dir)) {
    if (entry.path().extension() == ".json" && entry.path().filename() != "manifest.json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    auto bytes = m.add_input("search_table", p);
    auto t = parse_input(p, bytes, [](std::istream& s) { return io::read_search_table(s); });
    if (t.params.k != cfg.params.k || t.params.threshold != cfg.params.threshold) {
      throw Error(ErrorCode::kValidation, p.filename().string() + ": searched with k=" + std::to_string(t.params.k) +
                                              ", threshold=" + io::format_double(t.params.threshold) +
                                              ", which does not match the run parameters");
    }
    if (t.hierarchy != in.hierarchy->name()) {
      throw Error(ErrorCode::kValidation, p.filename().string() + ": built for hierarchy '" + t.hierarchy + "'");
    }
    (p.filename().string().rfind("county_", 0) == 0 ? county_tables : category_tables).emplace(t.scope, std::move(t));
  }

  const auto counties = selected_counties(cfg, in.cases, "cases");
  std::vector<ReleaseDecision> all;
  int failures = 0;
  for (const auto& fips : counties) {
    try {
      const SearchTable* table = nullptr;
      if (auto it = county_tables.find(fips); it != county_tables.end()) {
        table = &it->second;
      } else if (auto p = in.populations.find(fips); p != in.populations.end()) {
        if (const auto* cat = categorize(p->second.total(), default_categories())) {
          if (auto c = category_tables.find(cat->label); c != category_tables.end()) table = &c->second;
        }
      }
      if (!table) throw Error(ErrorCode::kValidation, "no search table covers county " + fips);
      const std::map<Date, std::int64_t>* forecast = nullptr;
      if (source == DecisionSource::kForecast) {
        auto it = in.forecasts->find(fips);
        if (it == in.forecasts->end()) throw Error(ErrorCode::kValidation, "no forecasts for county " + fips);
        forecast = &it->second;
      }
      auto d = plan_weekly_decisions(*table, in.hierarchy, in.cases.at(fips), forecast, source, cfg.params,
                                     cfg.preference);
      std::size_t withheld = 0;
      for (const auto& x : d) withheld += x.policy ? 0 : 1;
      out << "county " << fips << ": " << d.size() << " weeks, " << withheld << " withheld\n";
      all.insert(all.end(), d.begin(), d.end());
    } catch (const Error& e) {
      err << "error: county " << fips << ": " << e.what() << '\n';
      ++failures;
    }
  }
  std::ostringstream csv_out;
  io::write_decisions(csv_out, all);
  const fs::path file = decisions_file(cfg, source);
  m.write_output(file.parent_path(), file.filename().string(), csv_out.str());
  m.finish(file.parent_path() / ("manifest_" + file.stem().string() + ".json"));
  out << "wrote " << file.string() << '\n';
  return failures ? kExitRuntime : kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

/// `policies` lists what to evaluate: "dynamic" (decisions from the select
/// step), "k-anon" (the static baseline) or a policy code.
inline int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& policies, DecisionSource source,
                        std::ostream& out, std::ostream& err) {
  (void)err;
  Manifest m("evaluate", cfg);
  m.set("policies", policies);
  m.set("source", std::string(to_string(source)));
  Inputs in = load_inputs(cfg, m, true, false);
  const auto counties = selected_counties(cfg, in.cases, "cases");
  for (const auto& fips : counties) {
    if (!in.populations.count(fips)) {
      throw Error(ErrorCode::kValidation, "county " + fips + " has cases but no population rows");
    }
  }
  EvaluationOptions opts{cfg.threads, cfg.withhold_counts_as_met};
  std::vector<EvaluationReport> reports;

  for (const auto& name : policies) {
    std::optional<std::map<std::string, std::vector<ReleaseDecision>>> decisions;
    std::optional<GeneralizationPolicy> fixed;
    std::string label = name;
    if (name == "dynamic") {
      const fs::path p = cfg.decisions ? *cfg.decisions : decisions_file(cfg, source);
      auto bytes = m.add_input("decisions", p);
      decisions = parse_input(p, bytes, [](std::istream& s) { return io::load_decisions(s); });
      label = "dynamic_" + std::string(to_string(source));
    } else if (name == "k-anon") {
      fixed = builtin_k_anonymous_policy(in.hierarchy);
      label = "k-anon";
    } else {
      fixed = parse_policy_code(name, in.hierarchy);
    }
    for (const auto& fips : counties) {
      const auto& pop = in.populations.at(fips);
      const auto& series = in.cases.at(fips);
      EvaluationReport r;
      try {
        if (fixed) {
          r = evaluate_static(*fixed, series, pop, cfg.params, cfg.seed, opts);
        } else {
          auto it = decisions->find(fips);
          if (it == decisions->end()) throw Error(ErrorCode::kAlignment, "no decisions for county " + fips);
          r = evaluate_sequence(it->second, series, pop, cfg.params, cfg.seed, opts);
        }
      } catch (const Error& e) {
        throw Error(e.code(), "county " + fips + ": " + e.what());
      }
      r.label = label;
      out << label << " county " << fips << ": " << r.n_met << " of " << r.n_evaluable
          << " evaluable releases meet the threshold\n";
      reports.push_back(std::move(r));
    }
  }

  const fs::path dir = evaluation_dir(cfg);
  std::ostringstream risk, summary, ts;
  io::write_risk_report_header(risk);
  io::write_county_summary_header(summary);
  io::write_timeseries_header(ts);
  const int rolling = cfg.params.schedule == Schedule::kDaily ? cfg.params.lagging_days : 1;
  for (const auto& r : reports) {
    io::write_risk_report_rows(risk, r);
    io::write_county_summary_row(summary, r);
    io::write_timeseries_rows(ts, r, rolling);
  }
  std::ostringstream cats;
  io::write_category_summary(cats, summarize_evaluations(reports, in.populations, default_categories(),
                                                         cfg.params.coverage));
  std::string suffix;
  for (const auto& r : reports) {
    if (suffix.find("_" + r.label) == std::string::npos) suffix += "_" + r.label;
  }
  m.write_output(dir, "risk_report" + suffix + ".csv", risk.str());
  m.write_output(dir, "county_summary" + suffix + ".csv", summary.str());
  m.write_output(dir, "category_summary" + suffix + ".csv", cats.str());
  m.write_output(dir, "timeseries" + suffix + ".csv", ts.str());
  m.finish(dir / ("manifest" + suffix + ".json"));
  out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace deid::cli
