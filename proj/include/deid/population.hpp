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

// County population tables over atomic demographic bins.
//
// Input is a long-format CSV with header `fips,age,sex,race,ethnicity,count`;
// one row per (county, atomic bin). Bins absent from a county's rows count as
// zero; counties absent from the file are simply not present.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "deid/csv.hpp"
#include "deid/error.hpp"
#include "deid/taxonomy.hpp"

namespace deid {

inline bool is_valid_fips(std::string_view fips) {
  return fips.size() == 5 &&
         std::all_of(fips.begin(), fips.end(), [](char c) { return c >= '0' && c <= '9'; });
}

class PopulationTable {
 public:
  PopulationTable(HierarchyPtr hierarchy, std::string fips, std::vector<std::int64_t> counts)
      : hierarchy_(std::move(hierarchy)), fips_(std::move(fips)), counts_(std::move(counts)) {
    if (counts_.size() != hierarchy_->bin_count()) {
      throw Error(ErrorCode::kInvalidArgument, "population counts do not match the bin layout");
    }
    for (auto c : counts_) {
      if (c < 0) throw Error(ErrorCode::kValidation, "negative population count for " + fips_);
      total_ += c;
    }
  }

  const std::string& fips() const { return fips_; }
  const HierarchySet& hierarchy() const { return *hierarchy_; }
  const HierarchyPtr& hierarchy_ptr() const { return hierarchy_; }

  /// Dense counts in canonical bin order.
  std::span<const std::int64_t> counts() const { return counts_; }
  std::int64_t count(const AtomicBin& bin) const { return counts_[hierarchy_->bin_index(bin)]; }
  std::int64_t total() const { return total_; }

 private:
  HierarchyPtr hierarchy_;
  std::string fips_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

using PopulationSet = std::map<std::string, PopulationTable>;

inline PopulationSet load_population(std::istream& in, const HierarchyPtr& h) {
  auto table = csv::read(in);
  auto cols = table.require({"fips", "age", "sex", "race", "ethnicity", "count"});

  std::map<std::string, std::vector<std::int64_t>> counts;
  std::map<std::string, std::vector<std::size_t>> seen_line;  // 0 = not seen
  const auto lookup = [&](const csv::Row& row, Attribute a, const std::string& label) {
    const auto& attr = h->attribute(a);
    auto v = attr.find_value(label);
    if (!v) {
      throw Error(ErrorCode::kValidation,
                  csv::where(row) + ": unknown " + std::string(attribute_name(a)) + " label '" +
                      label + "' (accepted: " + attr.accepted_labels() + ")");
    }
    return *v;
  };

  for (const auto& row : table.rows) {
    const auto& f = row.fields;
    const std::string& fips = f[cols[0]];
    if (!is_valid_fips(fips)) {
      throw Error(ErrorCode::kValidation,
                  csv::where(row) + ": fips must be a 5-digit code, got '" + fips + "'");
    }
    AtomicBin bin;
    auto age = csv::parse_int(row, f[cols[1]], "age");
    if (age < 0 || age > h->max_age()) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": age " + std::to_string(age) +
                                              " outside 0.." + std::to_string(h->max_age()) +
                                              " (the cap means that age and older)");
    }
    bin.age = static_cast<int>(age);
    bin.sex = lookup(row, Attribute::kSex, f[cols[2]]);
    bin.race = lookup(row, Attribute::kRace, f[cols[3]]);
    bin.ethnicity = lookup(row, Attribute::kEthnicity, f[cols[4]]);
    auto count = csv::parse_int(row, f[cols[5]], "count");
    if (count < 0) {
      throw Error(ErrorCode::kValidation,
                  csv::where(row) + ": count must be nonnegative, got " + std::to_string(count));
    }
    auto [cit, inserted] = counts.try_emplace(fips);
    if (inserted) {
      cit->second.assign(h->bin_count(), 0);
      seen_line[fips].assign(h->bin_count(), 0);
    }
    auto idx = h->bin_index(bin);
    auto& seen = seen_line[fips][idx];
    if (seen != 0) {
      throw Error(ErrorCode::kValidation, csv::where(row) + ": duplicate bin for county " + fips +
                                              " (first given on line " + std::to_string(seen) + ")");
    }
    seen = row.line;
    cit->second[idx] = count;
  }

  PopulationSet out;
  for (auto& [fips, c] : counts) out.emplace(fips, PopulationTable(h, fips, std::move(c)));
  return out;
}

/// Generalized key counts for `p`, indexed by PolicyIndex key.
inline std::vector<std::int64_t> aggregate_dense(const PopulationTable& pop, const PolicyIndex& index) {
  std::vector<std::int64_t> out(index.key_count(), 0);
  auto counts = pop.counts();
  for (std::size_t b = 0; b < counts.size(); ++b) out[index.key_of(b)] += counts[b];
  return out;
}

inline std::map<GeneralizedKey, std::int64_t> aggregate(const PopulationTable& pop,
                                                        const GeneralizationPolicy& p) {
  if (!same_atomic_domains(p.hierarchy(), pop.hierarchy())) {
    throw Error(ErrorCode::kMixedHierarchy, "policy and population use different atomic domains");
  }
  std::map<GeneralizedKey, std::int64_t> out;
  const auto& h = pop.hierarchy();
  auto counts = pop.counts();
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (counts[b] == 0) continue;
    out[generalize_bin(h.bin_at(b), p)] += counts[b];
  }
  return out;
}

inline std::int64_t population_group_size(const PopulationTable& pop, const GeneralizationPolicy& p,
                                          const GeneralizedKey& key) {
  if (!same_atomic_domains(p.hierarchy(), pop.hierarchy())) {
    throw Error(ErrorCode::kMixedHierarchy, "policy and population use different atomic domains");
  }
  const auto& h = pop.hierarchy();
  auto counts = pop.counts();
  std::int64_t total = 0;
  GeneralizedKey demographic = key;
  demographic.date_cell.reset();
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (counts[b] != 0 && generalize_bin(h.bin_at(b), p) == demographic) total += counts[b];
  }
  return total;
}

}  // namespace deid
