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

// Quasi-identifier generalization hierarchies and the policy lattice.
//
// Four quasi-identifiers are modelled: age, race, sex and ethnicity. Each has
// an atomic domain and an ordered chain of partitions of that domain, finest
// first, ending in the single-cell suppressed partition ("*"). A policy picks
// one level per attribute and is written as a four-character code such as
// "2Bse" (age, race, sex, ethnicity symbols in that order).

#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deid/error.hpp"

namespace deid {

enum class Attribute : int { kAge = 0, kRace = 1, kSex = 2, kEthnicity = 3 };

inline constexpr int kNumAttributes = 4;
inline constexpr std::array<Attribute, kNumAttributes> kAllAttributes = {
    Attribute::kAge, Attribute::kRace, Attribute::kSex, Attribute::kEthnicity};

inline constexpr std::string_view attribute_name(Attribute a) {
  switch (a) {
    case Attribute::kAge: return "age";
    case Attribute::kRace: return "race";
    case Attribute::kSex: return "sex";
    case Attribute::kEthnicity: return "ethnicity";
  }
  return "?";
}

inline constexpr std::size_t index_of(Attribute a) { return static_cast<std::size_t>(a); }

/// Cell id used for every value of a suppressed attribute.
inline constexpr int kSuppressedCell = -1;
inline constexpr char kSuppressedSymbol = '*';

/// One partition of an attribute's atomic domain.
struct Level {
  char symbol = kSuppressedSymbol;
  bool suppressed = true;
  std::vector<int> cell_of;              // atomic value -> cell
  std::vector<std::string> cell_labels;  // empty when suppressed

  int cell_count() const { return suppressed ? 1 : static_cast<int>(cell_labels.size()); }
};

struct AttributeHierarchy {
  std::vector<std::string> values;  // canonical atomic labels
  std::map<std::string, int, std::less<>> lookup;
  std::vector<Level> levels;

  std::size_t domain_size() const { return values.size(); }

  int level_for_symbol(char symbol) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i].symbol == symbol) return static_cast<int>(i);
    }
    return -1;
  }

  std::optional<int> find_value(std::string_view label) const {
    auto it = lookup.find(label);
    if (it == lookup.end()) return std::nullopt;
    return it->second;
  }

  std::string accepted_labels() const {
    std::string out;
    for (const auto& v : values) {
      if (!out.empty()) out += ", ";
      out += v;
    }
    return out;
  }
};

/// Indices into the atomic domains. `age` is in years, with the domain's
/// maximum standing for "max and older".
struct AtomicBin {
  int age = 0;
  int sex = 0;
  int race = 0;
  int ethnicity = 0;

  auto operator<=>(const AtomicBin&) const = default;
};

// ---------------------------------------------------------------------------
// Level construction

inline std::string age_range_label(int lo, int hi, int max_age) {
  if (hi >= max_age) return std::to_string(lo) + "+";
  if (lo == hi) return std::to_string(lo);
  return std::to_string(lo) + "-" + std::to_string(hi);
}

/// Age partition given by ascending cell lower bounds; the first must be 0.
inline Level age_level_from_starts(char symbol, std::vector<int> starts, int max_age) {
  if (starts.empty() || starts.front() != 0 || !std::is_sorted(starts.begin(), starts.end()) ||
      std::adjacent_find(starts.begin(), starts.end()) != starts.end() ||
      starts.back() > max_age) {
    throw Error(ErrorCode::kValidation,
                std::string("age level '") + symbol +
                    "': starts must be strictly ascending, begin at 0 and not exceed the age cap");
  }
  Level level;
  level.symbol = symbol;
  level.suppressed = false;
  level.cell_of.resize(static_cast<std::size_t>(max_age) + 1);
  for (std::size_t c = 0; c < starts.size(); ++c) {
    int lo = starts[c];
    int hi = c + 1 < starts.size() ? starts[c + 1] - 1 : max_age;
    level.cell_labels.push_back(age_range_label(lo, hi, max_age));
    for (int a = lo; a <= hi; ++a) level.cell_of[static_cast<std::size_t>(a)] = static_cast<int>(c);
  }
  return level;
}

inline Level age_level_from_width(char symbol, int width, int max_age) {
  if (width < 1) throw Error(ErrorCode::kValidation, "age level width must be >= 1");
  std::vector<int> starts;
  for (int lo = 0; lo <= max_age; lo += width) starts.push_back(lo);
  return age_level_from_starts(symbol, std::move(starts), max_age);
}

inline Level suppressed_level(std::size_t domain_size) {
  Level level;
  level.symbol = kSuppressedSymbol;
  level.suppressed = true;
  level.cell_of.assign(domain_size, kSuppressedCell);
  return level;
}

/// Categorical partition: every atomic label must appear in exactly one group.
inline Level grouped_level(char symbol, const AttributeHierarchy& attr,
                           const std::vector<std::vector<std::string>>& groups,
                           std::vector<std::string> names = {}) {
  Level level;
  level.symbol = symbol;
  level.suppressed = false;
  level.cell_of.assign(attr.domain_size(), -2);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::string joined;
    for (const auto& label : groups[g]) {
      auto v = attr.find_value(label);
      if (!v) {
        throw Error(ErrorCode::kValidation, std::string("level '") + symbol +
                                                "': unknown value '" + label +
                                                "' (accepted: " + attr.accepted_labels() + ")");
      }
      if (level.cell_of[static_cast<std::size_t>(*v)] != -2) {
        throw Error(ErrorCode::kValidation, std::string("level '") + symbol + "': value '" +
                                                label + "' appears in more than one group");
      }
      level.cell_of[static_cast<std::size_t>(*v)] = static_cast<int>(g);
      if (!joined.empty()) joined += " or ";
      joined += attr.values[static_cast<std::size_t>(*v)];
    }
    level.cell_labels.push_back(g < names.size() ? names[g] : joined);
  }
  for (std::size_t v = 0; v < attr.domain_size(); ++v) {
    if (level.cell_of[v] == -2) {
      throw Error(ErrorCode::kValidation, std::string("level '") + symbol + "': value '" +
                                              attr.values[v] + "' is not assigned to any group");
    }
  }
  return level;
}

// ---------------------------------------------------------------------------
// HierarchySet

class HierarchySet {
 public:
  HierarchySet(std::string name, int max_age, std::array<AttributeHierarchy, kNumAttributes> attrs)
      : name_(std::move(name)), max_age_(max_age), attrs_(std::move(attrs)) {
    validate();
    for (std::size_t i = 0; i < kNumAttributes; ++i) domain_[i] = attrs_[i].domain_size();
    bin_count_ = domain_[0] * domain_[1] * domain_[2] * domain_[3];
  }

  const std::string& name() const { return name_; }
  int max_age() const { return max_age_; }
  const AttributeHierarchy& attribute(Attribute a) const { return attrs_[index_of(a)]; }
  std::size_t domain_size(Attribute a) const { return domain_[index_of(a)]; }

  /// Number of atomic bins (the product of the atomic domain sizes).
  std::size_t bin_count() const { return bin_count_; }

  bool contains(const AtomicBin& bin) const {
    return bin.age >= 0 && bin.age <= max_age_ && bin.race >= 0 &&
           static_cast<std::size_t>(bin.race) < domain_[1] && bin.sex >= 0 &&
           static_cast<std::size_t>(bin.sex) < domain_[2] && bin.ethnicity >= 0 &&
           static_cast<std::size_t>(bin.ethnicity) < domain_[3];
  }

  /// Canonical bin order: age-major, then race, sex, ethnicity.
  std::size_t bin_index(const AtomicBin& bin) const {
    if (!contains(bin)) {
      throw Error(ErrorCode::kValidation, "atomic bin outside the hierarchy's domains (age " +
                                              std::to_string(bin.age) + ")");
    }
    return ((static_cast<std::size_t>(bin.age) * domain_[1] + static_cast<std::size_t>(bin.race)) *
                domain_[2] +
            static_cast<std::size_t>(bin.sex)) *
               domain_[3] +
           static_cast<std::size_t>(bin.ethnicity);
  }

  AtomicBin bin_at(std::size_t index) const {
    AtomicBin bin;
    bin.ethnicity = static_cast<int>(index % domain_[3]);
    index /= domain_[3];
    bin.sex = static_cast<int>(index % domain_[2]);
    index /= domain_[2];
    bin.race = static_cast<int>(index % domain_[1]);
    bin.age = static_cast<int>(index / domain_[1]);
    return bin;
  }

  int atomic_value(const AtomicBin& bin, Attribute a) const {
    switch (a) {
      case Attribute::kAge: return bin.age;
      case Attribute::kRace: return bin.race;
      case Attribute::kSex: return bin.sex;
      case Attribute::kEthnicity: return bin.ethnicity;
    }
    return 0;
  }

 private:
  void validate() const {
    if (max_age_ < 0) throw Error(ErrorCode::kValidation, "age cap must be >= 0");
    if (attrs_[0].domain_size() != static_cast<std::size_t>(max_age_) + 1) {
      throw Error(ErrorCode::kValidation, "age domain must cover 0..age cap");
    }
    for (auto a : kAllAttributes) {
      const auto& attr = attrs_[index_of(a)];
      const std::string who(attribute_name(a));
      if (attr.domain_size() == 0) throw Error(ErrorCode::kValidation, who + ": empty domain");
      if (attr.levels.empty() || !attr.levels.back().suppressed) {
        throw Error(ErrorCode::kValidation, who + ": last level must be the suppressed level '*'");
      }
      for (std::size_t i = 0; i < attr.levels.size(); ++i) {
        const auto& level = attr.levels[i];
        if (level.suppressed != (level.symbol == kSuppressedSymbol)) {
          throw Error(ErrorCode::kValidation, who + ": symbol '*' is reserved for suppression");
        }
        if (level.suppressed && i + 1 != attr.levels.size()) {
          throw Error(ErrorCode::kValidation, who + ": only the last level may be suppressed");
        }
        if (level.cell_of.size() != attr.domain_size()) {
          throw Error(ErrorCode::kValidation, who + ": level does not cover the atomic domain");
        }
        for (std::size_t j = 0; j < i; ++j) {
          if (attr.levels[j].symbol == level.symbol) {
            throw Error(ErrorCode::kValidation,
                        who + ": duplicate level symbol '" + std::string(1, level.symbol) + "'");
          }
        }
        for (int cell : level.cell_of) {
          if (level.suppressed ? cell != kSuppressedCell
                               : (cell < 0 || cell >= level.cell_count())) {
            throw Error(ErrorCode::kValidation, who + ": level maps a value outside its cells");
          }
        }
        if (i == 0) continue;
        // Level i must coarsen level i-1: each finer cell lands in one coarser cell.
        const auto& finer = attr.levels[i - 1];
        std::vector<int> image(static_cast<std::size_t>(finer.cell_count()), -2);
        for (std::size_t v = 0; v < attr.domain_size(); ++v) {
          int fine_cell = finer.suppressed ? 0 : finer.cell_of[v];
          int& slot = image[static_cast<std::size_t>(fine_cell)];
          if (slot == -2) {
            slot = level.cell_of[v];
          } else if (slot != level.cell_of[v]) {
            throw Error(ErrorCode::kValidation,
                        who + ": level '" + std::string(1, level.symbol) +
                            "' is not a coarsening of level '" + std::string(1, finer.symbol) + "'");
          }
        }
      }
    }
  }

  std::string name_;
  int max_age_;
  std::array<AttributeHierarchy, kNumAttributes> attrs_;
  std::array<std::size_t, kNumAttributes> domain_{};
  std::size_t bin_count_ = 0;
};

using HierarchyPtr = std::shared_ptr<const HierarchySet>;

/// Hierarchy sets over the same atomic domains share the bin layout, so
/// policies from one can be applied to populations loaded with the other.
inline bool same_atomic_domains(const HierarchySet& x, const HierarchySet& y) {
  for (auto a : kAllAttributes) {
    if (x.attribute(a).values != y.attribute(a).values) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Config loading

/*
 * Hierarchy config schema (JSON):
 *
 *   {
 *     "name": "default",
 *     "age": { "max": 100,
 *              "levels": [ {"symbol": "1", "width": 1},
 *                          {"symbol": "K", "starts": [0, 18, 50, 65]},
 *                          {"symbol": "*"} ] },
 *     "race": { "values": [ {"label": "White", "aliases": ["W"]}, ... ],
 *               "levels": [ {"symbol": "B", "groups": [["White"], ["AIAN", "NHPI"]],
 *                            "names": ["White", "AIAN or PI"]},
 *                           {"symbol": "*"} ] },
 *     "sex": {...}, "ethnicity": {...}
 *   }
 *
 * Levels are listed finest first and must end with the suppressed level "*".
 */
inline constexpr std::string_view kDefaultHierarchyConfig = R"json({
  "name": "default",
  "age": {
    "max": 100,
    "levels": [
      {"symbol": "1", "width": 1},
      {"symbol": "2", "width": 5},
      {"symbol": "3", "width": 15},
      {"symbol": "4", "width": 30},
      {"symbol": "5", "width": 60},
      {"symbol": "*"}
    ]
  },
  "race": {
    "values": [
      {"label": "White", "aliases": ["White alone"]},
      {"label": "Black", "aliases": ["Black or African American"]},
      {"label": "Asian"},
      {"label": "AIAN", "aliases": ["American Indian or Alaska Native"]},
      {"label": "NHPI", "aliases": ["PI", "Native Hawaiian or Pacific Islander"]},
      {"label": "Other", "aliases": ["Multiple/Other", "Multiple", "Two or more races"]}
    ],
    "levels": [
      {"symbol": "A", "groups": [["White"], ["Black"], ["Asian"], ["AIAN"], ["NHPI"], ["Other"]]},
      {"symbol": "B", "groups": [["White"], ["Black"], ["Asian"], ["AIAN", "NHPI"], ["Other"]],
       "names": ["White", "Black", "Asian", "AIAN or PI", "Other"]},
      {"symbol": "C", "groups": [["White"], ["Black"], ["Asian", "AIAN", "NHPI", "Other"]],
       "names": ["White", "Black", "Other"]},
      {"symbol": "*"}
    ]
  },
  "sex": {
    "values": [
      {"label": "F", "aliases": ["Female"]},
      {"label": "M", "aliases": ["Male"]}
    ],
    "levels": [
      {"symbol": "s", "groups": [["F"], ["M"]]},
      {"symbol": "*"}
    ]
  },
  "ethnicity": {
    "values": [
      {"label": "H", "aliases": ["Hispanic", "Hispanic-Latino"]},
      {"label": "NH", "aliases": ["Non-Hispanic"]}
    ],
    "levels": [
      {"symbol": "e", "groups": [["H"], ["NH"]]},
      {"symbol": "*"}
    ]
  }
})json";

namespace detail {

inline char level_symbol(const nlohmann::json& level, std::string_view who) {
  auto symbol = level.at("symbol").get<std::string>();
  if (symbol.size() != 1) {
    throw Error(ErrorCode::kValidation,
                std::string(who) + ": level symbols must be one character, got '" + symbol + "'");
  }
  return symbol[0];
}

inline AttributeHierarchy parse_categorical(const nlohmann::json& node, std::string_view who) {
  AttributeHierarchy attr;
  for (const auto& value : node.at("values")) {
    auto label = value.at("label").get<std::string>();
    int idx = static_cast<int>(attr.values.size());
    attr.values.push_back(label);
    if (!attr.lookup.emplace(label, idx).second) {
      throw Error(ErrorCode::kValidation, std::string(who) + ": duplicate label '" + label + "'");
    }
    if (value.contains("aliases")) {
      for (const auto& alias : value.at("aliases")) {
        if (!attr.lookup.emplace(alias.get<std::string>(), idx).second) {
          throw Error(ErrorCode::kValidation,
                      std::string(who) + ": duplicate alias '" + alias.get<std::string>() + "'");
        }
      }
    }
  }
  for (const auto& level : node.at("levels")) {
    char symbol = level_symbol(level, who);
    if (symbol == kSuppressedSymbol) {
      attr.levels.push_back(suppressed_level(attr.domain_size()));
      continue;
    }
    auto groups = level.at("groups").get<std::vector<std::vector<std::string>>>();
    std::vector<std::string> names;
    if (level.contains("names")) names = level.at("names").get<std::vector<std::string>>();
    attr.levels.push_back(grouped_level(symbol, attr, groups, std::move(names)));
  }
  return attr;
}

inline AttributeHierarchy parse_age(const nlohmann::json& node, int max_age) {
  AttributeHierarchy attr;
  for (int a = 0; a <= max_age; ++a) {
    std::string label = a == max_age ? std::to_string(a) + "+" : std::to_string(a);
    attr.values.push_back(label);
    attr.lookup.emplace(std::to_string(a), a);
  }
  for (const auto& level : node.at("levels")) {
    char symbol = level_symbol(level, "age");
    if (symbol == kSuppressedSymbol) {
      attr.levels.push_back(suppressed_level(attr.domain_size()));
    } else if (level.contains("width")) {
      attr.levels.push_back(age_level_from_width(symbol, level.at("width").get<int>(), max_age));
    } else {
      attr.levels.push_back(
          age_level_from_starts(symbol, level.at("starts").get<std::vector<int>>(), max_age));
    }
  }
  return attr;
}

}  // namespace detail

inline HierarchyPtr parse_hierarchy_config(std::string_view text) {
  try {
    auto root = nlohmann::json::parse(text);
    int max_age = root.at("age").at("max").get<int>();
    std::array<AttributeHierarchy, kNumAttributes> attrs = {
        detail::parse_age(root.at("age"), max_age),
        detail::parse_categorical(root.at("race"), "race"),
        detail::parse_categorical(root.at("sex"), "sex"),
        detail::parse_categorical(root.at("ethnicity"), "ethnicity"),
    };
    return std::make_shared<const HierarchySet>(root.value("name", std::string("custom")), max_age,
                                                std::move(attrs));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("hierarchy config: ") + e.what());
  }
}

inline HierarchyPtr load_hierarchy_config(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_hierarchy_config(buf.str());
}

/// The built-in hierarchy set (6 age, 4 race, 2 sex, 2 ethnicity levels).
inline const HierarchyPtr& default_hierarchy() {
  static const HierarchyPtr instance = parse_hierarchy_config(kDefaultHierarchyConfig);
  return instance;
}

// ---------------------------------------------------------------------------
// Policies

class GeneralizationPolicy {
 public:
  GeneralizationPolicy(HierarchyPtr hierarchy, std::array<int, kNumAttributes> levels)
      : hierarchy_(std::move(hierarchy)), levels_(levels) {
    if (!hierarchy_) throw Error(ErrorCode::kInvalidArgument, "policy without a hierarchy set");
    for (auto a : kAllAttributes) {
      const auto& attr = hierarchy_->attribute(a);
      int lvl = levels_[index_of(a)];
      if (lvl < 0 || static_cast<std::size_t>(lvl) >= attr.levels.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string("level index out of range for ") + std::string(attribute_name(a)));
      }
      code_.push_back(attr.levels[static_cast<std::size_t>(lvl)].symbol);
    }
  }

  int level(Attribute a) const { return levels_[index_of(a)]; }
  const std::array<int, kNumAttributes>& levels() const { return levels_; }
  const std::string& code() const { return code_; }
  const HierarchySet& hierarchy() const { return *hierarchy_; }
  const HierarchyPtr& hierarchy_ptr() const { return hierarchy_; }

  const Level& level_def(Attribute a) const {
    return hierarchy_->attribute(a).levels[static_cast<std::size_t>(levels_[index_of(a)])];
  }

  friend bool operator==(const GeneralizationPolicy& x, const GeneralizationPolicy& y) {
    return x.hierarchy_ == y.hierarchy_ && x.levels_ == y.levels_;
  }

 private:
  HierarchyPtr hierarchy_;
  std::array<int, kNumAttributes> levels_;
  std::string code_;
};

inline GeneralizationPolicy parse_policy_code(std::string_view code, const HierarchyPtr& h) {
  if (code.size() != kNumAttributes) {
    throw Error(ErrorCode::kInvalidCode, "policy code '" + std::string(code) +
                                             "' must have exactly 4 characters");
  }
  std::array<int, kNumAttributes> levels{};
  for (auto a : kAllAttributes) {
    std::size_t pos = index_of(a);
    int lvl = h->attribute(a).level_for_symbol(code[pos]);
    if (lvl < 0) {
      std::string accepted;
      for (const auto& l : h->attribute(a).levels) accepted.push_back(l.symbol);
      throw Error(ErrorCode::kInvalidCode,
                  "policy code '" + std::string(code) + "': position " + std::to_string(pos + 1) +
                      " (" + std::string(attribute_name(a)) + ") has unknown symbol '" +
                      std::string(1, code[pos]) + "' (accepted: " + accepted + ")");
    }
    levels[pos] = lvl;
  }
  return GeneralizationPolicy(h, levels);
}

/// Every policy of the lattice: age-major, then race, sex, ethnicity, finest
/// level first. Each policy is preceded by all policies strictly finer than it.
inline std::vector<GeneralizationPolicy> enumerate_policies(const HierarchyPtr& h) {
  std::vector<GeneralizationPolicy> out;
  const auto n = [&](Attribute a) { return static_cast<int>(h->attribute(a).levels.size()); };
  for (int age = 0; age < n(Attribute::kAge); ++age)
    for (int race = 0; race < n(Attribute::kRace); ++race)
      for (int sex = 0; sex < n(Attribute::kSex); ++sex)
        for (int eth = 0; eth < n(Attribute::kEthnicity); ++eth)
          out.emplace_back(h, std::array<int, kNumAttributes>{age, race, sex, eth});
  return out;
}

inline bool same_hierarchy(const GeneralizationPolicy& x, const GeneralizationPolicy& y) {
  return x.hierarchy_ptr() == y.hierarchy_ptr() ||
         x.hierarchy().name() == y.hierarchy().name();
}

/// True iff `coarse` is at least as generalized as `fine` on every attribute.
inline bool generalizes(const GeneralizationPolicy& coarse, const GeneralizationPolicy& fine) {
  if (!same_hierarchy(coarse, fine)) {
    throw Error(ErrorCode::kMixedHierarchy,
                "cannot compare policies from hierarchy sets '" + coarse.hierarchy().name() +
                    "' and '" + fine.hierarchy().name() + "'");
  }
  for (auto a : kAllAttributes) {
    if (coarse.level(a) < fine.level(a)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generalized keys

struct GeneralizedKey {
  std::array<int, kNumAttributes> cells{};
  std::optional<std::int64_t> date_cell;  // day or week index

  int cell(Attribute a) const { return cells[index_of(a)]; }
  auto operator<=>(const GeneralizedKey&) const = default;
};

inline GeneralizedKey generalize_bin(const AtomicBin& bin, const GeneralizationPolicy& p) {
  const auto& h = p.hierarchy();
  if (!h.contains(bin)) {
    throw Error(ErrorCode::kValidation, "atomic bin outside the hierarchy's domains");
  }
  GeneralizedKey key;
  for (auto a : kAllAttributes) {
    key.cells[index_of(a)] = p.level_def(a).cell_of[static_cast<std::size_t>(h.atomic_value(bin, a))];
  }
  return key;
}

/// Human-readable key such as "40-44|White|F|NH"; suppressed cells print "*".
inline std::string key_label(const GeneralizedKey& key, const GeneralizationPolicy& p) {
  std::string out;
  for (auto a : kAllAttributes) {
    if (a != Attribute::kAge) out += '|';
    int cell = key.cell(a);
    out += cell == kSuppressedCell ? std::string(1, kSuppressedSymbol)
                                   : p.level_def(a).cell_labels.at(static_cast<std::size_t>(cell));
  }
  if (key.date_cell) out += "|t" + std::to_string(*key.date_cell);
  return out;
}

/// A policy compiled to a dense atomic-bin -> key-index table. Key indices are
/// mixed-radix encodings of the four cells (suppressed cells encode as 0).
class PolicyIndex {
 public:
  explicit PolicyIndex(GeneralizationPolicy policy) : policy_(std::move(policy)) {
    const auto& h = policy_.hierarchy();
    for (auto a : kAllAttributes) radix_[index_of(a)] = static_cast<std::uint32_t>(policy_.level_def(a).cell_count());
    key_count_ = radix_[0] * radix_[1] * radix_[2] * radix_[3];
    key_of_bin_.resize(h.bin_count());
    for (std::size_t b = 0; b < h.bin_count(); ++b) {
      key_of_bin_[b] = encode(generalize_bin(h.bin_at(b), policy_));
    }
  }

  const GeneralizationPolicy& policy() const { return policy_; }
  std::uint32_t key_of(std::size_t bin) const { return key_of_bin_[bin]; }
  const std::vector<std::uint32_t>& key_table() const { return key_of_bin_; }
  std::size_t key_count() const { return key_count_; }

  std::uint32_t encode(const GeneralizedKey& key) const {
    std::uint32_t idx = 0;
    for (std::size_t i = 0; i < kNumAttributes; ++i) {
      int cell = key.cells[i] == kSuppressedCell ? 0 : key.cells[i];
      idx = idx * radix_[i] + static_cast<std::uint32_t>(cell);
    }
    return idx;
  }

  GeneralizedKey decode(std::uint32_t idx) const {
    GeneralizedKey key;
    for (std::size_t i = kNumAttributes; i-- > 0;) {
      auto cell = static_cast<int>(idx % radix_[i]);
      idx /= radix_[i];
      key.cells[i] = policy_.level_def(kAllAttributes[i]).suppressed ? kSuppressedCell : cell;
    }
    return key;
  }

 private:
  GeneralizationPolicy policy_;
  std::array<std::uint32_t, kNumAttributes> radix_{};
  std::uint32_t key_count_ = 0;
  std::vector<std::uint32_t> key_of_bin_;
};

inline std::vector<PolicyIndex> compile_policies(const std::vector<GeneralizationPolicy>& policies) {
  std::vector<PolicyIndex> out;
  out.reserve(policies.size());
  for (const auto& p : policies) out.emplace_back(p);
  return out;
}

}  // namespace deid
