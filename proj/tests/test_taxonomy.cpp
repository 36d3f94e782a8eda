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


#include "deid/taxonomy.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "deid/planner.hpp"

namespace deid {
namespace {

const HierarchyPtr& H() { return default_hierarchy(); }

AtomicBin Bin(int age, const char* sex, const char* race, const char* eth) {
  const auto& h = *H();
  return {age, *h.attribute(Attribute::kSex).find_value(sex), *h.attribute(Attribute::kRace).find_value(race),
          *h.attribute(Attribute::kEthnicity).find_value(eth)};
}

std::string Label(const AtomicBin& b, const char* code) {
  auto p = parse_policy_code(code, H());
  return key_label(generalize_bin(b, p), p);
}

constexpr const char* kTwoLevelConfig = R"({
  "name": "tiny",
  "age": {"max": 9, "levels": [{"symbol": "1", "width": 5}, {"symbol": "*"}]},
  "race": {"values": [{"label": "X"}, {"label": "Y"}],
           "levels": [{"symbol": "A", "groups": [["X"], ["Y"]]}, {"symbol": "*"}]},
  "sex": {"values": [{"label": "F"}, {"label": "M"}],
          "levels": [{"symbol": "s", "groups": [["F"], ["M"]]}, {"symbol": "*"}]},
  "ethnicity": {"values": [{"label": "H"}, {"label": "NH"}],
                "levels": [{"symbol": "e", "groups": [["H"], ["NH"]]}, {"symbol": "*"}]}
})";

TEST(DefaultHierarchy, LevelCounts) {
  EXPECT_EQ(H()->attribute(Attribute::kAge).levels.size(), 6u);
  EXPECT_EQ(H()->attribute(Attribute::kRace).levels.size(), 4u);
  EXPECT_EQ(H()->attribute(Attribute::kSex).levels.size(), 2u);
  EXPECT_EQ(H()->attribute(Attribute::kEthnicity).levels.size(), 2u);
  EXPECT_EQ(H()->bin_count(), 101u * 6 * 2 * 2);
}

TEST(DefaultHierarchy, EveryLevelIsAPartitionRefinedByThePrevious) {
  for (auto a : kAllAttributes) {
    const auto& attr = H()->attribute(a);
    EXPECT_TRUE(attr.levels.back().suppressed);
    for (std::size_t i = 1; i < attr.levels.size(); ++i) {
      const auto& fine = attr.levels[i - 1];
      const auto& coarse = attr.levels[i];
      std::map<int, int> image;
      for (std::size_t v = 0; v < attr.domain_size(); ++v) {
        auto [it, fresh] = image.emplace(fine.cell_of[v], coarse.cell_of[v]);
        EXPECT_EQ(it->second, coarse.cell_of[v]) << attribute_name(a) << " level " << i;
      }
    }
  }
}

TEST(ParsePolicyCode, ResolvesSymbols) {
  auto p = parse_policy_code("2Bse", H());
  EXPECT_EQ(p.level(Attribute::kAge), 1);
  EXPECT_EQ(p.level(Attribute::kRace), 1);
  EXPECT_EQ(p.level(Attribute::kSex), 0);
  EXPECT_EQ(p.level(Attribute::kEthnicity), 0);
  EXPECT_EQ(p.code(), "2Bse");
}

TEST(ParsePolicyCode, AllSuppressed) {
  auto p = parse_policy_code("****", H());
  for (auto a : kAllAttributes) EXPECT_TRUE(p.level_def(a).suppressed);
}

TEST(ParsePolicyCode, UnknownSymbolNamesPosition) {
  try {
    parse_policy_code("9Q??", H());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidCode);
    EXPECT_NE(std::string(e.what()).find("position 1"), std::string::npos);
  }
  try {
    parse_policy_code("1Qse", H());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("position 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("ABC*"), std::string::npos);
  }
  EXPECT_THROW(parse_policy_code("1As", H()), Error);
  EXPECT_THROW(parse_policy_code("1Ase*", H()), Error);
}

TEST(EnumeratePolicies, DefaultLatticeHas96DistinctRoundTrippingCodes) {
  auto all = enumerate_policies(H());
  ASSERT_EQ(all.size(), 96u);
  std::set<std::string> codes;
  for (const auto& p : all) {
    codes.insert(p.code());
    EXPECT_EQ(parse_policy_code(p.code(), H()), p);
    EXPECT_EQ(parse_policy_code(p.code(), H()).code(), p.code());
  }
  EXPECT_EQ(codes.size(), 96u);
  EXPECT_EQ(all.front().code(), "1Ase");
  EXPECT_EQ(all.back().code(), "****");
  EXPECT_EQ(all[1].code(), "1As*");
  EXPECT_EQ(all[2].code(), "1A*e");
}

TEST(EnumeratePolicies, TwoLevelsPerAttributeGives16) {
  auto h = parse_hierarchy_config(kTwoLevelConfig);
  EXPECT_EQ(enumerate_policies(h).size(), 16u);
}

TEST(Generalizes, PaperParentChildExample) {
  auto p2 = parse_policy_code("2***", H());
  auto p3 = parse_policy_code("3***", H());
  EXPECT_TRUE(generalizes(p3, p2));
  EXPECT_FALSE(generalizes(p2, p3));
}

TEST(Generalizes, IncomparablePair) {
  auto a = parse_policy_code("3Ase", H());
  auto b = parse_policy_code("2Bse", H());
  EXPECT_FALSE(generalizes(a, b));
  EXPECT_FALSE(generalizes(b, a));
}

TEST(Generalizes, IsAPartialOrderOverTheLattice) {
  auto all = enumerate_policies(H());
  for (const auto& p : all) EXPECT_TRUE(generalizes(p, p));
  for (const auto& p : all) {
    for (const auto& q : all) {
      if (generalizes(p, q) && generalizes(q, p)) {
        EXPECT_EQ(p, q);
      }
      if (!generalizes(q, p)) continue;
      for (const auto& r : all) {
        if (generalizes(r, q)) {
          EXPECT_TRUE(generalizes(r, p)) << r.code() << q.code() << p.code();
        }
      }
    }
  }
}

TEST(Generalizes, MixedHierarchiesRejected) {
  auto tiny = parse_hierarchy_config(kTwoLevelConfig);
  EXPECT_THROW(generalizes(parse_policy_code("1Ase", tiny), parse_policy_code("1Ase", H())), Error);
}

TEST(GeneralizeBin, FiveYearAge) {
  EXPECT_EQ(Label(Bin(42, "F", "White", "NH"), "2Bse"), "40-44|White|F|NH");
}

TEST(GeneralizeBin, MergesAianAndNhpiAtLevelB) {
  EXPECT_EQ(Label(Bin(42, "F", "AIAN", "H"), "1Bse"), "42|AIAN or PI|F|H");
  EXPECT_EQ(Label(Bin(42, "F", "NHPI", "H"), "1Bse"), "42|AIAN or PI|F|H");
  EXPECT_EQ(Label(Bin(42, "F", "AIAN", "H"), "1Ase"), "42|AIAN|F|H");
}

TEST(GeneralizeBin, EverythingSuppressedIsOneKey) {
  auto p = parse_policy_code("****", H());
  const auto first = generalize_bin(H()->bin_at(0), p);
  for (std::size_t b = 0; b < H()->bin_count(); b += 37) EXPECT_EQ(generalize_bin(H()->bin_at(b), p), first);
  EXPECT_EQ(key_label(first, p), "*|*|*|*");
}

TEST(GeneralizeBin, TopCodedAge) {
  EXPECT_EQ(Label(Bin(100, "M", "Black", "NH"), "1Ase"), "100+|Black|M|NH");
  EXPECT_EQ(Label(Bin(97, "M", "Black", "NH"), "2Ase"), "95-99|Black|M|NH");
}

TEST(GeneralizeBin, OutOfDomainRejected) {
  AtomicBin bad{101, 0, 0, 0};
  EXPECT_THROW(generalize_bin(bad, parse_policy_code("1Ase", H())), Error);
  AtomicBin bad_race{10, 0, 6, 0};
  EXPECT_THROW(generalize_bin(bad_race, parse_policy_code("1Ase", H())), Error);
}

TEST(GeneralizeBin, KeyMergingFollowsTheOrder) {
  auto all = enumerate_policies(H());
  std::vector<PolicyIndex> idx = compile_policies(all);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (!generalizes(all[j], all[i])) continue;
      // Equal keys under the finer policy stay equal under the coarser one:
      // the coarse key is a function of the fine key.
      std::map<std::uint32_t, std::uint32_t> f;
      for (std::size_t b = 0; b < H()->bin_count(); ++b) {
        auto [it, fresh] = f.emplace(idx[i].key_of(b), idx[j].key_of(b));
        ASSERT_EQ(it->second, idx[j].key_of(b)) << all[i].code() << " -> " << all[j].code();
      }
    }
  }
}

TEST(PolicyIndex, EncodeDecodeMatchesGeneralizeBin) {
  for (const char* code : {"1Ase", "3C*e", "**s*", "5B**"}) {
    PolicyIndex idx(parse_policy_code(code, H()));
    for (std::size_t b = 0; b < H()->bin_count(); b += 11) {
      auto key = generalize_bin(H()->bin_at(b), idx.policy());
      EXPECT_EQ(idx.key_of(b), idx.encode(key));
      EXPECT_EQ(idx.decode(idx.key_of(b)), key);
    }
  }
}

TEST(HierarchyConfig, RejectsNonNestedLevels) {
  std::string cfg = kTwoLevelConfig;
  auto pos = cfg.find(R"({"symbol": "1", "width": 5})");
  cfg.replace(pos, std::string(R"({"symbol": "1", "width": 5})").size(),
              R"({"symbol": "1", "width": 5}, {"symbol": "2", "starts": [0, 3]})");
  try {
    parse_hierarchy_config(cfg);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("not a coarsening"), std::string::npos);
  }
}

TEST(HierarchyConfig, RejectsMissingSuppressedLevel) {
  std::string cfg = kTwoLevelConfig;
  auto pos = cfg.find(R"(, {"symbol": "*"}]},
  "race")");
  cfg.erase(pos, std::string(R"(, {"symbol": "*"})").size());
  EXPECT_THROW(parse_hierarchy_config(cfg), Error);
}

TEST(HierarchyConfig, RejectsUnassignedValue) {
  std::string cfg = kTwoLevelConfig;
  auto pos = cfg.find(R"([["X"], ["Y"]])");
  cfg.replace(pos, std::string(R"([["X"], ["Y"]])").size(), R"([["X"]])");
  EXPECT_THROW(parse_hierarchy_config(cfg), Error);
}

TEST(HierarchyConfig, DefaultLoadsFromStream) {
  std::istringstream in{std::string(kDefaultHierarchyConfig)};
  auto h = load_hierarchy_config(in);
  EXPECT_EQ(h->name(), "default");
  EXPECT_EQ(enumerate_policies(h).size(), 96u);
}

TEST(KAnonymousBaseline, Cells) {
  auto k = builtin_k_anonymous_policy();
  EXPECT_EQ(k.code(), "KAse");
  auto label = [&](int age, const char* race) { return key_label(generalize_bin(Bin(age, "F", race, "H"), k), k); };
  EXPECT_EQ(label(17, "White"), "0-17|White|F|H");
  EXPECT_EQ(label(18, "White"), "18-49|White|F|H");
  EXPECT_EQ(label(64, "White"), "50-64|White|F|H");
  EXPECT_EQ(label(65, "White"), "65+|White|F|H");
  EXPECT_EQ(label(100, "White"), "65+|White|F|H");
  EXPECT_EQ(label(30, "AIAN"), "18-49|AIAN|F|H");
  EXPECT_NE(label(30, "AIAN"), label(30, "NHPI"));
}

}  // namespace
}  // namespace deid
