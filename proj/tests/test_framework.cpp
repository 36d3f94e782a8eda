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


#include "deid/framework.hpp"

#include <gtest/gtest.h>

#include "deid/synthetic.hpp"

namespace deid {
namespace {

const HierarchyPtr& H() { return default_hierarchy(); }

// Per-replicate reference: simulate each replicate on its own and score it
// with the single-trace functions.
std::optional<RiskSummary> Reference(const PopulationTable& pop, const CaseSeries& s, const GeneralizationPolicy& p,
                                     const RiskParams& params, std::uint64_t seed, std::size_t t) {
  std::vector<double> values;
  for (int r = 0; r < params.n_replicates; ++r) {
    auto trace = simulate_replicate(pop, s, seed, static_cast<std::uint64_t>(r));
    auto v = params.schedule == Schedule::kDaily ? pk_risk_at(trace, t, p, params) : pk_risk_weekly(trace, t, p, params);
    if (v) values.push_back(*v);
  }
  if (values.empty()) return std::nullopt;
  return summarize(values, params.coverage);
}

void ExpectSame(const std::optional<RiskSummary>& a, const std::optional<RiskSummary>& b, const std::string& what) {
  ASSERT_EQ(a.has_value(), b.has_value()) << what;
  if (!a) return;
  EXPECT_DOUBLE_EQ(a->mean, b->mean) << what;
  EXPECT_EQ(a->lower, b->lower) << what;
  EXPECT_EQ(a->upper, b->upper) << what;
}

class LockStep : public ::testing::Test {
 protected:
  PopulationTable pop = synthetic::county("90030", 6000, 2);
  CaseSeries series{"90030", Periodicity::kDaily, parse_iso_date("2021-01-01"),
                    {2, 15, 0, 40, 120, 7, 0, 0, 33, 250, 18, 5}};
  std::vector<PolicyIndex> compiled = compile_policies(enumerate_policies(H()));
};

TEST_F(LockStep, DailyMatchesPerReplicateReference) {
  RiskParams params;
  params.lagging_days = 3;
  params.n_replicates = 40;
  auto got = estimate_policy_risks(pop, series, compiled, params, 5, 1);
  ASSERT_EQ(got.size(), compiled.size());
  for (std::size_t j = 0; j < compiled.size(); j += 7) {
    ASSERT_EQ(got[j].releases.size(), series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
      const auto& r = got[j].releases[t];
      EXPECT_EQ(r.released, series.counts[t]);
      EXPECT_EQ(r.date, series.date_at(t));
      ExpectSame(r.summary, Reference(pop, series, compiled[j].policy(), params, 5, t),
                 got[j].code + " t=" + std::to_string(t));
    }
  }
}

TEST_F(LockStep, WeeklyMatchesPerReplicateReference) {
  RiskParams params;
  params.schedule = Schedule::kWeekly;
  params.n_replicates = 30;
  auto got = estimate_policy_risks(pop, series, compiled, params, 6, 1);
  const auto weekly = to_weekly(series);
  ASSERT_EQ(got[0].releases.size(), weekly.size());
  for (std::size_t j = 0; j < compiled.size(); j += 5) {
    for (std::size_t w = 0; w < weekly.size(); ++w) {
      ExpectSame(got[j].releases[w].summary, Reference(pop, weekly, compiled[j].policy(), params, 6, w),
                 got[j].code + " week " + std::to_string(w));
    }
  }
}

TEST_F(LockStep, ThreadCountDoesNotChangeResults) {
  RiskParams params;
  params.lagging_days = 5;
  params.n_replicates = 64;
  auto one = estimate_policy_risks(pop, series, compiled, params, 9, 1);
  auto four = estimate_policy_risks(pop, series, compiled, params, 9, 4);
  for (std::size_t j = 0; j < compiled.size(); ++j)
    for (std::size_t t = 0; t < series.size(); ++t)
      ExpectSame(one[j].releases[t].summary, four[j].releases[t].summary, one[j].code);
}

TEST_F(LockStep, WithheldRecordsLeaveLaterWindows) {
  RiskParams params;
  params.lagging_days = 3;
  params.n_replicates = 25;
  const PolicyIndex fine(parse_policy_code("3Cs*", H()));
  std::vector<const PolicyIndex*> per(series.size(), &fine);
  per[3] = nullptr;
  per[4] = nullptr;
  auto got = estimate_release_risks(pop, series, per, params, 12, 1);
  EXPECT_TRUE(got[3].withheld);
  EXPECT_FALSE(got[3].summary.has_value());
  EXPECT_EQ(got[3].released, 40);

  for (std::size_t t : {5u, 8u}) {
    std::vector<double> values;
    for (int r = 0; r < params.n_replicates; ++r) {
      auto trace = simulate_replicate(pop, series, 12, static_cast<std::uint64_t>(r));
      trace.draws[3].clear();
      trace.draws[4].clear();
      auto v = pk_risk_at(trace, t, fine.policy(), params);
      if (v) values.push_back(*v);
    }
    auto want = summarize(values, params.coverage);
    ASSERT_TRUE(got[t].summary.has_value());
    EXPECT_EQ(got[t].summary->upper, want.upper) << t;
    EXPECT_DOUBLE_EQ(got[t].summary->mean, want.mean) << t;
  }
}

TEST_F(LockStep, SingleReleasePolicyListMatchesStaticRun) {
  RiskParams params;
  params.lagging_days = 2;
  params.n_replicates = 20;
  std::vector<const PolicyIndex*> per(series.size(), &compiled[10]);
  auto seq = estimate_release_risks(pop, series, per, params, 3, 1);
  auto all = estimate_policy_risks(pop, series, compiled, params, 3, 1);
  for (std::size_t t = 0; t < series.size(); ++t) ExpectSame(seq[t].summary, all[10].releases[t].summary, "t");
}

TEST_F(LockStep, Errors) {
  RiskParams params;
  params.n_replicates = 2;
  std::vector<const PolicyIndex*> short_list(3, &compiled[0]);
  try {
    estimate_release_risks(pop, series, short_list, params, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAlignment);
  }
  CaseSeries weekly{"90030", Periodicity::kWeekly, parse_iso_date("2021-01-03"), {5, 5}};
  EXPECT_THROW(estimate_policy_risks(pop, weekly, compiled, params, 1, 1), Error);
  CaseSeries huge{"90030", Periodicity::kDaily, parse_iso_date("2021-01-03"), {5000, 5000}};
  try {
    estimate_policy_risks(pop, huge, compiled, params, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientPopulation);
  }
}

TEST(LatticePlan, ParentsAreOneStepFiner) {
  auto compiled = compile_policies(enumerate_policies(H()));
  LatticePlan plan(compiled);
  std::vector<std::size_t> position(compiled.size());
  for (std::size_t i = 0; i < plan.order().size(); ++i) position[plan.order()[i]] = i;
  std::size_t edges = 0;
  for (std::size_t j = 0; j < compiled.size(); ++j) {
    for (auto p : plan.parents(j)) {
      EXPECT_TRUE(generalizes(compiled[j].policy(), compiled[p].policy()));
      EXPECT_LT(position[p], position[j]);
      ++edges;
    }
  }
  // Per attribute with n levels: (n-1) steps times the product of the others.
  // Age 6, race 4, sex 2, ethnicity 2.
  EXPECT_EQ(edges, 5u * 16 + 3u * 24 + 1u * 48 + 1u * 48);
  EXPECT_TRUE(plan.parents(0).empty());
}

}  // namespace
}  // namespace deid
