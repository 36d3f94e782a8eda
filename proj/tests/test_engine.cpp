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


#include "deid/engine.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "deid/synthetic.hpp"
#include "oracles.hpp"

namespace deid {
namespace {

double ExactPmf(std::int64_t good, std::int64_t bad, std::int64_t n, std::int64_t x) {
  auto lc = [](double a, double b) { return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1); };
  if (x < std::max<std::int64_t>(0, n - bad) || x > std::min(n, good)) return 0.0;
  return std::exp(lc(good, x) + lc(bad, n - x) - lc(good + bad, n));
}

struct HyperCase {
  std::int64_t good, bad, sample;
};

class HypergeometricPmf : public ::testing::TestWithParam<HyperCase> {};

TEST_P(HypergeometricPmf, MatchesExactDistribution) {
  const auto c = GetParam();
  Xoshiro256 rng(c.good * 1000003 + c.bad * 31 + c.sample);
  constexpr int kDraws = 200000;
  std::map<std::int64_t, int> hist;
  for (int i = 0; i < kDraws; ++i) {
    auto x = sample_hypergeometric(c.good, c.bad, c.sample, rng);
    ASSERT_GE(x, 0);
    ASSERT_LE(x, std::min(c.good, c.sample));
    ASSERT_GE(c.sample - x, 0);
    ASSERT_LE(c.sample - x, c.bad);
    ++hist[x];
  }
  double worst = 0;
  for (std::int64_t x = 0; x <= std::min(c.good, c.sample); ++x) {
    double emp = hist.count(x) ? static_cast<double>(hist[x]) / kDraws : 0.0;
    worst = std::max(worst, std::abs(emp - ExactPmf(c.good, c.bad, c.sample, x)));
  }
  EXPECT_LT(worst, 0.005);
}

INSTANTIATE_TEST_SUITE_P(Regimes, HypergeometricPmf,
                         ::testing::Values(HyperCase{5, 5, 3}, HyperCase{50, 50, 10}, HyperCase{3, 997, 400},
                                           HyperCase{300, 700, 250}, HyperCase{700, 300, 600},
                                           HyperCase{20000, 630000, 25000}, HyperCase{1, 1, 1},
                                           HyperCase{40, 60, 99}));

TEST(Hypergeometric, EdgeCases) {
  Xoshiro256 rng(1);
  EXPECT_EQ(sample_hypergeometric(0, 10, 5, rng), 0);
  EXPECT_EQ(sample_hypergeometric(10, 0, 5, rng), 5);
  EXPECT_EQ(sample_hypergeometric(4, 6, 10, rng), 4);
  EXPECT_EQ(sample_hypergeometric(4, 6, 0, rng), 0);
}

TEST(LogFactorial, TableAndStirlingAgreeWithLgamma) {
  for (std::int64_t k : {0, 1, 5, 127, 128, 129, 1000, 1000000}) {
    EXPECT_NEAR(detail::log_factorial(k), std::lgamma(static_cast<double>(k) + 1), 1e-9 * (1 + k)) << k;
  }
}

TEST(DrawWithoutReplacement, ExhaustiveAndEmpty) {
  Xoshiro256 rng(3);
  std::vector<std::int64_t> pool = {3, 2};
  EXPECT_EQ(draw_without_replacement(pool, 5, rng), pool);
  EXPECT_EQ(draw_without_replacement(pool, 0, rng), (std::vector<std::int64_t>{0, 0}));
}

TEST(DrawWithoutReplacement, TooManyIsInsufficientPopulation) {
  Xoshiro256 rng(3);
  std::vector<std::int64_t> pool = {3, 2};
  try {
    draw_without_replacement(pool, 6, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientPopulation);
  }
}

TEST(DrawWithoutReplacement, MeanMatchesShuffleOracle) {
  std::vector<std::int64_t> pool = {50, 50};
  Xoshiro256 rng(11);
  std::mt19937_64 ref(11);
  double mean = 0, ref_mean = 0;
  constexpr int kReps = 10000;
  for (int r = 0; r < kReps; ++r) {
    auto d = draw_without_replacement(pool, 10, rng);
    ASSERT_EQ(d[0] + d[1], 10);
    mean += static_cast<double>(d[0]) / kReps;
    ref_mean += static_cast<double>(oracle::shuffle_draw(pool, 10, ref)[0]) / kReps;
  }
  EXPECT_NEAR(mean, 5.0, 0.15);
  EXPECT_NEAR(ref_mean, 5.0, 0.15);
}

// Both internal paths (per-individual and per-bin sweep) must give the same
// distribution; compare first and second moments per bin to the exact ones.
TEST(SusceptiblePool, BothPathsHaveExactMoments) {
  std::vector<std::int64_t> pool = {1, 7, 0, 30, 12, 50};
  const double total = 100;
  for (std::int64_t n : {4, 6, 60}) {  // 6 bins: n <= 6 goes per-individual
    std::vector<double> mean(pool.size()), sq(pool.size());
    Xoshiro256 rng(static_cast<std::uint64_t>(n));
    constexpr int kReps = 40000;
    for (int r = 0; r < kReps; ++r) {
      SusceptiblePool p(pool);
      SparseCounts out;
      p.draw(n, rng, out);
      ASSERT_EQ(sparse_total(out), n);
      for (std::size_t i = 1; i < out.size(); ++i) ASSERT_LT(out[i - 1].bin, out[i].bin);
      for (const auto& e : out) {
        mean[e.bin] += static_cast<double>(e.count) / kReps;
        sq[e.bin] += static_cast<double>(e.count * e.count) / kReps;
        ASSERT_LE(e.count, pool[e.bin]);
        ASSERT_EQ(p.count(e.bin), pool[e.bin] - e.count);
      }
      ASSERT_EQ(p.total(), 100 - n);
    }
    for (std::size_t b = 0; b < pool.size(); ++b) {
      double K = static_cast<double>(pool[b]);
      double m = n * K / total;
      double v = n * (K / total) * (1 - K / total) * (total - n) / (total - 1);
      EXPECT_NEAR(mean[b], m, 0.03 + 0.01 * m) << "n=" << n << " bin=" << b;
      EXPECT_NEAR(sq[b] - mean[b] * mean[b], v, 0.05 + 0.03 * v) << "n=" << n << " bin=" << b;
    }
  }
}

TEST(SusceptiblePool, RepeatedDrawsDepleteAndKeepTreeConsistent) {
  auto pop = synthetic::county("90009", 3000, 1);
  SusceptiblePool p(pop.counts());
  Xoshiro256 rng(5);
  std::vector<std::int64_t> taken(pop.counts().size(), 0);
  SparseCounts out;
  for (std::int64_t n : {10, 2500, 3, 400, 87}) {  // mixes both paths
    p.draw(n, rng, out);
    for (const auto& e : out) taken[e.bin] += e.count;
  }
  for (std::size_t b = 0; b < taken.size(); ++b) EXPECT_EQ(taken[b] + p.count(b), pop.counts()[b]);
  EXPECT_EQ(p.total(), 0);
}

PopulationTable SmallPop(std::int64_t total) {
  auto h = default_hierarchy();
  std::vector<std::int64_t> c(h->bin_count(), 0);
  for (std::int64_t i = 0; i < total; ++i) c[static_cast<std::size_t>((i * 37) % 20)] += 1;
  return PopulationTable(h, "00001", c);
}

TEST(SimulateReplicate, ConservationAndDepletion) {
  auto pop = SmallPop(10);
  CaseSeries s{"00001", Periodicity::kDaily, parse_iso_date("2021-01-01"), {3, 2}};
  auto trace = simulate_replicate(pop, s, 1, 0);
  ASSERT_EQ(trace.size(), 2u);
  EXPECT_EQ(sparse_total(trace.draws[0]), 3);
  EXPECT_EQ(sparse_total(trace.draws[1]), 2);
  std::vector<std::int64_t> left(pop.counts().begin(), pop.counts().end());
  for (const auto& d : trace.draws)
    for (const auto& e : d) left[e.bin] -= e.count;
  std::int64_t rest = 0;
  for (auto c : left) {
    EXPECT_GE(c, 0);
    rest += c;
  }
  EXPECT_EQ(rest, 5);
}

TEST(SimulateReplicate, WholePopulationBoundary) {
  auto pop = SmallPop(10);
  CaseSeries s{"00001", Periodicity::kDaily, parse_iso_date("2021-01-01"), {4, 6}};
  auto trace = simulate_replicate(pop, s, 1, 0);
  std::vector<std::int64_t> drawn(pop.counts().size(), 0);
  for (const auto& d : trace.draws)
    for (const auto& e : d) drawn[e.bin] += e.count;
  EXPECT_TRUE(std::equal(drawn.begin(), drawn.end(), pop.counts().begin()));
}

TEST(SimulateReplicate, ExceedingPopulationNamesTheTimeIndex) {
  auto pop = SmallPop(10);
  CaseSeries s{"00001", Periodicity::kDaily, parse_iso_date("2021-01-01"), {4, 6, 1}};
  try {
    simulate_replicate(pop, s, 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientPopulation);
    EXPECT_NE(std::string(e.what()).find("time index 2"), std::string::npos);
  }
}

TEST(SimulateReplicate, DeterministicAndReplicateSensitive) {
  auto pop = synthetic::county("90010", 20000, 2);
  CaseSeries s{"90010", Periodicity::kDaily, parse_iso_date("2021-01-01"), {30, 0, 500, 4000, 7}};
  auto a = simulate_replicate(pop, s, 99, 3);
  auto b = simulate_replicate(pop, s, 99, 3);
  auto c = simulate_replicate(pop, s, 99, 4);
  EXPECT_EQ(a.draws, b.draws);
  EXPECT_NE(a.draws, c.draws);
  // Replicate 3 does not depend on whether replicate 4 ran first.
  auto c2 = simulate_replicate(pop, s, 99, 4);
  auto a2 = simulate_replicate(pop, s, 99, 3);
  EXPECT_EQ(a2.draws, a.draws);
  EXPECT_EQ(c2.draws, c.draws);
}

TEST(SimulateReplicate, NoReinfectionOverManyReplicates) {
  auto pop = synthetic::county("90011", 2000, 4);
  CaseSeries s{"90011", Periodicity::kDaily, parse_iso_date("2021-01-01"), {100, 900, 5, 600, 395}};
  for (std::uint64_t r = 0; r < 50; ++r) {
    auto t = simulate_replicate(pop, s, 7, r);
    std::vector<std::int64_t> drawn(pop.counts().size(), 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_EQ(sparse_total(t.draws[i]), s.counts[i]);
      for (const auto& e : t.draws[i]) drawn[e.bin] += e.count;
    }
    for (std::size_t b = 0; b < drawn.size(); ++b) ASSERT_LE(drawn[b], pop.counts()[b]);
  }
}

TEST(SimulateReplicate, TwoPointSeriesIsExchangeableWithOneDraw) {
  // Total drawn per bin over [a, b] must match a single draw of a + b.
  std::vector<std::int64_t> pool = {5, 9, 14, 2};
  auto h = default_hierarchy();
  std::vector<std::int64_t> dense(h->bin_count(), 0);
  for (std::size_t i = 0; i < pool.size(); ++i) dense[i] = pool[i];
  PopulationTable pop(h, "00002", dense);
  CaseSeries s{"00002", Periodicity::kDaily, parse_iso_date("2021-01-01"), {3, 8}};
  std::mt19937_64 ref(4);
  constexpr int kReps = 20000;
  std::vector<double> sim(4), brute(4);
  for (int r = 0; r < kReps; ++r) {
    auto t = simulate_replicate(pop, s, 17, static_cast<std::uint64_t>(r));
    for (const auto& d : t.draws)
      for (const auto& e : d) sim[e.bin] += static_cast<double>(e.count) / kReps;
    auto o = oracle::shuffle_draw(pool, 11, ref);
    for (std::size_t b = 0; b < 4; ++b) brute[b] += static_cast<double>(o[b]) / kReps;
  }
  for (std::size_t b = 0; b < 4; ++b) EXPECT_NEAR(sim[b], brute[b], 0.05 + 0.02 * brute[b]) << b;
}

TEST(SimulateSingleDraw, EdgeCasesAndEquivalence) {
  auto pop = synthetic::county("90012", 500, 4);
  auto all = simulate_single_draw(pop, pop.total(), 1, 0);
  EXPECT_EQ(to_dense(all, pop.counts().size()), std::vector<std::int64_t>(pop.counts().begin(), pop.counts().end()));
  EXPECT_TRUE(simulate_single_draw(pop, 0, 1, 0).empty());
  CaseSeries one{"90012", Periodicity::kDaily, parse_iso_date("2021-01-01"), {123}};
  EXPECT_EQ(simulate_single_draw(pop, 123, 8, 2), simulate_replicate(pop, one, 8, 2).draws[0]);
  EXPECT_THROW(simulate_single_draw(pop, 501, 1, 0), Error);
}

TEST(CaseSeries, LoadDailyAndWeekly) {
  std::istringstream in("fips,date,new_cases\n47037,2020-08-02,3\n47037,2020-08-03,0\n01001,2020-08-03,5\n");
  auto s = load_case_series(in, Periodicity::kDaily);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.at("47037").counts, (std::vector<std::int64_t>{3, 0}));
  EXPECT_EQ(format_iso_date(s.at("01001").start), "2020-08-03");

  std::istringstream weekly("fips,date,new_cases\n47037,2020-08-02,30\n47037,2020-08-09,10\n");
  auto w = load_case_series(weekly, Periodicity::kWeekly);
  EXPECT_EQ(format_iso_date(w.at("47037").date_at(1)), "2020-08-09");
}

std::string SeriesError(const std::string& body, Periodicity p) {
  std::istringstream in("fips,date,new_cases\n" + body);
  try {
    load_case_series(in, p);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(CaseSeries, Rejections) {
  EXPECT_NE(SeriesError("47037,2020-08-03,3\n", Periodicity::kWeekly).find("week must start Sunday"),
            std::string::npos);
  EXPECT_NE(SeriesError("47037,2020-08-02,-3\n", Periodicity::kDaily).find("nonnegative"), std::string::npos);
  EXPECT_NE(SeriesError("47037,2020-08-02,3\n47037,2020-08-02,1\n", Periodicity::kDaily).find("duplicate"),
            std::string::npos);
  EXPECT_NE(SeriesError("47037,2020-08-02,3\n47037,2020-08-04,1\n", Periodicity::kDaily).find("gap"),
            std::string::npos);
  EXPECT_FALSE(SeriesError("47037,2020-02-30,3\n", Periodicity::kDaily).empty());
}

TEST(CaseSeries, ToWeeklyUsesSundayWeeks) {
  // 2020-08-05 is a Wednesday.
  CaseSeries d{"1", Periodicity::kDaily, parse_iso_date("2020-08-05"), {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
  auto w = to_weekly(d);
  EXPECT_EQ(format_iso_date(w.start), "2020-08-02");
  EXPECT_EQ(w.counts, (std::vector<std::int64_t>{1 + 2 + 3 + 4, 5 + 6 + 7 + 8 + 9 + 10 + 0}));
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  auto a = make_stream(1, "47037", StreamPurpose::kSimulation, 0);
  auto b = make_stream(1, "47037", StreamPurpose::kSimulation, 0);
  auto c = make_stream(1, "47037", StreamPurpose::kSimulation, 1);
  auto d = make_stream(1, "47037", StreamPurpose::kSearch, 0);
  auto e = make_stream(1, "47039", StreamPurpose::kSimulation, 0);
  auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  EXPECT_NE(x, e());
  Xoshiro256 r(42);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

}  // namespace
}  // namespace deid
