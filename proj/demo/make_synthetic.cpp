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


// Writes a synthetic input set for the deid tool: population.csv,
// cases.csv, forecasts.csv and run.json. One county per population
// category by default, with a 448-day season starting 2020-08-02.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "deid/deid.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic deid inputs"};
  std::string out = "synthetic";
  std::uint64_t seed = 2020;
  int days = 448;
  int replicates = 1000;
  double forecast_error = 0.3;
  std::vector<std::int64_t> sizes = {800, 20000, 75000, 650000, 1200000};
  app.add_option("--out", out, "Output directory");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--days", days, "Season length in days");
  app.add_option("--sizes", sizes, "County populations");
  app.add_option("--replicates", replicates, "Replicates written into run.json");
  app.add_option("--forecast-error", forecast_error, "Relative forecast error bound");
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  fs::create_directories(out);
  deid::PopulationSet pops;
  std::vector<deid::CaseSeries> series;
  deid::io::ForecastSet forecasts;
  const auto start = deid::parse_iso_date("2020-08-02");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::string fips = std::to_string(90001 + i);
    auto pop = deid::synthetic::county(fips, sizes[i], seed);
    auto s = deid::synthetic::season(pop, start, days, seed);
    forecasts[fips] = deid::synthetic::forecast(s, forecast_error, seed);
    series.push_back(std::move(s));
    pops.emplace(fips, std::move(pop));
  }
  std::ofstream pf(fs::path(out) / "population.csv");
  deid::io::write_population(pf, pops);
  std::ofstream cf(fs::path(out) / "cases.csv");
  deid::io::write_case_series(cf, series);
  std::ofstream ff(fs::path(out) / "forecasts.csv");
  deid::io::write_forecasts(ff, forecasts);
  nlohmann::ordered_json run{{"population", "population.csv"},
                             {"cases", "cases.csv"},
                             {"forecasts", "forecasts.csv"},
                             {"params",
                              {{"k", 11},
                               {"threshold", 0.01},
                               {"lagging_days", 5},
                               {"schedule", "daily"},
                               {"n_replicates", replicates},
                               {"coverage", 0.95}}},
                             {"seed", seed},
                             {"out", "out"}};
  std::ofstream rf(fs::path(out) / "run.json");
  rf << run.dump(2) << '\n';
  std::cout << "wrote " << sizes.size() << " counties to " << out << '\n';
  return 0;
}
