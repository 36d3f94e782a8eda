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


// Library walk-through: search one synthetic county, pick a policy for a
// week with 40 cases, and estimate the PK risk of releasing under it.

#include <iostream>

#include "deid/deid.hpp"

int main() {
  using namespace deid;
  const auto& h = default_hierarchy();
  PopulationTable pop = synthetic::county("90001", 50000, 7);

  RiskParams params;
  params.n_replicates = 200;
  auto policies = enumerate_policies(h);
  SearchTable table = search_county(pop, policies, default_case_grid(), params, 42);
  std::cout << "policies acceptable at 1000 cases: " << table.acceptable_count(1000) << '\n';

  ReleaseDecision d = select_policy(table, 40, PreferenceRule{}, h);
  std::cout << "40 cases/day -> " << d.label() << '\n';

  CaseSeries week{"90001", Periodicity::kDaily, parse_iso_date("2021-01-03"), {40, 41, 38, 45, 40, 39, 42}};
  if (d.policy) {
    PolicyIndex index(parse_policy_code(*d.policy, h));
    auto risks = estimate_policy_risks(pop, week, std::span(&index, 1), params, 42);
    for (const auto& r : risks[0].releases) {
      std::cout << format_iso_date(r.date) << " PK upper " << r.summary->upper << '\n';
    }
  }
  return 0;
}
