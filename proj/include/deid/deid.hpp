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


// Umbrella header.

#pragma once

#include "deid/csv.hpp"
#include "deid/date.hpp"
#include "deid/engine.hpp"
#include "deid/error.hpp"
#include "deid/framework.hpp"
#include "deid/hypergeometric.hpp"
#include "deid/io.hpp"
#include "deid/parallel.hpp"
#include "deid/planner.hpp"
#include "deid/population.hpp"
#include "deid/risk.hpp"
#include "deid/rng.hpp"
#include "deid/synthetic.hpp"
#include "deid/taxonomy.hpp"
