// Copyright 2026 The dpsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPSYNTH_TESTS_SUPPORT_FIXTURES_H_
#define DPSYNTH_TESTS_SUPPORT_FIXTURES_H_

#include <cstdint>
#include <optional>
#include <string>

#include "dpsynth/csv.h"

namespace dpsynth::testing {

// 286 rows shaped like the UCI breast-cancer table: ten columns mixing
// categorical, binary and continuous kinds, target "class" with 68
// "recurrence-events" rows.
tabular::CsvTable BreastLikeTable(std::uint64_t seed = 1);

// Two Gaussian classes in six dimensions, separated along every axis by
// `separation` standard deviations; target "label" in {0,1}, balanced.
tabular::CsvTable TwoGaussianTable(std::size_t rows = 2000,
                                   double separation = 3.0,
                                   std::uint64_t seed = 1);

// A fresh empty directory under the system temp dir.
std::string MakeTempDir(const std::string& tag);

// Path from DPSYNTH_ADULT_CSV when it names a readable file.
std::optional<std::string> AdultCsvPath();

}  // namespace dpsynth::testing

#endif  // DPSYNTH_TESTS_SUPPORT_FIXTURES_H_
