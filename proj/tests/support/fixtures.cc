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

#include "support/fixtures.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include <unistd.h>

#include "dpsynth/schema.h"

namespace dpsynth::testing {
namespace {

template <std::size_t N>
std::string Pick(const char* const (&options)[N], std::mt19937_64& rng,
                 double shift) {
  // Skews toward later options as `shift` grows.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = std::clamp(u(rng) + shift, 0.0, 0.999999);
  return options[static_cast<std::size_t>(x * N)];
}

}  // namespace

tabular::CsvTable BreastLikeTable(std::uint64_t seed) {
  static const char* const kAge[] = {"20-29", "30-39", "40-49",
                                     "50-59", "60-69", "70-79"};
  static const char* const kMeno[] = {"lt40", "ge40", "premeno"};
  static const char* const kDeg[] = {"1", "2", "3"};
  static const char* const kQuad[] = {"left_up", "left_low", "right_up",
                                      "right_low", "central"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);

  constexpr int kRows = 286, kPositives = 68;
  std::vector<int> label(kRows, 0);
  std::fill(label.begin(), label.begin() + kPositives, 1);
  std::shuffle(label.begin(), label.end(), rng);

  tabular::CsvTable t;
  t.header = {"age",    "menopause",   "tumor-size", "inv-nodes", "node-caps",
              "deg-malig", "breast",   "breast-quad", "irradiat", "class"};
  for (int r = 0; r < kRows; ++r) {
    const double s = label[r] ? 0.25 : 0.0;
    tabular::Row row;
    row.push_back(Pick(kAge, rng, 0.0));
    row.push_back(Pick(kMeno, rng, 0.0));
    row.push_back(tabular::FormatNumber(
        std::round(std::clamp(25.0 + 10.0 * n01(rng) + 32.0 * s, 0.0, 59.0))));
    row.push_back(tabular::FormatNumber(
        std::round(std::clamp(std::fabs(3.0 * n01(rng)) + 6.0 * s, 0.0, 26.0))));
    row.push_back(u(rng) < 0.15 + s ? "yes" : "no");
    row.push_back(Pick(kDeg, rng, s));
    row.push_back(u(rng) < 0.5 ? "left" : "right");
    row.push_back(Pick(kQuad, rng, 0.0));
    row.push_back(u(rng) < 0.2 + s ? "yes" : "no");
    row.push_back(label[r] ? "recurrence-events" : "no-recurrence-events");
    t.rows.push_back(std::move(row));
    t.lines.push_back(static_cast<std::size_t>(r) + 2);
  }
  return t;
}

tabular::CsvTable TwoGaussianTable(std::size_t rows, double separation,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  tabular::CsvTable t;
  t.header = {"x1", "x2", "x3", "x4", "x5", "x6", "label"};
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = r % 2 == 0 ? 1 : 0;
    tabular::Row row;
    for (int c = 0; c < 6; ++c) {
      const double mu = y ? separation / 2 : -separation / 2;
      row.push_back(tabular::FormatNumber(mu + n01(rng)));
    }
    row.push_back(y ? "1" : "0");
    t.rows.push_back(std::move(row));
    t.lines.push_back(r + 2);
  }
  return t;
}

std::string MakeTempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() /
               ("dpsynth_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::optional<std::string> AdultCsvPath() {
  const char* env = std::getenv("DPSYNTH_ADULT_CSV");
  if (env == nullptr || !std::filesystem::is_regular_file(env)) {
    return std::nullopt;
  }
  return std::string(env);
}

}  // namespace dpsynth::testing
