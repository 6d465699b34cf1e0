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

#ifndef DPSYNTH_RNG_H_
#define DPSYNTH_RNG_H_

#include <cstdint>
#include <random>

namespace dpsynth {

using Rng = std::mt19937_64;

// Named streams derived from a single run seed. Each stream is seeded from
// (seed, stream id) so consuming more draws from one stream never shifts
// another.
enum class Stream : std::uint64_t {
  kPartition = 1,
  kInit = 2,
  kLatent = 3,
  kGumbel = 4,
  kVoteNoise = 5,
  kEval = 6,
};

inline Rng MakeRng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

inline Rng MakeRng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

// Uniform in the open interval (0, 1).
inline double UniformOpen(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double u = dist(rng);
  while (u <= 0.0) u = dist(rng);
  return u;
}

inline double StandardNormal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace dpsynth

#endif  // DPSYNTH_RNG_H_
