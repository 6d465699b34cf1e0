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

#ifndef DPSYNTH_PARALLEL_H_
#define DPSYNTH_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace dpsynth {

// Hardware concurrency, at least 1.
std::size_t DefaultThreadCount();

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 means the default).
// Each index is handled exactly once; results must be written to disjoint
// slots. The first exception thrown by any call is rethrown after all workers
// have joined.
void ParallelFor(std::size_t n, std::size_t threads,
                 const std::function<void(std::size_t)>& fn);

}  // namespace dpsynth

#endif  // DPSYNTH_PARALLEL_H_
