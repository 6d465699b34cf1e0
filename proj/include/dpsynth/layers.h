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

#ifndef DPSYNTH_LAYERS_H_
#define DPSYNTH_LAYERS_H_

#include <optional>
#include <string>

#include "dpsynth/autodiff.h"
#include "dpsynth/rng.h"

namespace dpsynth::ad {

enum class Init {
  kKaimingUniform,  // layers feeding a relu
  kXavierUniform,   // plain linear and attention projections
  kZeros,
};

Matrix InitMatrix(std::size_t rows, std::size_t cols, Init init,
                  std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct Linear {
  ParamId weight = 0;
  std::optional<ParamId> bias;
  std::size_t in = 0;
  std::size_t out = 0;
};

// in x out weight, optional zero-initialized 1 x out bias.
Linear MakeLinear(ParamStore& store, const std::string& name, std::size_t in,
                  std::size_t out, Init init, bool with_bias, Rng& rng);
Var ApplyLinear(Tape& t, ParamStore& store, const Linear& layer, Var x,
                bool trainable);

struct LayerNormParams {
  ParamId gamma = 0;
  ParamId beta = 0;
};

LayerNormParams MakeLayerNorm(ParamStore& store, const std::string& name,
                              std::size_t width);
Var ApplyLayerNorm(Tape& t, ParamStore& store, const LayerNormParams& ln,
                   Var x, bool trainable);

BatchNormParams MakeBatchNorm(ParamStore& store, const std::string& name,
                              std::size_t width);

}  // namespace dpsynth::ad

#endif  // DPSYNTH_LAYERS_H_
