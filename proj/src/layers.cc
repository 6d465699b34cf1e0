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

#include "dpsynth/layers.h"

#include <cmath>

namespace dpsynth::ad {

Matrix InitMatrix(std::size_t rows, std::size_t cols, Init init,
                  std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Matrix m(rows, cols);
  if (init == Init::kZeros) return m;
  const double bound =
      init == Init::kKaimingUniform
          ? std::sqrt(6.0 / static_cast<double>(fan_in))
          : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

Linear MakeLinear(ParamStore& store, const std::string& name, std::size_t in,
                  std::size_t out, Init init, bool with_bias, Rng& rng) {
  Linear layer;
  layer.in = in;
  layer.out = out;
  layer.weight =
      store.Add(name + ".weight", InitMatrix(in, out, init, in, out, rng));
  if (with_bias) layer.bias = store.Add(name + ".bias", Matrix(1, out));
  return layer;
}

Var ApplyLinear(Tape& t, ParamStore& store, const Linear& layer, Var x,
                bool trainable) {
  Var y = MatMul(t, x, t.Param(store, layer.weight, trainable));
  if (layer.bias) y = Add(t, y, t.Param(store, *layer.bias, trainable));
  return y;
}

LayerNormParams MakeLayerNorm(ParamStore& store, const std::string& name,
                              std::size_t width) {
  return {store.Add(name + ".gamma", Matrix(1, width, 1.0)),
          store.Add(name + ".beta", Matrix(1, width))};
}

Var ApplyLayerNorm(Tape& t, ParamStore& store, const LayerNormParams& ln,
                   Var x, bool trainable) {
  Var gamma = t.Param(store, ln.gamma, trainable);
  Var beta = t.Param(store, ln.beta, trainable);
  return LayerNorm(t, x, gamma, beta);
}

BatchNormParams MakeBatchNorm(ParamStore& store, const std::string& name,
                              std::size_t width) {
  BatchNormParams bn;
  bn.gamma = store.Add(name + ".gamma", Matrix(1, width, 1.0));
  bn.beta = store.Add(name + ".beta", Matrix(1, width));
  bn.running_mean = store.Add(name + ".running_mean", Matrix(1, width), false);
  bn.running_var =
      store.Add(name + ".running_var", Matrix(1, width, 1.0), false);
  return bn;
}

}  // namespace dpsynth::ad
