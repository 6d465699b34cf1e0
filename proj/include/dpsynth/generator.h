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

#ifndef DPSYNTH_GENERATOR_H_
#define DPSYNTH_GENERATOR_H_

#include <memory>
#include <vector>

#include "dpsynth/autodiff.h"
#include "dpsynth/encoding.h"
#include "dpsynth/layers.h"
#include "dpsynth/rng.h"
#include "json.hpp"

namespace dpsynth::models {

struct GeneratorConfig {
  std::size_t latent_dim = 128;
  std::size_t hidden = 256;
  std::size_t blocks = 3;
  double train_tau = 0.2;
  double sample_tau = 1e-5;
  double bn_momentum = 0.9;

  nlohmann::json ToJson() const;
  static GeneratorConfig FromJson(const nlohmann::json& j);
};

enum class GenMode {
  // Batch-norm batch statistics; categorical groups at train_tau; binary
  // columns stay soft sigmoids. Differentiable.
  kTrain,
  // Batch-norm running statistics; categorical groups at sample_tau; binary
  // columns hard-thresholded at 0.5.
  kSample,
};

// Residual generator. z ~ N(0, I) is linearly projected, passed through
// residual blocks (FC -> BN -> ReLU -> FC -> BN, output concatenated with the
// block input so widths grow by `hidden` per block) and projected to the
// encoded width, followed by per-column output activations.
class Generator {
 public:
  Generator(std::shared_ptr<const tabular::TableSchema> schema,
            GeneratorConfig config, Rng& init_rng);

  Matrix SampleLatent(std::size_t n, Rng& latent_rng) const;

  ad::Var Forward(ad::Tape& t, const Matrix& z, GenMode mode, Rng& gumbel_rng,
                  bool trainable);

  // Forward pass without gradients; returns synthetic provenance.
  tabular::EncodedMatrix Generate(std::size_t n, GenMode mode, Rng& latent_rng,
                                  Rng& gumbel_rng);

  // latent, block outputs..., encoded width.
  std::vector<std::size_t> LayerWidths() const;

  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }
  const GeneratorConfig& config() const { return config_; }
  const tabular::TableSchema& schema() const { return *schema_; }
  const std::shared_ptr<const tabular::TableSchema>& schema_ptr() const {
    return schema_;
  }

 private:
  struct Block {
    ad::Linear fc1;
    ad::BatchNormParams bn1;
    ad::Linear fc2;
    ad::BatchNormParams bn2;
  };

  std::shared_ptr<const tabular::TableSchema> schema_;
  GeneratorConfig config_;
  ad::ParamStore params_;
  ad::Linear input_;
  std::vector<Block> blocks_;
  ad::Linear output_;
};

}  // namespace dpsynth::models

#endif  // DPSYNTH_GENERATOR_H_
