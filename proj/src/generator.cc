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

#include "dpsynth/generator.h"

#include "dpsynth/error.h"

namespace dpsynth::models {

using ad::Init;
using ad::Var;
using tabular::ColumnKind;

nlohmann::json GeneratorConfig::ToJson() const {
  return {{"latent_dim", latent_dim}, {"hidden", hidden},
          {"blocks", blocks},         {"train_tau", train_tau},
          {"sample_tau", sample_tau}, {"bn_momentum", bn_momentum}};
}

GeneratorConfig GeneratorConfig::FromJson(const nlohmann::json& j) {
  GeneratorConfig c;
  c.latent_dim = j.value("latent_dim", c.latent_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.blocks = j.value("blocks", c.blocks);
  c.train_tau = j.value("train_tau", c.train_tau);
  c.sample_tau = j.value("sample_tau", c.sample_tau);
  c.bn_momentum = j.value("bn_momentum", c.bn_momentum);
  return c;
}

Generator::Generator(std::shared_ptr<const tabular::TableSchema> schema,
                     GeneratorConfig config, Rng& init_rng)
    : schema_(std::move(schema)), config_(config) {
  if (config_.latent_dim == 0 || config_.hidden == 0) {
    throw ConfigError("generator widths must be positive");
  }
  if (!(config_.train_tau > 0.0) || !(config_.sample_tau > 0.0)) {
    throw ConfigError("gumbel temperatures must be > 0");
  }
  const std::size_t d = config_.latent_dim;
  input_ = ad::MakeLinear(params_, "gen.input", d, d, Init::kXavierUniform,
                          true, init_rng);
  std::size_t width = d;
  for (std::size_t b = 0; b < config_.blocks; ++b) {
    const std::string name = "gen.block" + std::to_string(b);
    Block block;
    // No bias before batch norm.
    block.fc1 = ad::MakeLinear(params_, name + ".fc1", width, config_.hidden,
                               Init::kKaimingUniform, false, init_rng);
    block.bn1 = ad::MakeBatchNorm(params_, name + ".bn1", config_.hidden);
    block.fc2 = ad::MakeLinear(params_, name + ".fc2", config_.hidden,
                               config_.hidden, Init::kXavierUniform, false,
                               init_rng);
    block.bn2 = ad::MakeBatchNorm(params_, name + ".bn2", config_.hidden);
    blocks_.push_back(block);
    width += config_.hidden;
  }
  output_ = ad::MakeLinear(params_, "gen.output", width,
                           schema_->EncodedWidth(), Init::kXavierUniform, true,
                           init_rng);
}

std::vector<std::size_t> Generator::LayerWidths() const {
  std::vector<std::size_t> widths{input_.out};
  for (const Block& b : blocks_) widths.push_back(b.fc1.in + b.fc2.out);
  widths.push_back(output_.out);
  return widths;
}

Matrix Generator::SampleLatent(std::size_t n, Rng& latent_rng) const {
  Matrix z(n, config_.latent_dim);
  for (double& v : z.values()) v = StandardNormal(latent_rng);
  return z;
}

Var Generator::Forward(ad::Tape& t, const Matrix& z, GenMode mode,
                       Rng& gumbel_rng, bool trainable) {
  if (z.cols() != config_.latent_dim) {
    throw DataError("generator: latent width " + std::to_string(z.cols()) +
                    ", expected " + std::to_string(config_.latent_dim));
  }
  const bool train = mode == GenMode::kTrain;
  Var h = ad::ApplyLinear(t, params_, input_, t.Constant(z), trainable);
  for (const Block& b : blocks_) {
    Var main = ad::ApplyLinear(t, params_, b.fc1, h, trainable);
    main = ad::BatchNorm(t, main, params_, b.bn1, train, trainable,
                         config_.bn_momentum);
    main = ad::Relu(t, main);
    main = ad::ApplyLinear(t, params_, b.fc2, main, trainable);
    main = ad::BatchNorm(t, main, params_, b.bn2, train, trainable,
                         config_.bn_momentum);
    const Var parts[] = {main, h};
    h = ad::Concat(t, parts);
  }
  Var logits = ad::ApplyLinear(t, params_, output_, h, trainable);

  std::vector<Var> outputs;
  std::size_t off = 0;
  for (const auto& col : schema_->columns) {
    Var slice = ad::SliceCols(t, logits, off, col.width());
    switch (col.kind) {
      case ColumnKind::kContinuous:
        outputs.push_back(ad::Sigmoid(t, slice));
        break;
      case ColumnKind::kCategorical:
        outputs.push_back(ad::GumbelSoftmax(
            t, slice, train ? config_.train_tau : config_.sample_tau,
            gumbel_rng));
        break;
      case ColumnKind::kBinary:
        if (train) {
          outputs.push_back(ad::Sigmoid(t, slice));
        } else {
          Matrix hard = t.value(slice);
          for (double& v : hard.values()) v = v > 0.0 ? 1.0 : 0.0;
          outputs.push_back(t.Constant(std::move(hard)));
        }
        break;
    }
    off += col.width();
  }
  return ad::Concat(t, outputs);
}

tabular::EncodedMatrix Generator::Generate(std::size_t n, GenMode mode,
                                           Rng& latent_rng, Rng& gumbel_rng) {
  if (n == 0) throw ConfigError("generate: n must be >= 1");
  ad::Tape t;
  Var out = Forward(t, SampleLatent(n, latent_rng), mode, gumbel_rng, false);
  return tabular::EncodedMatrix(t.value(out), schema_,
                                tabular::Provenance::kSynthetic);
}

}  // namespace dpsynth::models
