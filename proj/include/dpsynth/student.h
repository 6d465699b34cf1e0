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

#ifndef DPSYNTH_STUDENT_H_
#define DPSYNTH_STUDENT_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dpsynth/autodiff.h"
#include "dpsynth/layers.h"
#include "dpsynth/rng.h"
#include "dpsynth/schema.h"

namespace dpsynth::models {

enum class StudentKind { kTransformer, kMlp };

std::string StudentKindName(StudentKind kind);
StudentKind ParseStudentKind(const std::string& name);

// Discriminator trained on noisy teacher labels. Both variants take an
// n x n_feat encoded batch and return n x 1 logits for "real".
class Student {
 public:
  virtual ~Student() = default;

  // With trainable = false the parameters enter the tape as constants, so a
  // backward pass leaves their gradients untouched.
  virtual ad::Var Logits(ad::Tape& t, ad::Var x, bool trainable) = 0;
  virtual StudentKind kind() const = 0;
  virtual std::unique_ptr<Student> Clone() const = 0;

  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

 protected:
  ad::ParamStore params_;
};

struct TransformerConfig {
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t layers = 3;
  std::size_t ff_hidden = 128;
  std::size_t head_hidden = 64;
};

// One token per semantic column: a dedicated projection of the column's
// encoded slice plus a learnable per-column positional embedding. Post-norm
// encoder layers, mean pooling over tokens, layer norm, two-layer head.
class TransformerStudent : public Student {
 public:
  TransformerStudent(const tabular::TableSchema& schema, Rng& init_rng,
                     TransformerConfig config = {});

  ad::Var Logits(ad::Tape& t, ad::Var x, bool trainable) override;
  // Feeds tokens to the encoder in `order` (a permutation of column indices).
  ad::Var LogitsWithOrder(ad::Tape& t, ad::Var x, bool trainable,
                          std::span<const std::size_t> order);
  StudentKind kind() const override { return StudentKind::kTransformer; }
  std::unique_ptr<Student> Clone() const override;

  std::size_t token_count() const { return tokens_.size(); }
  const TransformerConfig& config() const { return config_; }
  ad::ParamId positional(std::size_t token) const { return tokens_[token].pos; }

 private:
  struct Token {
    std::size_t offset = 0;
    ad::Linear proj;
    ad::ParamId pos = 0;
  };
  struct Layer {
    ad::Linear q, k, v, o;
    ad::LayerNormParams ln1;
    ad::Linear ff1, ff2;
    ad::LayerNormParams ln2;
  };

  TransformerConfig config_;
  std::vector<Token> tokens_;
  std::vector<Layer> layers_;
  ad::LayerNormParams pool_norm_;
  ad::Linear head1_;
  ad::Linear head2_;
  std::size_t width_ = 0;
};

// n_feat -> 256 -> 256 -> 1 with relu.
class MlpStudent : public Student {
 public:
  MlpStudent(std::size_t n_feat, Rng& init_rng, std::size_t hidden = 256);

  ad::Var Logits(ad::Tape& t, ad::Var x, bool trainable) override;
  StudentKind kind() const override { return StudentKind::kMlp; }
  std::unique_ptr<Student> Clone() const override;

 private:
  ad::Linear l1_, l2_, out_;
};

std::unique_ptr<Student> MakeStudent(StudentKind kind,
                                     const tabular::TableSchema& schema,
                                     Rng& init_rng);

}  // namespace dpsynth::models

#endif  // DPSYNTH_STUDENT_H_
