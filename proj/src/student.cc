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

#include "dpsynth/student.h"

#include <algorithm>
#include <numeric>

#include "dpsynth/error.h"

namespace dpsynth::models {

using ad::Init;
using ad::Var;

std::string StudentKindName(StudentKind kind) {
  return kind == StudentKind::kTransformer ? "transformer" : "mlp";
}

StudentKind ParseStudentKind(const std::string& name) {
  if (name == "transformer") return StudentKind::kTransformer;
  if (name == "mlp") return StudentKind::kMlp;
  throw ConfigError("unknown student kind '" + name +
                    "' (expected transformer or mlp)");
}

TransformerStudent::TransformerStudent(const tabular::TableSchema& schema,
                                       Rng& init_rng, TransformerConfig config)
    : config_(config), width_(schema.EncodedWidth()) {
  const std::size_t d = config_.d_model;
  if (d == 0 || config_.heads == 0 || d % config_.heads != 0) {
    throw ConfigError("d_model must be a positive multiple of the head count");
  }
  if (schema.columns.empty()) throw ConfigError("student: empty schema");
  std::size_t off = 0;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const std::string name = "student.token" + std::to_string(c);
    Token tok;
    tok.offset = off;
    tok.proj = ad::MakeLinear(params_, name + ".proj",
                              schema.columns[c].width(), d,
                              Init::kXavierUniform, true, init_rng);
    tok.pos = params_.Add(name + ".pos", Matrix(1, d));
    tokens_.push_back(tok);
    off += schema.columns[c].width();
  }
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string name = "student.layer" + std::to_string(l);
    Layer layer;
    layer.q = ad::MakeLinear(params_, name + ".q", d, d, Init::kXavierUniform,
                             true, init_rng);
    layer.k = ad::MakeLinear(params_, name + ".k", d, d, Init::kXavierUniform,
                             true, init_rng);
    layer.v = ad::MakeLinear(params_, name + ".v", d, d, Init::kXavierUniform,
                             true, init_rng);
    layer.o = ad::MakeLinear(params_, name + ".o", d, d, Init::kXavierUniform,
                             true, init_rng);
    layer.ln1 = ad::MakeLayerNorm(params_, name + ".ln1", d);
    layer.ff1 = ad::MakeLinear(params_, name + ".ff1", d, config_.ff_hidden,
                               Init::kKaimingUniform, true, init_rng);
    layer.ff2 = ad::MakeLinear(params_, name + ".ff2", config_.ff_hidden, d,
                               Init::kXavierUniform, true, init_rng);
    layer.ln2 = ad::MakeLayerNorm(params_, name + ".ln2", d);
    layers_.push_back(layer);
  }
  pool_norm_ = ad::MakeLayerNorm(params_, "student.pool_norm", d);
  head1_ = ad::MakeLinear(params_, "student.head1", d, config_.head_hidden,
                          Init::kKaimingUniform, true, init_rng);
  head2_ = ad::MakeLinear(params_, "student.head2", config_.head_hidden, 1,
                          Init::kXavierUniform, true, init_rng);
}

Var TransformerStudent::Logits(ad::Tape& t, Var x, bool trainable) {
  std::vector<std::size_t> order(tokens_.size());
  std::iota(order.begin(), order.end(), 0);
  return LogitsWithOrder(t, x, trainable, order);
}

Var TransformerStudent::LogitsWithOrder(ad::Tape& t, Var x, bool trainable,
                                        std::span<const std::size_t> order) {
  if (t.value(x).cols() != width_) {
    throw DataError("student: batch width " +
                    std::to_string(t.value(x).cols()) + ", expected " +
                    std::to_string(width_));
  }
  if (order.size() != tokens_.size()) {
    throw ConfigError("student: token order has the wrong length");
  }
  const std::size_t nt = tokens_.size();
  std::vector<Var> toks;
  toks.reserve(nt);
  for (std::size_t i : order) {
    const Token& tok = tokens_.at(i);
    Var slice = ad::SliceCols(t, x, tok.offset, tok.proj.in);
    Var e = ad::ApplyLinear(t, params_, tok.proj, slice, trainable);
    toks.push_back(ad::Add(t, e, t.Param(params_, tok.pos, trainable)));
  }
  Var h = ad::InterleaveTokens(t, toks);
  for (const Layer& layer : layers_) {
    Var q = ad::ApplyLinear(t, params_, layer.q, h, trainable);
    Var k = ad::ApplyLinear(t, params_, layer.k, h, trainable);
    Var v = ad::ApplyLinear(t, params_, layer.v, h, trainable);
    Var att = ad::MultiHeadAttention(t, q, k, v, config_.heads, nt);
    att = ad::ApplyLinear(t, params_, layer.o, att, trainable);
    h = ad::ApplyLayerNorm(t, params_, layer.ln1, ad::Add(t, h, att),
                           trainable);
    Var ff = ad::ApplyLinear(t, params_, layer.ff1, h, trainable);
    ff = ad::ApplyLinear(t, params_, layer.ff2, ad::Relu(t, ff), trainable);
    h = ad::ApplyLayerNorm(t, params_, layer.ln2, ad::Add(t, h, ff),
                           trainable);
  }
  Var pooled = ad::MeanPool(t, h, nt);
  pooled = ad::ApplyLayerNorm(t, params_, pool_norm_, pooled, trainable);
  Var z = ad::Relu(t, ad::ApplyLinear(t, params_, head1_, pooled, trainable));
  return ad::ApplyLinear(t, params_, head2_, z, trainable);
}

std::unique_ptr<Student> TransformerStudent::Clone() const {
  return std::make_unique<TransformerStudent>(*this);
}

MlpStudent::MlpStudent(std::size_t n_feat, Rng& init_rng, std::size_t hidden) {
  if (n_feat == 0) throw ConfigError("student: zero input width");
  l1_ = ad::MakeLinear(params_, "student.mlp1", n_feat, hidden,
                       Init::kKaimingUniform, true, init_rng);
  l2_ = ad::MakeLinear(params_, "student.mlp2", hidden, hidden,
                       Init::kKaimingUniform, true, init_rng);
  out_ = ad::MakeLinear(params_, "student.out", hidden, 1,
                        Init::kXavierUniform, true, init_rng);
}

Var MlpStudent::Logits(ad::Tape& t, Var x, bool trainable) {
  if (t.value(x).cols() != l1_.in) {
    throw DataError("student: batch width " +
                    std::to_string(t.value(x).cols()) + ", expected " +
                    std::to_string(l1_.in));
  }
  Var h = ad::Relu(t, ad::ApplyLinear(t, params_, l1_, x, trainable));
  h = ad::Relu(t, ad::ApplyLinear(t, params_, l2_, h, trainable));
  return ad::ApplyLinear(t, params_, out_, h, trainable);
}

std::unique_ptr<Student> MlpStudent::Clone() const {
  return std::make_unique<MlpStudent>(*this);
}

std::unique_ptr<Student> MakeStudent(StudentKind kind,
                                     const tabular::TableSchema& schema,
                                     Rng& init_rng) {
  if (kind == StudentKind::kTransformer) {
    return std::make_unique<TransformerStudent>(schema, init_rng);
  }
  return std::make_unique<MlpStudent>(schema.EncodedWidth(), init_rng);
}

}  // namespace dpsynth::models
