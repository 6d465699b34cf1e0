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

// Reverse-mode automatic differentiation over dense 2-D double arrays.
//
// A Tape records operations in execution order, which is a topological
// order by construction. Tape::Backward walks the nodes once in reverse and
// accumulates gradients into inputs, including into the ParamStore entries
// that were pulled onto the tape with Tape::Param.
//
// Sequence data (the student's column tokens) is laid out as a
// (batch * tokens) x width matrix with row index b * tokens + t.

#ifndef DPSYNTH_AUTODIFF_H_
#define DPSYNTH_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpsynth/matrix.h"
#include "dpsynth/rng.h"

namespace dpsynth::ad {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  // Buffers (batch-norm running statistics) are stored alongside trainable
  // parameters so they are checkpointed, but optimizers skip them.
  bool trainable = true;
};

using ParamId = std::size_t;

class ParamStore {
 public:
  ParamId Add(std::string name, Matrix value, bool trainable = true);

  Parameter& operator[](ParamId id) { return params_[id]; }
  const Parameter& operator[](ParamId id) const { return params_[id]; }
  std::size_t size() const { return params_.size(); }
  std::optional<ParamId> Find(std::string_view name) const;

  void ZeroGrad();
  // Number of trainable scalars.
  std::size_t TrainableScalarCount() const;

  std::vector<Parameter>::const_iterator begin() const {
    return params_.begin();
  }
  std::vector<Parameter>::const_iterator end() const { return params_.end(); }

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::vector<Parameter> params_;
};

class Var {
 public:
  Var() = default;
  int id() const { return id_; }
  bool valid() const { return id_ >= 0; }

 private:
  friend class Tape;
  explicit Var(int id) : id_(id) {}
  int id_ = -1;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Matrix value);
  // A leaf that receives a gradient.
  Var Leaf(Matrix value);
  // Copies the parameter value onto the tape. With trainable=true the
  // gradient is added into the store's grad buffer during Backward.
  Var Param(ParamStore& store, ParamId id, bool trainable = true);

  const Matrix& value(Var v) const { return nodes_[v.id()].value; }
  // Zero-filled when no gradient reached the node.
  const Matrix& grad(Var v);
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1; loss must be 1x1.
  void Backward(Var loss);

  // Op plumbing.
  Var Record(const char* op, Matrix value, std::vector<int> inputs,
             BackwardFn backward);
  const Matrix& ValueAt(int id) const { return nodes_[id].value; }
  const Matrix& GradAt(int id) const { return nodes_[id].grad; }
  bool RequiresGradAt(int id) const { return nodes_[id].requires_grad; }
  // Lazily allocated gradient buffer of a node.
  Matrix& GradRef(int id);

 private:
  struct Node {
    const char* op = "";
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::vector<int> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Op catalog. Shape errors raise DataError naming the op and both shapes;
// non-finite outputs raise NumericError.

Var MatMul(Tape& t, Var a, Var b);
// a + b where b has a's shape or is a 1 x cols row broadcast over rows.
Var Add(Tape& t, Var a, Var b);
Var Scale(Tape& t, Var a, double s);
// Subgradient at 0 is 0.
Var Relu(Tape& t, Var a);
Var Sigmoid(Tape& t, Var a);
// Row-wise.
Var Softmax(Tape& t, Var a);
// Row-wise normalization with learnable 1 x cols scale and shift.
Var LayerNorm(Tape& t, Var x, Var gamma, Var beta, double eps = 1e-5);

struct BatchNormParams {
  ParamId gamma;
  ParamId beta;
  ParamId running_mean;
  ParamId running_var;
};

// Column-wise batch normalization. In train mode normalizes with batch
// statistics (biased variance), requires >= 2 rows and updates
// running = momentum * running + (1 - momentum) * batch. Eval mode uses the
// running statistics only.
Var BatchNorm(Tape& t, Var x, ParamStore& store, const BatchNormParams& bn,
              bool train, bool trainable, double momentum = 0.9,
              double eps = 1e-5);

// Column-wise concatenation.
Var Concat(Tape& t, std::span<const Var> parts);
Var SliceCols(Tape& t, Var a, std::size_t start, std::size_t width);
// (batch * tokens) x d -> batch x d.
Var MeanPool(Tape& t, Var x, std::size_t tokens);
// tokens matrices of batch x d -> (batch * tokens) x d, row b * tokens + i.
Var InterleaveTokens(Tape& t, std::span<const Var> tokens);
// Scaled dot-product attention with `heads` heads over sequences of length
// `tokens`. q, k, v are (batch * tokens) x d with d divisible by heads.
Var MultiHeadAttention(Tape& t, Var q, Var k, Var v, std::size_t heads,
                       std::size_t tokens);
// Mean binary cross-entropy of n x 1 logits against n x 1 targets in [0,1].
Var BceWithLogits(Tape& t, Var logits, const Matrix& targets);
// sum_ij a_ij * w_ij, as a 1 x 1 node.
Var SumProduct(Tape& t, Var a, const Matrix& weights);

// softmax((logits + g) / tau) with g = -log(-log(u)), u ~ U(0,1) clamped to
// [1e-12, 1 - 1e-12]. Differentiable with respect to logits.
Var GumbelSoftmax(Tape& t, Var logits, double tau, Rng& rng);

// ---------------------------------------------------------------------------

double SigmoidScalar(double x);

// Max over entries of |analytic - central difference| / max(1, |central|)
// for the scalar L = sum(W .* op(x)), W a fixed pseudo-random weighting.
double GradCheck(const std::function<Var(Tape&, Var)>& op, const Matrix& input,
                 double epsilon, std::uint64_t weight_seed = 7);

}  // namespace dpsynth::ad

#endif  // DPSYNTH_AUTODIFF_H_
