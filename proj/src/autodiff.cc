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

#include "dpsynth/autodiff.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "dpsynth/error.h"

namespace dpsynth::ad {

// ---------------------------------------------------------------------------
// ParamStore

ParamId ParamStore::Add(std::string name, Matrix value, bool trainable) {
  Parameter p;
  p.name = std::move(name);
  p.grad = Matrix(value.rows(), value.cols());
  p.value = std::move(value);
  p.trainable = trainable;
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::optional<ParamId> ParamStore::Find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

void ParamStore::ZeroGrad() {
  for (auto& p : params_) p.grad.Fill(0.0);
}

std::size_t ParamStore::TrainableScalarCount() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p.trainable) n += p.value.size();
  }
  return n;
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.params_.size() != b.params_.size()) return false;
  for (std::size_t i = 0; i < a.params_.size(); ++i) {
    if (a.params_[i].name != b.params_[i].name ||
        !(a.params_[i].value == b.params_[i].value)) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Tape

Var Tape::Constant(Matrix value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(static_cast<int>(nodes_.size() - 1));
}

Var Tape::Leaf(Matrix value) {
  Node n;
  n.op = "leaf";
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(static_cast<int>(nodes_.size() - 1));
}

Var Tape::Param(ParamStore& store, ParamId id, bool trainable) {
  Node n;
  n.op = "param";
  n.value = store[id].value;
  n.requires_grad = trainable;
  n.param = trainable ? &store[id] : nullptr;
  nodes_.push_back(std::move(n));
  return Var(static_cast<int>(nodes_.size() - 1));
}

const Matrix& Tape::grad(Var v) { return GradRef(v.id()); }

Matrix& Tape::GradRef(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size() || !n.grad.SameShape(n.value)) {
    n.grad = Matrix(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

Var Tape::Record(const char* op, Matrix value, std::vector<int> inputs,
                 BackwardFn backward) {
  if (!value.AllFinite()) {
    throw NumericError(std::string(op) + " produced a non-finite output " +
                       value.ShapeString());
  }
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (int in : inputs) n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(static_cast<int>(nodes_.size() - 1));
}

void Tape::Backward(Var loss) {
  const Matrix& lv = nodes_[loss.id()].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw DataError("backward requires a 1x1 loss, got " + lv.ShapeString());
  }
  GradRef(loss.id())(0, 0) = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (!n.grad.AllFinite()) {
      throw NumericError(std::string("non-finite gradient at ") + n.op);
    }
    if (n.backward) n.backward(*this, id);
    if (n.param != nullptr) {
      Matrix& pg = n.param->grad;
      for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += n.grad[i];
    }
  }
}

// ---------------------------------------------------------------------------
// Ops

namespace {

[[noreturn]] void ShapeFail(const char* op, const Matrix& a, const Matrix& b) {
  throw DataError(std::string(op) + ": shape mismatch " + a.ShapeString() +
                  " vs " + b.ShapeString());
}

}  // namespace

double SigmoidScalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var MatMul(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.rows()) ShapeFail("matmul", av, bv);
  Matrix out(av.rows(), bv.cols());
  Gemm(av, false, bv, false, out);
  const int ia = a.id(), ib = b.id();
  return t.Record("matmul", std::move(out), {ia, ib}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    if (t.RequiresGradAt(ia)) Gemm(g, false, t.ValueAt(ib), true, t.GradRef(ia));
    if (t.RequiresGradAt(ib)) Gemm(t.ValueAt(ia), true, g, false, t.GradRef(ib));
  });
}

Var Add(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  const bool broadcast = bv.rows() == 1 && av.rows() != 1;
  if (bv.cols() != av.cols() || (!broadcast && bv.rows() != av.rows())) {
    ShapeFail("add", av, bv);
  }
  Matrix out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto orow = out.row(r);
    auto brow = bv.row(broadcast ? 0 : r);
    for (std::size_t c = 0; c < out.cols(); ++c) orow[c] += brow[c];
  }
  const int ia = a.id(), ib = b.id();
  return t.Record("add", std::move(out), {ia, ib},
                  [ia, ib, broadcast](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    if (t.RequiresGradAt(ia)) {
      Matrix& ga = t.GradRef(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.RequiresGradAt(ib)) {
      Matrix& gb = t.GradRef(ib);
      if (broadcast) {
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto grow = g.row(r);
          for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += grow[c];
        }
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    }
  });
}

Var Scale(Tape& t, Var a, double s) {
  Matrix out = t.value(a);
  for (double& v : out.values()) v *= s;
  const int ia = a.id();
  return t.Record("scale", std::move(out), {ia}, [ia, s](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    Matrix& ga = t.GradRef(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var Relu(Tape& t, Var a) {
  Matrix out = t.value(a);
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  const int ia = a.id();
  return t.Record("relu", std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    const Matrix& x = t.ValueAt(ia);
    Matrix& ga = t.GradRef(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) ga[i] += g[i];
    }
  });
}

Var Sigmoid(Tape& t, Var a) {
  Matrix out = t.value(a);
  for (double& v : out.values()) v = SigmoidScalar(v);
  const int ia = a.id();
  return t.Record("sigmoid", std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    const Matrix& y = t.ValueAt(self);
    Matrix& ga = t.GradRef(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * y[i] * (1.0 - y[i]);
    }
  });
}

Var Softmax(Tape& t, Var a) {
  Matrix out = t.value(a);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
  const int ia = a.id();
  return t.Record("softmax", std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    const Matrix& y = t.ValueAt(self);
    Matrix& ga = t.GradRef(ia);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row(r);
      auto gr = g.row(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += gr[c] * yr[c];
      auto gar = ga.row(r);
      for (std::size_t c = 0; c < y.cols(); ++c) {
        gar[c] += yr[c] * (gr[c] - dot);
      }
    }
  });
}

namespace {

// Normalizes groups of `n` values strided by `stride`; shared between
// layer norm (groups = rows) and batch norm (groups = columns).
struct NormStats {
  std::vector<double> mean;
  std::vector<double> inv_std;
};

// dx for y_hat = (x - mean) * inv_std given d(y_hat); one group.
template <typename Get, typename GetG, typename Put>
void NormBackwardGroup(std::size_t n, double inv_std, Get xhat, GetG dxhat,
                       Put add) {
  double sum_d = 0.0, sum_dx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_d += dxhat(i);
    sum_dx += dxhat(i) * xhat(i);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    add(i, inv_std * (dxhat(i) - inv_n * sum_d - xhat(i) * inv_n * sum_dx));
  }
}

}  // namespace

Var LayerNorm(Tape& t, Var x, Var gamma, Var beta, double eps) {
  const Matrix& xv = t.value(x);
  const Matrix& gv = t.value(gamma);
  const Matrix& bv = t.value(beta);
  const std::size_t n = xv.rows(), d = xv.cols();
  if (gv.rows() != 1 || gv.cols() != d) ShapeFail("layer_norm", xv, gv);
  if (bv.rows() != 1 || bv.cols() != d) ShapeFail("layer_norm", xv, bv);
  Matrix xhat(n, d);
  std::vector<double> inv_std(n);
  Matrix out(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    auto xr = xv.row(r);
    double mean = 0.0;
    for (double v : xr) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : xr) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      xhat(r, c) = (xr[c] - mean) * inv_std[r];
      out(r, c) = xhat(r, c) * gv(0, c) + bv(0, c);
    }
  }
  const int ix = x.id(), ig = gamma.id(), ib = beta.id();
  return t.Record(
      "layer_norm", std::move(out), {ix, ig, ib},
      [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Tape& t, int self) {
        const Matrix& g = t.GradAt(self);
        const Matrix& gv = t.ValueAt(ig);
        const std::size_t n = g.rows(), d = g.cols();
        if (t.RequiresGradAt(ig)) {
          Matrix& gg = t.GradRef(ig);
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) gg(0, c) += g(r, c) * xhat(r, c);
        }
        if (t.RequiresGradAt(ib)) {
          Matrix& gb = t.GradRef(ib);
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) gb(0, c) += g(r, c);
        }
        if (t.RequiresGradAt(ix)) {
          Matrix& gx = t.GradRef(ix);
          for (std::size_t r = 0; r < n; ++r) {
            NormBackwardGroup(
                d, inv_std[r], [&](std::size_t c) { return xhat(r, c); },
                [&](std::size_t c) { return g(r, c) * gv(0, c); },
                [&](std::size_t c, double v) { gx(r, c) += v; });
          }
        }
      });
}

Var BatchNorm(Tape& t, Var x, ParamStore& store, const BatchNormParams& bn,
              bool train, bool trainable, double momentum, double eps) {
  // Params first: pushing nodes may reallocate and invalidate references.
  Var gamma = t.Param(store, bn.gamma, trainable);
  Var beta = t.Param(store, bn.beta, trainable);
  const Matrix& xv = t.value(x);
  const std::size_t n = xv.rows(), d = xv.cols();
  const Matrix& gv = t.value(gamma);
  const Matrix& bv = t.value(beta);
  if (gv.cols() != d) ShapeFail("batch_norm", xv, gv);
  if (train && n < 2) {
    throw ConfigError("batch_norm in train mode requires batch size >= 2, got " +
                      std::to_string(n));
  }
  std::vector<double> mean(d, 0.0), inv_std(d, 0.0);
  if (train) {
    std::vector<double> var(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) mean[c] += xv(r, c);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double dv = xv(r, c) - mean[c];
        var[c] += dv * dv;
      }
    Matrix& rm = store[bn.running_mean].value;
    Matrix& rv = store[bn.running_var].value;
    for (std::size_t c = 0; c < d; ++c) {
      var[c] /= static_cast<double>(n);
      inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
      rm(0, c) = momentum * rm(0, c) + (1.0 - momentum) * mean[c];
      rv(0, c) = momentum * rv(0, c) + (1.0 - momentum) * var[c];
    }
  } else {
    const Matrix& rm = store[bn.running_mean].value;
    const Matrix& rv = store[bn.running_var].value;
    for (std::size_t c = 0; c < d; ++c) {
      mean[c] = rm(0, c);
      inv_std[c] = 1.0 / std::sqrt(rv(0, c) + eps);
    }
  }
  Matrix xhat(n, d), out(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      xhat(r, c) = (xv(r, c) - mean[c]) * inv_std[c];
      out(r, c) = xhat(r, c) * gv(0, c) + bv(0, c);
    }
  const int ix = x.id(), ig = gamma.id(), ib = beta.id();
  return t.Record(
      "batch_norm", std::move(out), {ix, ig, ib},
      [ix, ig, ib, train, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Tape& t, int self) {
        const Matrix& g = t.GradAt(self);
        const Matrix& gv = t.ValueAt(ig);
        const std::size_t n = g.rows(), d = g.cols();
        if (t.RequiresGradAt(ig)) {
          Matrix& gg = t.GradRef(ig);
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) gg(0, c) += g(r, c) * xhat(r, c);
        }
        if (t.RequiresGradAt(ib)) {
          Matrix& gb = t.GradRef(ib);
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) gb(0, c) += g(r, c);
        }
        if (!t.RequiresGradAt(ix)) return;
        Matrix& gx = t.GradRef(ix);
        if (!train) {
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c)
              gx(r, c) += g(r, c) * gv(0, c) * inv_std[c];
          return;
        }
        for (std::size_t c = 0; c < d; ++c) {
          NormBackwardGroup(
              n, inv_std[c], [&](std::size_t r) { return xhat(r, c); },
              [&](std::size_t r) { return g(r, c) * gv(0, c); },
              [&](std::size_t r, double v) { gx(r, c) += v; });
        }
      });
}

Var Concat(Tape& t, std::span<const Var> parts) {
  if (parts.empty()) throw DataError("concat: no inputs");
  const std::size_t n = t.value(parts[0]).rows();
  std::size_t width = 0;
  std::vector<int> ids;
  std::vector<std::size_t> offsets;
  for (Var p : parts) {
    const Matrix& pv = t.value(p);
    if (pv.rows() != n) ShapeFail("concat", t.value(parts[0]), pv);
    offsets.push_back(width);
    width += pv.cols();
    ids.push_back(p.id());
  }
  Matrix out(n, width);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Matrix& pv = t.value(parts[k]);
    for (std::size_t r = 0; r < n; ++r)
      std::copy_n(pv.row(r).data(), pv.cols(), out.row(r).data() + offsets[k]);
  }
  return t.Record("concat", std::move(out), ids,
                  [ids, offsets](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.RequiresGradAt(ids[k])) continue;
      Matrix& gp = t.GradRef(ids[k]);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < gp.cols(); ++c)
          gp(r, c) += g(r, offsets[k] + c);
    }
  });
}

Var SliceCols(Tape& t, Var a, std::size_t start, std::size_t width) {
  Matrix out = t.value(a).SliceCols(start, width);
  const int ia = a.id();
  return t.Record("slice_cols", std::move(out), {ia},
                  [ia, start](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    Matrix& ga = t.GradRef(ia);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) ga(r, start + c) += g(r, c);
  });
}

Var MeanPool(Tape& t, Var x, std::size_t tokens) {
  const Matrix& xv = t.value(x);
  if (tokens == 0 || xv.rows() % tokens != 0) {
    throw DataError("mean_pool: " + xv.ShapeString() +
                    " rows not divisible by token count " +
                    std::to_string(tokens));
  }
  const std::size_t batch = xv.rows() / tokens, d = xv.cols();
  Matrix out(batch, d);
  const double inv = 1.0 / static_cast<double>(tokens);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < tokens; ++i) {
      auto xr = xv.row(b * tokens + i);
      for (std::size_t c = 0; c < d; ++c) out(b, c) += xr[c] * inv;
    }
  const int ix = x.id();
  return t.Record("mean_pool", std::move(out), {ix},
                  [ix, tokens, inv](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    Matrix& gx = t.GradRef(ix);
    for (std::size_t b = 0; b < g.rows(); ++b)
      for (std::size_t i = 0; i < tokens; ++i)
        for (std::size_t c = 0; c < g.cols(); ++c)
          gx(b * tokens + i, c) += g(b, c) * inv;
  });
}

Var InterleaveTokens(Tape& t, std::span<const Var> tokens) {
  if (tokens.empty()) throw DataError("interleave_tokens: no tokens");
  const Matrix& first = t.value(tokens[0]);
  const std::size_t batch = first.rows(), d = first.cols(), nt = tokens.size();
  std::vector<int> ids;
  for (Var v : tokens) {
    if (!t.value(v).SameShape(first)) ShapeFail("interleave_tokens", first, t.value(v));
    ids.push_back(v.id());
  }
  Matrix out(batch * nt, d);
  for (std::size_t i = 0; i < nt; ++i) {
    const Matrix& tv = t.value(tokens[i]);
    for (std::size_t b = 0; b < batch; ++b)
      std::copy_n(tv.row(b).data(), d, out.row(b * nt + i).data());
  }
  return t.Record("interleave_tokens", std::move(out), ids,
                  [ids](Tape& t, int self) {
    const Matrix& g = t.GradAt(self);
    const std::size_t nt = ids.size();
    for (std::size_t i = 0; i < nt; ++i) {
      if (!t.RequiresGradAt(ids[i])) continue;
      Matrix& gt = t.GradRef(ids[i]);
      for (std::size_t b = 0; b < gt.rows(); ++b) {
        auto gr = g.row(b * nt + i);
        auto dst = gt.row(b);
        for (std::size_t c = 0; c < gt.cols(); ++c) dst[c] += gr[c];
      }
    }
  });
}

Var MultiHeadAttention(Tape& t, Var q, Var k, Var v, std::size_t heads,
                       std::size_t tokens) {
  const Matrix& qv = t.value(q);
  const Matrix& kv = t.value(k);
  const Matrix& vv = t.value(v);
  if (!qv.SameShape(kv)) ShapeFail("attention", qv, kv);
  if (!qv.SameShape(vv)) ShapeFail("attention", qv, vv);
  const std::size_t d = qv.cols();
  if (heads == 0 || d % heads != 0 || tokens == 0 || qv.rows() % tokens != 0) {
    throw DataError("attention: " + qv.ShapeString() + " incompatible with " +
                    std::to_string(heads) + " heads / " +
                    std::to_string(tokens) + " tokens");
  }
  const std::size_t batch = qv.rows() / tokens, dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  // probs[((b * heads + h) * tokens + i) * tokens + j]
  std::vector<double> probs(batch * heads * tokens * tokens);
  Matrix out(qv.rows(), d);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * dh;
      double* p = probs.data() + (b * heads + h) * tokens * tokens;
      for (std::size_t i = 0; i < tokens; ++i) {
        const double* qi = qv.row(b * tokens + i).data() + off;
        double mx = -INFINITY;
        for (std::size_t j = 0; j < tokens; ++j) {
          const double* kj = kv.row(b * tokens + j).data() + off;
          double s = 0.0;
          for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
          s *= scale;
          p[i * tokens + j] = s;
          mx = std::max(mx, s);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < tokens; ++j) {
          p[i * tokens + j] = std::exp(p[i * tokens + j] - mx);
          sum += p[i * tokens + j];
        }
        double* oi = out.row(b * tokens + i).data() + off;
        for (std::size_t j = 0; j < tokens; ++j) {
          p[i * tokens + j] /= sum;
          const double* vj = vv.row(b * tokens + j).data() + off;
          for (std::size_t c = 0; c < dh; ++c) oi[c] += p[i * tokens + j] * vj[c];
        }
      }
    }
  }
  const int iq = q.id(), ik = k.id(), iv = v.id();
  return t.Record(
      "attention", std::move(out), {iq, ik, iv},
      [iq, ik, iv, heads, tokens, dh, scale, batch,
       probs = std::move(probs)](Tape& t, int self) {
        const Matrix& g = t.GradAt(self);
        const Matrix& qv = t.ValueAt(iq);
        const Matrix& kv = t.ValueAt(ik);
        const Matrix& vv = t.ValueAt(iv);
        const bool need_q = t.RequiresGradAt(iq);
        const bool need_k = t.RequiresGradAt(ik);
        const bool need_v = t.RequiresGradAt(iv);
        Matrix* gq = need_q ? &t.GradRef(iq) : nullptr;
        Matrix* gk = need_k ? &t.GradRef(ik) : nullptr;
        Matrix* gvv = need_v ? &t.GradRef(iv) : nullptr;
        std::vector<double> dp(tokens), ds(tokens);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t off = h * dh;
            const double* p = probs.data() + (b * heads + h) * tokens * tokens;
            for (std::size_t i = 0; i < tokens; ++i) {
              const double* gi = g.row(b * tokens + i).data() + off;
              double dot = 0.0;
              for (std::size_t j = 0; j < tokens; ++j) {
                const double* vj = vv.row(b * tokens + j).data() + off;
                double s = 0.0;
                for (std::size_t c = 0; c < dh; ++c) s += gi[c] * vj[c];
                dp[j] = s;
                dot += s * p[i * tokens + j];
                if (need_v) {
                  double* gvj = gvv->row(b * tokens + j).data() + off;
                  for (std::size_t c = 0; c < dh; ++c)
                    gvj[c] += p[i * tokens + j] * gi[c];
                }
              }
              for (std::size_t j = 0; j < tokens; ++j) {
                ds[j] = p[i * tokens + j] * (dp[j] - dot) * scale;
              }
              const double* qi = qv.row(b * tokens + i).data() + off;
              for (std::size_t j = 0; j < tokens; ++j) {
                const double* kj = kv.row(b * tokens + j).data() + off;
                if (need_q) {
                  double* gqi = gq->row(b * tokens + i).data() + off;
                  for (std::size_t c = 0; c < dh; ++c) gqi[c] += ds[j] * kj[c];
                }
                if (need_k) {
                  double* gkj = gk->row(b * tokens + j).data() + off;
                  for (std::size_t c = 0; c < dh; ++c) gkj[c] += ds[j] * qi[c];
                }
              }
            }
          }
        }
      });
}

Var BceWithLogits(Tape& t, Var logits, const Matrix& targets) {
  const Matrix& lv = t.value(logits);
  if (!lv.SameShape(targets) || lv.cols() != 1) {
    ShapeFail("bce_with_logits", lv, targets);
  }
  const std::size_t n = lv.rows();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = lv[i], y = targets[i];
    loss += std::max(l, 0.0) - l * y + std::log1p(std::exp(-std::abs(l)));
  }
  Matrix out(1, 1, loss / static_cast<double>(n));
  const int il = logits.id();
  return t.Record("bce_with_logits", std::move(out), {il},
                  [il, targets](Tape& t, int self) {
    const double g = t.GradAt(self)(0, 0);
    const Matrix& lv = t.ValueAt(il);
    Matrix& gl = t.GradRef(il);
    const double inv_n = 1.0 / static_cast<double>(lv.rows());
    for (std::size_t i = 0; i < lv.rows(); ++i) {
      gl[i] += g * inv_n * (SigmoidScalar(lv[i]) - targets[i]);
    }
  });
}

Var SumProduct(Tape& t, Var a, const Matrix& weights) {
  const Matrix& av = t.value(a);
  if (!av.SameShape(weights)) ShapeFail("sum_product", av, weights);
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * weights[i];
  const int ia = a.id();
  return t.Record("sum_product", Matrix(1, 1, s), {ia},
                  [ia, weights](Tape& t, int self) {
    const double g = t.GradAt(self)(0, 0);
    Matrix& ga = t.GradRef(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * weights[i];
  });
}

Var GumbelSoftmax(Tape& t, Var logits, double tau, Rng& rng) {
  if (!(tau > 0.0)) throw ConfigError("gumbel_softmax: tau must be > 0");
  const Matrix& lv = t.value(logits);
  if (lv.cols() < 2) {
    throw DataError("gumbel_softmax: need at least 2 categories, got " +
                    lv.ShapeString());
  }
  Matrix noise(lv.rows(), lv.cols());
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (double& g : noise.values()) {
    const double u = std::clamp(uni(rng), 1e-12, 1.0 - 1e-12);
    g = -std::log(-std::log(u));
  }
  Var perturbed = Add(t, logits, t.Constant(std::move(noise)));
  return Softmax(t, Scale(t, perturbed, 1.0 / tau));
}

double GradCheck(const std::function<Var(Tape&, Var)>& op, const Matrix& input,
                 double epsilon, std::uint64_t weight_seed) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw ConfigError("grad_check epsilon must lie in [1e-7, 1e-3]");
  }
  Matrix weights;
  Matrix analytic;
  {
    Tape t;
    Var x = t.Leaf(input);
    Var y = op(t, x);
    weights = Matrix(t.value(y).rows(), t.value(y).cols());
    Rng rng = MakeRng(weight_seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& w : weights.values()) w = dist(rng);
    Var loss = SumProduct(t, y, weights);
    t.Backward(loss);
    analytic = t.grad(x);
  }
  auto eval = [&](const Matrix& at) {
    Tape t;
    Var x = t.Constant(at);
    Var y = op(t, x);
    return t.value(SumProduct(t, y, weights))(0, 0);
  };
  double worst = 0.0;
  Matrix probe = input;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + epsilon;
    const double up = eval(probe);
    probe[i] = orig - epsilon;
    const double down = eval(probe);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double err =
        std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace dpsynth::ad
