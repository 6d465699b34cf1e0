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

#include "dpsynth/matrix.h"

#include <algorithm>
#include <cmath>

#include "dpsynth/error.h"

namespace dpsynth {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DataError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void Matrix::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Matrix::ShapeString() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

Matrix Matrix::SelectRows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw DataError("row index out of range");
    std::copy_n(data_.data() + indices[i] * cols_, cols_,
                out.data() + i * cols_);
  }
  return out;
}

Matrix Matrix::SliceCols(std::size_t start, std::size_t width) const {
  if (start + width > cols_) {
    throw DataError("column slice out of range for " + ShapeString());
  }
  Matrix out(rows_, width);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::copy_n(data_.data() + r * cols_ + start, width,
                out.data() + r * width);
  }
  return out;
}

void Gemm(const Matrix& a, bool transpose_a, const Matrix& b, bool transpose_b,
          Matrix& out) {
  const std::size_t n = transpose_a ? a.cols() : a.rows();
  const std::size_t k = transpose_a ? a.rows() : a.cols();
  const std::size_t kb = transpose_b ? b.cols() : b.rows();
  const std::size_t m = transpose_b ? b.rows() : b.cols();
  if (k != kb || out.rows() != n || out.cols() != m) {
    throw DataError("gemm shape mismatch: " + a.ShapeString() +
                    (transpose_a ? "^T" : "") + " * " + b.ShapeString() +
                    (transpose_b ? "^T" : "") + " -> " + out.ShapeString());
  }
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  if (!transpose_a && !transpose_b) {
    for (std::size_t i = 0; i < n; ++i) {
      double* orow = po + i * m;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = pa[i * k + p];
        if (av == 0.0) continue;
        const double* brow = pb + p * m;
        for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
      }
    }
  } else if (transpose_a && !transpose_b) {
    // a is k x n.
    for (std::size_t p = 0; p < k; ++p) {
      const double* arow = pa + p * n;
      const double* brow = pb + p * m;
      for (std::size_t i = 0; i < n; ++i) {
        const double av = arow[i];
        if (av == 0.0) continue;
        double* orow = po + i * m;
        for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
      }
    }
  } else if (!transpose_a && transpose_b) {
    // b is m x k.
    for (std::size_t i = 0; i < n; ++i) {
      const double* arow = pa + i * k;
      double* orow = po + i * m;
      for (std::size_t j = 0; j < m; ++j) {
        const double* brow = pb + j * k;
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        orow[j] += acc;
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
          acc += pa[p * n + i] * pb[j * k + p];
        }
        po[i * m + j] += acc;
      }
    }
  }
}

}  // namespace dpsynth
