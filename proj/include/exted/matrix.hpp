// Copyright 2026 The ExtEd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EXTED_MATRIX_HPP_
#define EXTED_MATRIX_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace exted {

// Dense row-major matrix of doubles. Column vectors are N x 1 matrices.
//
// Zero-sized dimensions are allowed so that an absent slot (the external
// context in vanilla mode) can travel through the same code paths.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Row-major literal, e.g. Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix column(std::span<const double> values);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  // "RxC", used in error messages.
  std::string shape_string() const;

  void fill(double v);
  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

// a * b. Each output entry is accumulated over k in increasing order starting
// from 0.0, so results are reproducible bit for bit.
Matrix matmul(const Matrix& a, const Matrix& b);

// transpose(a) * b without materializing the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

// out += a * transpose(b); the accumulation used for weight gradients.
void add_outer(Matrix& out, const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix hadamard(const Matrix& a, const Matrix& b);

// Stacks column vectors top to bottom.
Matrix concat_rows(std::initializer_list<const Matrix*> parts);
// Rows [begin, begin + count) of a column vector.
Matrix slice_rows(const Matrix& v, std::size_t begin, std::size_t count);
// Row r of a as a column vector.
Matrix row_as_column(const Matrix& a, std::size_t r);

double frobenius_norm(const Matrix& a);
bool all_finite(const Matrix& a);

// Throws DimensionError when the shapes differ; `what` names the operation.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace exted

#endif  // EXTED_MATRIX_HPP_
