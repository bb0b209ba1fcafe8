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

#ifndef EXTED_NN_HPP_
#define EXTED_NN_HPP_

#include <cmath>
#include <cstddef>
#include <functional>

#include "exted/matrix.hpp"
#include "exted/rng.hpp"

namespace exted {

// Column-wise softmax of a V x 1 vector with max subtraction.
Matrix softmax(const Matrix& logits);

struct CrossEntropy {
  double loss = 0.0;  // -log softmax(logits)[target]
  Matrix grad;        // softmax(logits) - onehot(target)
};

CrossEntropy softmax_cross_entropy(const Matrix& logits, std::size_t target);

// Weights of one LSTM layer. The 4H rows of w_x, w_h and b are split into
// gate blocks in the fixed order input, forget, output, candidate.
struct LstmParams {
  Matrix w_x;  // 4H x E
  Matrix w_h;  // 4H x H
  Matrix b;    // 4H x 1

  LstmParams() = default;
  LstmParams(std::size_t input_size, std::size_t hidden_size);

  std::size_t input_size() const { return w_x.cols(); }
  std::size_t hidden_size() const { return w_h.cols(); }

  static LstmParams glorot(Rng& rng, std::size_t input_size, std::size_t hidden_size);

  friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

enum class Gate : std::size_t { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

// Everything the backward pass needs from one forward step.
struct LstmCache {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  Matrix x, h_prev, c_prev;
  Matrix i, f, o, g;  // gate activations
  Matrix c, tanh_c;
};

struct LstmStep {
  Matrix h;
  Matrix c;
  LstmCache cache;
};

LstmStep lstm_cell_forward(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                           const LstmParams& p);

struct LstmInputGrads {
  Matrix dx;
  Matrix dh_prev;
  Matrix dc_prev;
};

// Backward through one step. Parameter gradients are added into `grads`,
// which must be shaped like `p`. `dh` and `dc` are the upstream gradients on
// this step's h and c outputs.
LstmInputGrads lstm_cell_backward_accumulate(const LstmParams& p, const LstmCache& cache,
                                             const Matrix& dh, const Matrix& dc,
                                             LstmParams& grads);

struct LstmBackward {
  Matrix dx;
  Matrix dh_prev;
  Matrix dc_prev;
  LstmParams dparams;
};

LstmBackward lstm_cell_backward(const LstmParams& p, const LstmCache& cache, const Matrix& dh,
                                const Matrix& dc);

// Central-difference gradient of `loss_fn` at `params`:
// (f(theta + eps e_i) - f(theta - eps e_i)) / (2 eps) for every entry.
// Throws NumericError if the loss is ever non-finite.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& loss_fn,
                        const Matrix& params, double eps);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace exted

#endif  // EXTED_NN_HPP_
