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

#include "exted/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "exted/errors.hpp"

namespace exted {

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t j = 0; j < logits.cols(); ++j) {
    double max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.rows(); ++i) max = std::max(max, logits(i, j));
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      out(i, j) = std::exp(logits(i, j) - max);
      sum += out(i, j);
    }
    for (std::size_t i = 0; i < logits.rows(); ++i) out(i, j) /= sum;
  }
  return out;
}

CrossEntropy softmax_cross_entropy(const Matrix& logits, std::size_t target) {
  if (logits.cols() != 1 || logits.rows() == 0) {
    throw DimensionError("softmax_cross_entropy: logits must be Vx1, got " +
                         logits.shape_string());
  }
  if (target >= logits.rows()) {
    throw IndexError("softmax_cross_entropy: target " + std::to_string(target) +
                     " out of range for V=" + std::to_string(logits.rows()));
  }
  double max = logits[0];
  for (double v : logits.values()) max = std::max(max, v);
  double sum = 0.0;
  for (double v : logits.values()) sum += std::exp(v - max);
  const double log_z = max + std::log(sum);

  CrossEntropy out;
  out.loss = log_z - logits[target];
  out.grad = Matrix(logits.rows(), 1);
  for (std::size_t i = 0; i < logits.rows(); ++i) out.grad[i] = std::exp(logits[i] - log_z);
  out.grad[target] -= 1.0;
  return out;
}

LstmParams::LstmParams(std::size_t input_size, std::size_t hidden_size)
    : w_x(4 * hidden_size, input_size),
      w_h(4 * hidden_size, hidden_size),
      b(4 * hidden_size, 1) {}

LstmParams LstmParams::glorot(Rng& rng, std::size_t input_size, std::size_t hidden_size) {
  LstmParams p(input_size, hidden_size);
  p.w_x = glorot_init(rng, 4 * hidden_size, input_size);
  p.w_h = glorot_init(rng, 4 * hidden_size, hidden_size);
  return p;
}

namespace {

void check_vector(const Matrix& v, std::size_t n, const char* name) {
  if (v.rows() != n || (v.cols() != 1 && n != 0)) {
    throw DimensionError(std::string("lstm: ") + name + " must be " + std::to_string(n) +
                         "x1, got " + v.shape_string());
  }
}

}  // namespace

LstmStep lstm_cell_forward(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                           const LstmParams& p) {
  const std::size_t hidden = p.hidden_size();
  const std::size_t input = p.input_size();
  if (p.w_x.rows() != 4 * hidden || p.w_h.rows() != 4 * hidden || p.b.rows() != 4 * hidden) {
    throw DimensionError("lstm: inconsistent parameter shapes");
  }
  check_vector(x, input, "x");
  check_vector(h_prev, hidden, "h_prev");
  check_vector(c_prev, hidden, "c_prev");

  // z = W_x x + W_h h_prev + b, summed in that order.
  Matrix z = matmul(p.w_x, x.empty() ? Matrix(0, 1) : x);
  z += matmul(p.w_h, h_prev);
  z += p.b;

  LstmStep step;
  LstmCache& cache = step.cache;
  cache.input_size = input;
  cache.hidden_size = hidden;
  cache.x = x;
  cache.h_prev = h_prev;
  cache.c_prev = c_prev;
  cache.i = Matrix(hidden, 1);
  cache.f = Matrix(hidden, 1);
  cache.o = Matrix(hidden, 1);
  cache.g = Matrix(hidden, 1);
  cache.c = Matrix(hidden, 1);
  cache.tanh_c = Matrix(hidden, 1);
  step.h = Matrix(hidden, 1);
  for (std::size_t k = 0; k < hidden; ++k) {
    cache.i[k] = sigmoid(z[k]);
    cache.f[k] = sigmoid(z[hidden + k]);
    cache.o[k] = sigmoid(z[2 * hidden + k]);
    cache.g[k] = std::tanh(z[3 * hidden + k]);
    cache.c[k] = cache.f[k] * c_prev[k] + cache.i[k] * cache.g[k];
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    step.h[k] = cache.o[k] * cache.tanh_c[k];
  }
  step.c = cache.c;
  return step;
}

LstmInputGrads lstm_cell_backward_accumulate(const LstmParams& p, const LstmCache& cache,
                                             const Matrix& dh, const Matrix& dc,
                                             LstmParams& grads) {
  const std::size_t hidden = p.hidden_size();
  if (cache.hidden_size != hidden || cache.input_size != p.input_size() ||
      cache.i.rows() != hidden || cache.x.rows() != p.input_size()) {
    throw ContractError("lstm backward: cache was produced by a cell of shape E=" +
                        std::to_string(cache.input_size) + " H=" +
                        std::to_string(cache.hidden_size) + ", parameters are E=" +
                        std::to_string(p.input_size()) + " H=" + std::to_string(hidden));
  }
  if (grads.w_x.rows() != p.w_x.rows() || grads.w_x.cols() != p.w_x.cols() ||
      grads.w_h.rows() != p.w_h.rows() || grads.b.rows() != p.b.rows()) {
    throw DimensionError("lstm backward: gradient accumulator shaped unlike parameters");
  }
  check_vector(dh, hidden, "dh");
  check_vector(dc, hidden, "dc");

  Matrix dz(4 * hidden, 1);
  LstmInputGrads out;
  out.dc_prev = Matrix(hidden, 1);
  for (std::size_t k = 0; k < hidden; ++k) {
    const double tc = cache.tanh_c[k];
    const double d_o = dh[k] * tc;
    const double d_c = dc[k] + dh[k] * cache.o[k] * (1.0 - tc * tc);
    const double d_f = d_c * cache.c_prev[k];
    const double d_i = d_c * cache.g[k];
    const double d_g = d_c * cache.i[k];
    out.dc_prev[k] = d_c * cache.f[k];
    dz[k] = d_i * cache.i[k] * (1.0 - cache.i[k]);
    dz[hidden + k] = d_f * cache.f[k] * (1.0 - cache.f[k]);
    dz[2 * hidden + k] = d_o * cache.o[k] * (1.0 - cache.o[k]);
    dz[3 * hidden + k] = d_g * (1.0 - cache.g[k] * cache.g[k]);
  }
  if (!cache.x.empty()) add_outer(grads.w_x, dz, cache.x);
  add_outer(grads.w_h, dz, cache.h_prev);
  grads.b += dz;
  out.dx = cache.x.empty() ? Matrix(0, 1) : matmul_at_b(p.w_x, dz);
  out.dh_prev = matmul_at_b(p.w_h, dz);
  return out;
}

LstmBackward lstm_cell_backward(const LstmParams& p, const LstmCache& cache, const Matrix& dh,
                                const Matrix& dc) {
  LstmBackward out;
  out.dparams = LstmParams(p.input_size(), p.hidden_size());
  LstmInputGrads g = lstm_cell_backward_accumulate(p, cache, dh, dc, out.dparams);
  out.dx = std::move(g.dx);
  out.dh_prev = std::move(g.dh_prev);
  out.dc_prev = std::move(g.dc_prev);
  return out;
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& loss_fn,
                        const Matrix& params, double eps) {
  if (!(eps > 0.0)) throw ContractError("finite_diff_grad: eps must be > 0");
  Matrix grad(params.rows(), params.cols());
  Matrix probe = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double up = loss_fn(probe);
    probe[i] = saved - eps;
    const double down = loss_fn(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_grad: non-finite loss at coordinate " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

}  // namespace exted
