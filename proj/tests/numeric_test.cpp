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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "exted/errors.hpp"
#include "exted/matrix.hpp"
#include "exted/nn.hpp"
#include "exted/rng.hpp"
#include "test_util.hpp"

namespace exted {
namespace {

using testing::max_relative_error;
using testing::random_matrix;

TEST(MatmulTest, IdentityLeavesMatrixUnchanged) {
  Rng rng(1);
  Matrix a = random_matrix(rng, 3, 5);
  EXPECT_EQ(matmul(Matrix::identity(3), a), a);
}

TEST(MatmulTest, HandExample) {
  Matrix a{{1, 2}, {3, 4}};
  Matrix b{{1}, {1}};
  EXPECT_EQ(matmul(a, b), (Matrix{{3}, {7}}));
}

TEST(MatmulTest, MatchesTripleLoopBitwise) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = random_matrix(rng, 3, 4);
    Matrix b = random_matrix(rng, 4, 2);
    Matrix c = matmul(a, b);
    auto expected = testing::oracle_matmul(a, b);
    ASSERT_EQ(c.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(c[i], expected[i]);
  }
}

TEST(MatmulTest, ShapeMismatchNamesBothShapes) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos);
  }
}

TEST(MatmulTest, AssociativityOnRandomTriples) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(5), m = 1 + rng.below(5), k = 1 + rng.below(5),
                      l = 1 + rng.below(5);
    Matrix a = random_matrix(rng, n, m), b = random_matrix(rng, m, k), c = random_matrix(rng, k, l);
    Matrix left = matmul(matmul(a, b), c);
    Matrix right = matmul(a, matmul(b, c));
    const double scale = std::max(frobenius_norm(left), 1.0);
    EXPECT_LT(frobenius_norm(left - right) / scale, 1e-9);
  }
}

TEST(MatmulTest, TransposedVariantsAgreeWithExplicitTranspose) {
  Rng rng(5);
  Matrix a = random_matrix(rng, 4, 3), b = random_matrix(rng, 4, 2);
  EXPECT_EQ(matmul_at_b(a, b), matmul(transpose(a), b));
  Matrix out(4, 4);
  Matrix u = random_matrix(rng, 4, 1), v = random_matrix(rng, 4, 1);
  add_outer(out, u, v);
  EXPECT_EQ(out, matmul(u, transpose(v)));
}

TEST(SoftmaxCrossEntropyTest, UniformLogits) {
  for (std::size_t target = 0; target < 4; ++target) {
    CrossEntropy ce = softmax_cross_entropy(Matrix(4, 1), target);
    EXPECT_NEAR(ce.loss, std::log(4.0), 1e-15);
    EXPECT_NEAR(ce.loss, 1.386294, 1e-6);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_DOUBLE_EQ(ce.grad[i], i == target ? 0.25 - 1.0 : 0.25);
    }
  }
}

TEST(SoftmaxCrossEntropyTest, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t v = 2 + rng.below(10);
    const std::size_t target = rng.below(v);
    Matrix logits = random_matrix(rng, v, 1, 3.0);
    Matrix numeric = finite_diff_grad(
        [&](const Matrix& l) { return softmax_cross_entropy(l, target).loss; }, logits, 1e-5);
    EXPECT_LT(max_relative_error(softmax_cross_entropy(logits, target).grad, numeric), 1e-6);
  }
}

TEST(SoftmaxCrossEntropyTest, TargetOutOfRange) {
  EXPECT_THROW(softmax_cross_entropy(Matrix(4, 1), 4), IndexError);
}

TEST(SoftmaxCrossEntropyTest, StableForLargeLogits) {
  Matrix logits{{1000.0}, {0.0}, {-1000.0}};
  CrossEntropy ce = softmax_cross_entropy(logits, 0);
  EXPECT_TRUE(std::isfinite(ce.loss));
  EXPECT_NEAR(ce.loss, 0.0, 1e-12);
}

TEST(SoftmaxTest, ColumnsSumToOne) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix logits = random_matrix(rng, 1 + rng.below(30), 1 + rng.below(3), 20.0);
    Matrix p = softmax(logits);
    for (std::size_t j = 0; j < p.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < p.rows(); ++i) s += p(i, j);
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(LstmCellTest, ZeroParametersZeroState) {
  LstmParams p(3, 2);
  LstmStep s = lstm_cell_forward(Matrix{{1}, {2}, {3}}, Matrix(2, 1), Matrix(2, 1), p);
  EXPECT_EQ(s.h, Matrix(2, 1));
  EXPECT_EQ(s.c, Matrix(2, 1));
  EXPECT_DOUBLE_EQ(s.cache.i[0], 0.5);
  EXPECT_DOUBLE_EQ(s.cache.g[0], 0.0);
}

TEST(LstmCellTest, ZeroParametersCarryHalfTheCell) {
  LstmParams p(2, 3);
  Matrix c_prev{{0.4}, {-1.2}, {2.0}};
  LstmStep s = lstm_cell_forward(Matrix{{0.3}, {0.1}}, Matrix(3, 1), c_prev, p);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(s.c[k], 0.5 * c_prev[k]);
    EXPECT_DOUBLE_EQ(s.h[k], 0.5 * std::tanh(0.5 * c_prev[k]));
  }
}

TEST(LstmCellTest, MatchesScalarOracle) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t e = 1 + rng.below(6), h = 1 + rng.below(6);
    LstmParams p;
    p.w_x = random_matrix(rng, 4 * h, e);
    p.w_h = random_matrix(rng, 4 * h, h);
    p.b = random_matrix(rng, 4 * h, 1);
    Matrix x = random_matrix(rng, e, 1), hp = random_matrix(rng, h, 1),
           cp = random_matrix(rng, h, 1);
    LstmStep s = lstm_cell_forward(x, hp, cp, p);
    auto o = testing::oracle_lstm_step(testing::to_vec(x), testing::to_vec(hp),
                                       testing::to_vec(cp), p);
    for (std::size_t k = 0; k < h; ++k) {
      EXPECT_NEAR(s.h[k], o.h[k], 1e-14);
      EXPECT_NEAR(s.c[k], o.c[k], 1e-14);
    }
  }
}

TEST(LstmCellTest, ShapeMismatch) {
  LstmParams p(3, 2);
  EXPECT_THROW(lstm_cell_forward(Matrix(2, 1), Matrix(2, 1), Matrix(2, 1), p), DimensionError);
}

TEST(LstmCellTest, BackwardZeroUpstream) {
  Rng rng(29);
  LstmParams p = LstmParams::glorot(rng, 3, 4);
  LstmStep s = lstm_cell_forward(random_matrix(rng, 3, 1), random_matrix(rng, 4, 1),
                                 random_matrix(rng, 4, 1), p);
  LstmBackward b = lstm_cell_backward(p, s.cache, Matrix(4, 1), Matrix(4, 1));
  EXPECT_EQ(b.dx, Matrix(3, 1));
  EXPECT_EQ(b.dh_prev, Matrix(4, 1));
  EXPECT_EQ(b.dc_prev, Matrix(4, 1));
  EXPECT_EQ(b.dparams, LstmParams(3, 4));
}

TEST(LstmCellTest, BackwardSingleUnitMatchesHandDerivative) {
  // E = H = 1, W_h = 0, b = 0, x = 1, h_prev = 0, so each gate preactivation
  // is its W_x weight. Loss = h.
  const double ai = 0.5, af = -0.3, ao = 0.8, ag = 0.2, c0 = 0.7;
  LstmParams p(1, 1);
  p.w_x = Matrix{{ai}, {af}, {ao}, {ag}};
  LstmStep s = lstm_cell_forward(Matrix{{1.0}}, Matrix{{0.0}}, Matrix{{c0}}, p);
  LstmBackward b = lstm_cell_backward(p, s.cache, Matrix{{1.0}}, Matrix{{0.0}});

  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double i = sig(ai), f = sig(af), o = sig(ao), g = std::tanh(ag);
  const double c = f * c0 + i * g;
  const double dh_dc = o * (1.0 - std::tanh(c) * std::tanh(c));
  const double d_ai = dh_dc * g * i * (1.0 - i);
  const double d_af = dh_dc * c0 * f * (1.0 - f);
  const double d_ao = std::tanh(c) * o * (1.0 - o);
  const double d_ag = dh_dc * i * (1.0 - g * g);

  EXPECT_NEAR(b.dparams.w_x[0], d_ai, 1e-15);
  EXPECT_NEAR(b.dparams.w_x[1], d_af, 1e-15);
  EXPECT_NEAR(b.dparams.w_x[2], d_ao, 1e-15);
  EXPECT_NEAR(b.dparams.w_x[3], d_ag, 1e-15);
  EXPECT_NEAR(b.dx[0], ai * d_ai + af * d_af + ao * d_ao + ag * d_ag, 1e-15);
  EXPECT_NEAR(b.dc_prev[0], dh_dc * f, 1e-15);
  EXPECT_EQ(b.dh_prev[0], 0.0);  // W_h == 0
  EXPECT_NEAR(b.dparams.b[2], d_ao, 1e-15);
}

TEST(LstmCellTest, BackwardMatchesFiniteDifferences) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t e = 1 + rng.below(5), h = 1 + rng.below(5);
    LstmParams p;
    p.w_x = random_matrix(rng, 4 * h, e);
    p.w_h = random_matrix(rng, 4 * h, h);
    p.b = random_matrix(rng, 4 * h, 1);
    Matrix x = random_matrix(rng, e, 1), hp = random_matrix(rng, h, 1),
           cp = random_matrix(rng, h, 1);
    Matrix wh = random_matrix(rng, h, 1), wc = random_matrix(rng, h, 1);
    auto loss = [&](const LstmParams& q, const Matrix& xx, const Matrix& hh, const Matrix& cc) {
      LstmStep s = lstm_cell_forward(xx, hh, cc, q);
      double l = 0.0;
      for (std::size_t k = 0; k < h; ++k) l += wh[k] * s.h[k] + wc[k] * s.c[k];
      return l;
    };
    LstmStep s = lstm_cell_forward(x, hp, cp, p);
    LstmBackward b = lstm_cell_backward(p, s.cache, wh, wc);

    const double eps = 1e-5, tol = 1e-4;
    auto check = [&](const Matrix& analytic, const Matrix& at, auto with) {
      Matrix numeric = finite_diff_grad([&](const Matrix& m) { return with(m); }, at, eps);
      EXPECT_LT(max_relative_error(analytic, numeric), tol);
    };
    check(b.dparams.w_x, p.w_x, [&](const Matrix& m) {
      LstmParams q = p;
      q.w_x = m;
      return loss(q, x, hp, cp);
    });
    check(b.dparams.w_h, p.w_h, [&](const Matrix& m) {
      LstmParams q = p;
      q.w_h = m;
      return loss(q, x, hp, cp);
    });
    check(b.dparams.b, p.b, [&](const Matrix& m) {
      LstmParams q = p;
      q.b = m;
      return loss(q, x, hp, cp);
    });
    check(b.dx, x, [&](const Matrix& m) { return loss(p, m, hp, cp); });
    check(b.dh_prev, hp, [&](const Matrix& m) { return loss(p, x, m, cp); });
    check(b.dc_prev, cp, [&](const Matrix& m) { return loss(p, x, hp, m); });
  }
}

TEST(LstmCellTest, BackwardRejectsMismatchedCache) {
  Rng rng(37);
  LstmParams small = LstmParams::glorot(rng, 2, 3);
  LstmParams big = LstmParams::glorot(rng, 2, 4);
  LstmStep s = lstm_cell_forward(Matrix(2, 1), Matrix(3, 1), Matrix(3, 1), small);
  EXPECT_THROW(lstm_cell_backward(big, s.cache, Matrix(4, 1), Matrix(4, 1)), ContractError);
}

TEST(FiniteDiffTest, QuadraticIsExact) {
  Matrix x{{3.0}};
  Matrix g = finite_diff_grad([](const Matrix& m) { return m[0] * m[0]; }, x, 1e-5);
  EXPECT_NEAR(g[0], 6.0, 1e-9);
}

TEST(FiniteDiffTest, ConstantGivesZero) {
  Matrix x{{1.0, 2.0}, {3.0, 4.0}};
  Matrix g = finite_diff_grad([](const Matrix&) { return 7.5; }, x, 1e-5);
  EXPECT_EQ(g, Matrix(2, 2));
}

TEST(FiniteDiffTest, NonFiniteLossThrows) {
  Matrix x{{0.0}};
  EXPECT_THROW(finite_diff_grad([](const Matrix& m) { return std::log(m[0]); }, x, 1e-5),
               NumericError);
  EXPECT_THROW(finite_diff_grad([](const Matrix&) { return 0.0; }, x, 0.0), ContractError);
}

TEST(RngTest, SameSeedSameSequence) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngTest, SerializeRoundTripContinuesSequence) {
  Rng a(5);
  for (int i = 0; i < 10; ++i) a.uniform();
  Rng b = Rng::deserialize(a.seed(), a.serialize());
  EXPECT_EQ(a, b);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(GlorotTest, Deterministic) {
  Rng a(7), b(7);
  EXPECT_EQ(glorot_init(a, 10, 20), glorot_init(b, 10, 20));
}

TEST(GlorotTest, WithinBound) {
  Rng rng(7);
  Matrix m = glorot_init(rng, 100, 100);
  const double bound = std::sqrt(6.0 / 200.0);
  for (double v : m.values()) {
    EXPECT_GE(v, -bound);
    EXPECT_LE(v, bound);
  }
}

TEST(GlorotTest, SampleMeanNearZero) {
  Rng rng(11);
  Matrix m = glorot_init(rng, 1000, 1000);
  const double bound = std::sqrt(6.0 / 2000.0);
  const double mean = std::accumulate(m.values().begin(), m.values().end(), 0.0) / 1e6;
  EXPECT_LT(std::abs(mean), 3.0 * bound / std::sqrt(3.0 * 1e6));
}

TEST(GaussianTest, DegenerateSigma) {
  Rng rng(1);
  EXPECT_EQ(gaussian_sample(rng, 4.0, 0.0), 4.0);
  EXPECT_EQ(gaussian_sample(rng, -2.5, 0.0), -2.5);
}

TEST(GaussianTest, Deterministic) {
  Rng a(123), b(123);
  EXPECT_EQ(gaussian_sample(a, 4.0, 1.0), gaussian_sample(b, 4.0, 1.0));
}

TEST(GaussianTest, MomentsOfNFourOne) {
  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = gaussian_sample(rng, 4.0, 1.0);
    sum += xs[i];
  }
  const double mean = sum / n;
  for (double x : xs) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / n);
  EXPECT_NEAR(mean, 4.0, 0.02);
  EXPECT_NEAR(sd, 1.0, 0.02);
}

}  // namespace
}  // namespace exted
