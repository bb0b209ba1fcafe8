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

#include "exted/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "exted/errors.hpp"

namespace exted {

namespace {

std::vector<TokenId> random_ids(Rng& rng, std::size_t vocab, std::size_t max_len) {
  std::vector<TokenId> ids(1 + rng.below(max_len));
  // Skip the reserved ids so the sequences look like real data.
  for (auto& id : ids) id = Vocabulary::kReserved + rng.below(vocab - Vocabulary::kReserved);
  return ids;
}

// Mean zero-ec cross-entropy within 1e-3 of ln V.
bool zero_pass_near_cap(const GradCheckInstance& inst) {
  if (inst.config.mode == Mode::kVanilla) return false;
  const double cap = std::log(static_cast<double>(inst.config.vocab_size));
  for (const auto& pair : inst.pairs) {
    SequenceScore s = score_response(inst.params, pair, std::nullopt, EvalEcMode::kZero, inst.config);
    if (std::abs(s.nll / static_cast<double>(s.tokens) - cap) < 1e-3) return true;
  }
  return false;
}

}  // namespace

GradCheckInstance random_gradcheck_instance(std::uint64_t seed, Mode mode) {
  Rng rng(seed);
  for (;;) {
    GradCheckInstance inst;
    ModelConfig& cfg = inst.config;
    cfg.mode = mode;
    cfg.vocab_size = 6 + rng.below(7);
    cfg.embed_dim = 1 + rng.below(6);
    cfg.hidden_size = 1 + rng.below(8);
    cfg.ec_dim = 1 + rng.below(5);
    cfg.lambda2 = 0.5 + rng.uniform();
    cfg.lambda3 = 0.5 + rng.uniform();
    cfg.train_ec_feed = rng.below(2) == 0 ? EcFeed::kPredicted : EcFeed::kTrue;

    inst.params = ExtEdParams::glorot(cfg, rng);
    inst.params.for_each([&](const char*, Matrix& m) {
      if (m.cols() == 1) {
        for (double& v : m.values()) v = 0.5 * (2.0 * rng.uniform() - 1.0);
      }
    });

    for (int i = 0; i < 2; ++i) {
      inst.pairs.push_back({random_ids(rng, cfg.vocab_size, 4), random_ids(rng, cfg.vocab_size, 4)});
      std::vector<double> ec;
      if (mode != Mode::kVanilla) {
        ec.resize(cfg.ec_dim);
        for (double& v : ec) v = 2.0 * rng.uniform() - 1.0;
      }
      inst.ec.push_back(std::move(ec));
    }
    if (seed % 2 == 1) {
      for (const auto& pair : inst.pairs) {
        for (TokenId id : pair.response) inst.params.out_bias[id] += 1.5;
      }
      inst.params.out_bias[Vocabulary::kEos] += 1.5;
    }
    if (!zero_pass_near_cap(inst)) return inst;
  }
}

double gradcheck_loss(const GradCheckInstance& inst, const ExtEdParams& params) {
  double total = 0.0;
  for (std::size_t i = 0; i < inst.pairs.size(); ++i) {
    std::optional<std::span<const double>> ec;
    if (inst.config.mode != Mode::kVanilla) ec = std::span<const double>(inst.ec[i]);
    total += forward_losses(params, inst.pairs[i], ec, inst.config).losses.total;
  }
  return total;
}

GradCheckResult check_gradients(const GradCheckInstance& inst, double eps, double tolerance,
                                double floor) {
  Gradients analytic = ExtEdParams::zeros(inst.config);
  for (std::size_t i = 0; i < inst.pairs.size(); ++i) {
    std::optional<std::span<const double>> ec;
    if (inst.config.mode != Mode::kVanilla) ec = std::span<const double>(inst.ec[i]);
    ForwardResult f = forward_losses(inst.params, inst.pairs[i], ec, inst.config);
    Gradients g = backward(inst.params, f.caches, inst.config);
    analytic.for_each([&](const char* name, Matrix& m) {
      g.for_each([&](const char* other, const Matrix& gm) {
        if (std::string_view(name) == other) m += gm;
      });
    });
  }

  GradCheckResult result;
  ExtEdParams probe = inst.params;
  std::vector<const Matrix*> analytic_tensors;
  analytic.for_each([&](const char*, const Matrix& m) { analytic_tensors.push_back(&m); });
  std::size_t index = 0;
  probe.for_each([&](const char* name, Matrix& tensor) {
    const Matrix& a = *analytic_tensors[index++];
    const Matrix original = tensor;
    Matrix numeric = finite_diff_grad(
        [&](const Matrix& values) {
          tensor = values;
          return gradcheck_loss(inst, probe);
        },
        original, eps);
    tensor = original;
    TensorCheck tc{name, 0.0};
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double denom = std::max({std::abs(a[k]), std::abs(numeric[k]), floor});
      tc.max_rel_error = std::max(tc.max_rel_error, std::abs(a[k] - numeric[k]) / denom);
    }
    result.max_rel_error = std::max(result.max_rel_error, tc.max_rel_error);
    result.tensors.push_back(std::move(tc));
  });
  result.passed = result.max_rel_error < tolerance;
  return result;
}

}  // namespace exted
