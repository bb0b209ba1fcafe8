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

// Finite-difference verification of backward() on small random models.

#ifndef EXTED_GRADCHECK_HPP_
#define EXTED_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "exted/model.hpp"

namespace exted {

struct GradCheckInstance {
  ModelConfig config;
  ExtEdParams params;
  std::vector<EncodedPair> pairs;
  std::vector<std::vector<double>> ec;  // one per pair, empty in vanilla mode
};

// Random config with V <= 12, H <= 8, E <= 6, D_ec <= 5, random weights
// and biases, and a two-pair corpus. Odd seeds raise the output bias of
// the response tokens so the zero-ec pass falls below the ln V cap and
// the divergence term is live. Instances closer than 1e-3 to the cap are
// redrawn, since the loss has a kink there.
GradCheckInstance random_gradcheck_instance(std::uint64_t seed, Mode mode);

// Sum of LossBreakdown::total over the instance's pairs.
double gradcheck_loss(const GradCheckInstance& inst, const ExtEdParams& params);

struct TensorCheck {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckResult {
  std::vector<TensorCheck> tensors;
  double max_rel_error = 0.0;
  bool passed = false;
};

// Compares backward() with central differences entry by entry. The
// relative error of one entry is |a - n| / max(|a|, |n|, floor).
GradCheckResult check_gradients(const GradCheckInstance& inst, double eps = 1e-5,
                                double tolerance = 1e-4, double floor = 1e-5);

}  // namespace exted

#endif  // EXTED_GRADCHECK_HPP_
