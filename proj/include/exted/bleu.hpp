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

#ifndef EXTED_BLEU_HPP_
#define EXTED_BLEU_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace exted {

struct NgramMatch {
  std::size_t matched = 0;  // clipped
  std::size_t total = 0;    // hypothesis n-grams
};

// Clipped n-gram matches of `hyp` against a single reference.
template <typename Token>
NgramMatch ngram_match(std::span<const Token> hyp, std::span<const Token> ref, std::size_t n) {
  NgramMatch out;
  if (hyp.size() < n) return out;
  std::map<std::vector<Token>, std::size_t> ref_counts;
  for (std::size_t i = 0; i + n <= ref.size(); ++i) {
    ++ref_counts[std::vector<Token>(ref.begin() + i, ref.begin() + i + n)];
  }
  std::map<std::vector<Token>, std::size_t> hyp_counts;
  for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
    ++hyp_counts[std::vector<Token>(hyp.begin() + i, hyp.begin() + i + n)];
  }
  out.total = hyp.size() - n + 1;
  for (const auto& [gram, count] : hyp_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) out.matched += std::min(count, it->second);
  }
  return out;
}

// Sentence BLEU-4 with add-one smoothing for n >= 2:
//   p1 = m1 / c1,  pn = (mn + 1) / (cn + 1) for n = 2..4,
//   BLEU = exp(min(0, 1 - |ref| / |hyp|)) * (p1 p2 p3 p4)^(1/4).
// An empty hypothesis scores 0.
template <typename Token>
double bleu4(std::span<const Token> hyp, std::span<const Token> ref) {
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const NgramMatch m = ngram_match(hyp, ref, n);
    double p;
    if (n == 1) {
      p = static_cast<double>(m.matched) / static_cast<double>(m.total);
    } else {
      p = static_cast<double>(m.matched + 1) / static_cast<double>(m.total + 1);
    }
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
  }
  const double ratio = static_cast<double>(ref.size()) / static_cast<double>(hyp.size());
  const double brevity = std::exp(std::min(0.0, 1.0 - ratio));
  return brevity * std::exp(log_sum / 4.0);
}

template <typename Token>
double bleu4(const std::vector<Token>& hyp, const std::vector<Token>& ref) {
  return bleu4(std::span<const Token>(hyp), std::span<const Token>(ref));
}

}  // namespace exted

#endif  // EXTED_BLEU_HPP_
