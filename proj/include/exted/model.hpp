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

// Encoder-decoder with an external context slot.
//
// The encoder LSTM reads the context; a linear layer f maps its final hidden
// state to a predicted external context vector ec_hat. At every decoder step
// the LSTM input is [embedding(prev token); encoder final h; ec], and the
// next-token distribution is softmax(W_out h_dec + b_out).
//
// Training minimizes
//   total = L1 + lambda2 * L2 + lambda3 * L3
// with
//   L1 = sum of next-token cross-entropies (response tokens plus EOS),
//   L2 = || ec_hat - ec_true ||_2,
//   L3 = -min(H0, ln V), H0 being the mean per-token cross-entropy of a
//        second teacher-forced pass with ec = 0.
// L3 rewards the decoder for doing badly when the external context is
// withheld, which forces it to rely on ec. The ln V cap keeps the total
// bounded below; above the cap L3 has zero gradient.

#ifndef EXTED_MODEL_HPP_
#define EXTED_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exted/matrix.hpp"
#include "exted/nn.hpp"
#include "exted/rng.hpp"
#include "exted/vocab.hpp"

namespace exted {

enum class Mode { kVanilla, kExtEd, kExtEdMinusL3 };
// Which external context the decoder sees during training.
enum class EcFeed { kPredicted, kTrue };
// Which external context the decoder sees at evaluation/generation time.
enum class EvalEcMode { kPredicted, kOracle, kZero };

std::string_view to_string(Mode m);
std::string_view to_string(EcFeed f);
std::string_view to_string(EvalEcMode m);
// Throw InputError for unknown names.
Mode parse_mode(std::string_view s);
EcFeed parse_ec_feed(std::string_view s);
EvalEcMode parse_eval_ec_mode(std::string_view s);

struct ModelConfig {
  std::size_t vocab_size = 5000;
  std::size_t embed_dim = 100;
  std::size_t hidden_size = 128;
  std::size_t ec_dim = 100;
  double lambda2 = 1.0;
  double lambda3 = 1.0;
  Mode mode = Mode::kExtEd;
  EcFeed train_ec_feed = EcFeed::kPredicted;
  EvalEcMode eval_ec_mode = EvalEcMode::kPredicted;

  // Width of the ec slot; 0 in vanilla mode.
  std::size_t slot_dim() const { return mode == Mode::kVanilla ? 0 : ec_dim; }
  double effective_lambda2() const { return mode == Mode::kVanilla ? 0.0 : lambda2; }
  double effective_lambda3() const { return mode == Mode::kExtEd ? lambda3 : 0.0; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// All trainable tensors. Also used to hold gradients and Adam moments.
struct ExtEdParams {
  Matrix embedding;   // V x E
  LstmParams encoder; // input E, hidden H
  Matrix f_weight;    // D x H (D = slot_dim)
  Matrix f_bias;      // D x 1
  LstmParams decoder; // input E + H + D, hidden H
  Matrix out_weight;  // V x H
  Matrix out_bias;    // V x 1

  static ExtEdParams zeros(const ModelConfig& cfg);
  // Glorot-uniform weights, zero biases. Draw order follows for_each order.
  static ExtEdParams glorot(const ModelConfig& cfg, Rng& rng);

  std::size_t vocab_size() const { return embedding.rows(); }
  std::size_t embed_dim() const { return embedding.cols(); }
  std::size_t hidden_size() const { return encoder.hidden_size(); }
  std::size_t slot_dim() const { return f_weight.rows(); }

  // Throws DimensionError unless every tensor is shaped for `cfg`.
  void check_shapes(const ModelConfig& cfg) const;

  // Visits (name, tensor) in the fixed checkpoint order: embedding,
  // encoder W_x/W_h/b, f_weight, f_bias, decoder W_x/W_h/b, out W, out b.
  template <typename Fn>
  void for_each(Fn&& fn) {
    fn("embedding", embedding);
    fn("encoder.w_x", encoder.w_x);
    fn("encoder.w_h", encoder.w_h);
    fn("encoder.b", encoder.b);
    fn("f_weight", f_weight);
    fn("f_bias", f_bias);
    fn("decoder.w_x", decoder.w_x);
    fn("decoder.w_h", decoder.w_h);
    fn("decoder.b", decoder.b);
    fn("out_weight", out_weight);
    fn("out_bias", out_bias);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    const_cast<ExtEdParams*>(this)->for_each(
        [&](const char* name, Matrix& m) { fn(name, static_cast<const Matrix&>(m)); });
  }

  std::size_t parameter_count() const;

  friend bool operator==(const ExtEdParams&, const ExtEdParams&) = default;
};

using Gradients = ExtEdParams;

// Token ids of one training example (no SOS/EOS; those are added here).
struct EncodedPair {
  std::vector<TokenId> context;
  std::vector<TokenId> response;
};

struct EncoderState {
  Matrix h;
  Matrix c;
  std::vector<TokenId> inputs;
  std::vector<LstmCache> caches;
};

// Runs the encoder from a zero state. Throws InputError for an empty
// context and IndexError for ids >= V.
EncoderState encode(const ExtEdParams& p, std::span<const TokenId> context_ids);

// ec_hat = f_weight * h_final + f_bias.
Matrix predict_external_context(const ExtEdParams& p, const Matrix& h_final);

struct DecoderState {
  Matrix h;
  Matrix c;
};

DecoderState initial_decoder_state(const ExtEdParams& p);

struct DecodeCache {
  TokenId prev_id = 0;
  LstmCache lstm;
  Matrix h;  // decoder hidden state fed to the projection
};

struct DecodeStep {
  Matrix logits;  // V x 1
  DecoderState state;
  DecodeCache cache;
};

// One decoder step. `ec` must be D x 1 with D = p.slot_dim(); passing a
// non-empty ec to a vanilla model is a ContractError.
DecodeStep decode_step(const ExtEdParams& p, TokenId prev_id, const DecoderState& state,
                       const Matrix& h_enc_final, const Matrix& ec);

struct LossBreakdown {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double total = 0.0;
  std::size_t tokens = 0;  // response length + 1 (EOS)
};

// Per-pass intermediates kept for backward.
struct DecoderPass {
  std::vector<DecodeCache> steps;
  std::vector<Matrix> dlogits;  // softmax - onehot, unscaled
  std::vector<double> token_nll;
};

struct LossCaches {
  Mode mode = Mode::kExtEd;
  EcFeed feed = EcFeed::kPredicted;
  std::size_t vocab_size = 0;
  std::size_t hidden_size = 0;
  std::size_t slot_dim = 0;
  EncoderState encoder;
  Matrix ec_hat;
  Matrix ec_true;
  Matrix ec_feed;
  DecoderPass fed;
  std::optional<DecoderPass> zero_ec;  // absent in vanilla mode
  bool l3_capped = false;              // H0 >= ln V, L3 has zero gradient
};

struct ForwardResult {
  LossBreakdown losses;
  LossCaches caches;
};

// Teacher-forced losses for one pair. `ec_true` is required (D values)
// except in vanilla mode, where it is ignored.
ForwardResult forward_losses(const ExtEdParams& p, const EncodedPair& pair,
                             std::optional<std::span<const double>> ec_true,
                             const ModelConfig& cfg);

// Exact gradients of LossBreakdown::total with respect to every tensor.
Gradients backward(const ExtEdParams& p, const LossCaches& caches, const ModelConfig& cfg);

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const AdamHyper&, const AdamHyper&) = default;
};

struct AdamState {
  ExtEdParams m;
  ExtEdParams v;
  std::uint64_t step = 0;

  static AdamState zeros_like(const ModelConfig& cfg);

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// Bias-corrected Adam. Throws NumericError (naming the tensor) before
// touching anything if a gradient is non-finite.
void adam_step(ExtEdParams& p, const Gradients& grads, AdamState& state,
               const AdamHyper& hyper);

// The ec the decoder sees under `mode`: ec_hat for kPredicted, `oracle`
// for kOracle (InputError if absent), zeros for kZero. Empty in vanilla.
Matrix select_eval_ec(const ExtEdParams& p, const Matrix& ec_hat, EvalEcMode mode,
                      std::optional<std::span<const double>> oracle, const ModelConfig& cfg);

struct SequenceScore {
  double nll = 0.0;        // sum over response tokens + EOS
  std::size_t tokens = 0;
};

// Teacher-forced negative log-likelihood of the response under `eval_mode`.
SequenceScore score_response(const ExtEdParams& p, const EncodedPair& pair,
                             std::optional<std::span<const double>> oracle_ec,
                             EvalEcMode eval_mode, const ModelConfig& cfg);

// Greedy decoding from SOS. Stops after EOS (not emitted) or max_len
// tokens. Argmax ties go to the lowest id.
std::vector<TokenId> generate(const ExtEdParams& p, std::span<const TokenId> context_ids,
                              std::size_t max_len, const ModelConfig& cfg,
                              std::optional<std::span<const double>> oracle_ec = std::nullopt);
std::vector<TokenId> generate(const ExtEdParams& p, std::span<const TokenId> context_ids,
                              std::size_t max_len, const ModelConfig& cfg,
                              EvalEcMode ec_mode,
                              std::optional<std::span<const double>> oracle_ec);

}  // namespace exted

#endif  // EXTED_MODEL_HPP_
