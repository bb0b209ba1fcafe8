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

#include "exted/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "exted/errors.hpp"

namespace exted {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kVanilla: return "vanilla";
    case Mode::kExtEd: return "ext_ed";
    case Mode::kExtEdMinusL3: return "ext_ed_minus_L3";
  }
  return "?";
}

std::string_view to_string(EcFeed f) {
  return f == EcFeed::kPredicted ? "predicted" : "true";
}

std::string_view to_string(EvalEcMode m) {
  switch (m) {
    case EvalEcMode::kPredicted: return "predicted";
    case EvalEcMode::kOracle: return "oracle";
    case EvalEcMode::kZero: return "zero";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "vanilla") return Mode::kVanilla;
  if (s == "ext_ed") return Mode::kExtEd;
  if (s == "ext_ed_minus_L3") return Mode::kExtEdMinusL3;
  throw InputError("unknown mode '" + std::string(s) +
                   "' (expected vanilla|ext_ed|ext_ed_minus_L3)");
}

EcFeed parse_ec_feed(std::string_view s) {
  if (s == "predicted") return EcFeed::kPredicted;
  if (s == "true") return EcFeed::kTrue;
  throw InputError("unknown train_ec_feed '" + std::string(s) + "' (expected predicted|true)");
}

EvalEcMode parse_eval_ec_mode(std::string_view s) {
  if (s == "predicted") return EvalEcMode::kPredicted;
  if (s == "oracle") return EvalEcMode::kOracle;
  if (s == "zero") return EvalEcMode::kZero;
  throw InputError("unknown ec mode '" + std::string(s) + "' (expected predicted|oracle|zero)");
}

// ---------------------------------------------------------------------------
// Parameters

ExtEdParams ExtEdParams::zeros(const ModelConfig& cfg) {
  const std::size_t v = cfg.vocab_size, e = cfg.embed_dim, h = cfg.hidden_size;
  const std::size_t d = cfg.slot_dim();
  ExtEdParams p;
  p.embedding = Matrix(v, e);
  p.encoder = LstmParams(e, h);
  p.f_weight = Matrix(d, h);
  p.f_bias = Matrix(d, 1);
  p.decoder = LstmParams(e + h + d, h);
  p.out_weight = Matrix(v, h);
  p.out_bias = Matrix(v, 1);
  return p;
}

ExtEdParams ExtEdParams::glorot(const ModelConfig& cfg, Rng& rng) {
  ExtEdParams p = zeros(cfg);
  p.for_each([&](const char*, Matrix& m) {
    // Bias vectors stay zero.
    if (m.cols() > 1) m = glorot_init(rng, m.rows(), m.cols());
  });
  return p;
}

void ExtEdParams::check_shapes(const ModelConfig& cfg) const {
  const std::size_t v = cfg.vocab_size, e = cfg.embed_dim, h = cfg.hidden_size;
  const std::size_t d = cfg.slot_dim();
  const std::size_t want[][2] = {{v, e},         {4 * h, e}, {4 * h, h}, {4 * h, 1},
                                 {d, h},         {d, 1},     {4 * h, e + h + d},
                                 {4 * h, h},     {4 * h, 1}, {v, h},     {v, 1}};
  std::size_t i = 0;
  for_each([&](const char* name, const Matrix& m) {
    const auto& w = want[i++];
    if (w[0] != m.rows() || w[1] != m.cols()) {
      throw DimensionError(std::string("parameter ") + name + " is " + m.shape_string() +
                           ", config requires " + std::to_string(w[0]) + "x" +
                           std::to_string(w[1]));
    }
  });
}

std::size_t ExtEdParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const char*, const Matrix& m) { n += m.size(); });
  return n;
}

// ---------------------------------------------------------------------------
// Forward pieces

namespace {

void check_id(TokenId id, std::size_t vocab, const char* what) {
  if (id >= vocab) {
    throw IndexError(std::string(what) + " id " + std::to_string(id) +
                     " out of range for V=" + std::to_string(vocab));
  }
}

void add_row(Matrix& table, TokenId row, const Matrix& grad_column, std::size_t offset) {
  for (std::size_t j = 0; j < table.cols(); ++j) table(row, j) += grad_column[offset + j];
}

Matrix ec_column(std::span<const double> values) { return Matrix::column(values); }

}  // namespace

EncoderState encode(const ExtEdParams& p, std::span<const TokenId> context_ids) {
  if (context_ids.empty()) throw InputError("encode: empty context");
  const std::size_t hidden = p.hidden_size();
  EncoderState st;
  st.h = Matrix(hidden, 1);
  st.c = Matrix(hidden, 1);
  st.inputs.assign(context_ids.begin(), context_ids.end());
  st.caches.reserve(context_ids.size());
  for (TokenId id : context_ids) {
    check_id(id, p.vocab_size(), "context");
    LstmStep step = lstm_cell_forward(row_as_column(p.embedding, id), st.h, st.c, p.encoder);
    st.h = std::move(step.h);
    st.c = std::move(step.c);
    st.caches.push_back(std::move(step.cache));
  }
  return st;
}

Matrix predict_external_context(const ExtEdParams& p, const Matrix& h_final) {
  if (h_final.rows() != p.hidden_size() || h_final.cols() != 1) {
    throw DimensionError("predict_external_context: h_final is " + h_final.shape_string() +
                         ", expected " + std::to_string(p.hidden_size()) + "x1");
  }
  Matrix ec_hat = matmul(p.f_weight, h_final);
  ec_hat += p.f_bias;
  return ec_hat;
}

DecoderState initial_decoder_state(const ExtEdParams& p) {
  return {Matrix(p.hidden_size(), 1), Matrix(p.hidden_size(), 1)};
}

DecodeStep decode_step(const ExtEdParams& p, TokenId prev_id, const DecoderState& state,
                       const Matrix& h_enc_final, const Matrix& ec) {
  check_id(prev_id, p.vocab_size(), "decoder input");
  const std::size_t slot = p.slot_dim();
  if (slot == 0 && !ec.empty()) {
    throw ContractError("decode_step: external context supplied to a vanilla model");
  }
  if (ec.rows() != slot || (slot > 0 && ec.cols() != 1)) {
    throw DimensionError("decode_step: ec is " + ec.shape_string() + ", expected " +
                         std::to_string(slot) + "x1");
  }
  const Matrix emb = row_as_column(p.embedding, prev_id);
  const Matrix x = concat_rows({&emb, &h_enc_final, &ec});

  DecodeStep out;
  LstmStep step = lstm_cell_forward(x, state.h, state.c, p.decoder);
  out.logits = matmul(p.out_weight, step.h);
  out.logits += p.out_bias;
  out.cache.prev_id = prev_id;
  out.cache.h = step.h;
  out.cache.lstm = std::move(step.cache);
  out.state = {std::move(step.h), std::move(step.c)};
  return out;
}

namespace {

// Teacher-forced pass: inputs SOS r1 .. rn, targets r1 .. rn EOS.
DecoderPass run_decoder(const ExtEdParams& p, const Matrix& h_enc, const Matrix& ec,
                        std::span<const TokenId> response) {
  DecoderPass pass;
  const std::size_t steps = response.size() + 1;
  pass.steps.reserve(steps);
  pass.dlogits.reserve(steps);
  pass.token_nll.reserve(steps);
  DecoderState state = initial_decoder_state(p);
  TokenId prev = Vocabulary::kSos;
  for (std::size_t t = 0; t < steps; ++t) {
    const TokenId target = t < response.size() ? response[t] : Vocabulary::kEos;
    DecodeStep step = decode_step(p, prev, state, h_enc, ec);
    CrossEntropy ce = softmax_cross_entropy(step.logits, target);
    pass.token_nll.push_back(ce.loss);
    pass.dlogits.push_back(std::move(ce.grad));
    pass.steps.push_back(std::move(step.cache));
    state = std::move(step.state);
    prev = target;
  }
  return pass;
}

double sum_in_order(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

Matrix ec_true_column(const ExtEdParams& p, std::optional<std::span<const double>> ec_true,
                      const char* where) {
  if (!ec_true) {
    throw InputError(std::string(where) + ": external context vector required in this mode");
  }
  if (ec_true->size() != p.slot_dim()) {
    throw DimensionError(std::string(where) + ": ec has " + std::to_string(ec_true->size()) +
                         " values, model expects " + std::to_string(p.slot_dim()));
  }
  return ec_column(*ec_true);
}

}  // namespace

ForwardResult forward_losses(const ExtEdParams& p, const EncodedPair& pair,
                             std::optional<std::span<const double>> ec_true,
                             const ModelConfig& cfg) {
  p.check_shapes(cfg);
  if (pair.response.empty()) throw InputError("forward_losses: empty response");
  for (TokenId id : pair.response) check_id(id, p.vocab_size(), "response");

  ForwardResult out;
  LossCaches& c = out.caches;
  c.mode = cfg.mode;
  c.feed = cfg.train_ec_feed;
  c.vocab_size = cfg.vocab_size;
  c.hidden_size = cfg.hidden_size;
  c.slot_dim = cfg.slot_dim();
  c.encoder = encode(p, pair.context);
  c.ec_hat = predict_external_context(p, c.encoder.h);

  const bool vanilla = cfg.mode == Mode::kVanilla;
  if (vanilla) {
    c.ec_true = Matrix(0, 1);
    c.ec_feed = Matrix(0, 1);
  } else {
    c.ec_true = ec_true_column(p, ec_true, "forward_losses");
    c.ec_feed = cfg.train_ec_feed == EcFeed::kPredicted ? c.ec_hat : c.ec_true;
  }

  LossBreakdown& loss = out.losses;
  loss.tokens = pair.response.size() + 1;
  c.fed = run_decoder(p, c.encoder.h, c.ec_feed, pair.response);
  loss.l1 = sum_in_order(c.fed.token_nll);

  if (!vanilla) {
    loss.l2 = frobenius_norm(c.ec_hat - c.ec_true);
    c.zero_ec = run_decoder(p, c.encoder.h, Matrix(c.slot_dim, 1), pair.response);
    const double h0 = sum_in_order(c.zero_ec->token_nll) / static_cast<double>(loss.tokens);
    const double cap = std::log(static_cast<double>(cfg.vocab_size));
    c.l3_capped = h0 >= cap;
    loss.l3 = -std::min(h0, cap);
  }
  loss.total = loss.l1 + cfg.effective_lambda2() * loss.l2 + cfg.effective_lambda3() * loss.l3;
  return out;
}

// ---------------------------------------------------------------------------
// Backward

namespace {

// Backpropagates `weight` times the pass's summed cross-entropy. Encoder
// state gradients go to d_henc; ec-slot gradients to d_ec when non-null.
void backprop_decoder(const ExtEdParams& p, const DecoderPass& pass, double weight,
                      Gradients& g, Matrix& d_henc, Matrix* d_ec) {
  const std::size_t e = p.embed_dim(), h = p.hidden_size(), d = p.slot_dim();
  Matrix dh_next(h, 1), dc_next(h, 1);
  for (std::size_t t = pass.steps.size(); t-- > 0;) {
    const DecodeCache& step = pass.steps[t];
    Matrix dlogits = pass.dlogits[t] * weight;
    add_outer(g.out_weight, dlogits, step.h);
    g.out_bias += dlogits;
    Matrix dh = matmul_at_b(p.out_weight, dlogits);
    dh += dh_next;
    LstmInputGrads in = lstm_cell_backward_accumulate(p.decoder, step.lstm, dh, dc_next,
                                                      g.decoder);
    add_row(g.embedding, step.prev_id, in.dx, 0);
    for (std::size_t k = 0; k < h; ++k) d_henc[k] += in.dx[e + k];
    if (d_ec != nullptr) {
      for (std::size_t k = 0; k < d; ++k) (*d_ec)[k] += in.dx[e + h + k];
    }
    dh_next = std::move(in.dh_prev);
    dc_next = std::move(in.dc_prev);
  }
}

void backprop_encoder(const ExtEdParams& p, const EncoderState& enc, const Matrix& d_hfinal,
                      Gradients& g) {
  Matrix dh = d_hfinal;
  Matrix dc(p.hidden_size(), 1);
  for (std::size_t t = enc.caches.size(); t-- > 0;) {
    LstmInputGrads in = lstm_cell_backward_accumulate(p.encoder, enc.caches[t], dh, dc,
                                                      g.encoder);
    add_row(g.embedding, enc.inputs[t], in.dx, 0);
    dh = std::move(in.dh_prev);
    dc = std::move(in.dc_prev);
  }
}

}  // namespace

Gradients backward(const ExtEdParams& p, const LossCaches& caches, const ModelConfig& cfg) {
  if (caches.mode != cfg.mode || caches.feed != cfg.train_ec_feed ||
      caches.vocab_size != p.vocab_size() || caches.hidden_size != p.hidden_size() ||
      caches.slot_dim != p.slot_dim() || caches.encoder.caches.empty() ||
      caches.fed.steps.empty()) {
    throw ContractError("backward: caches do not match these parameters/config");
  }
  p.check_shapes(cfg);

  Gradients g = ExtEdParams::zeros(cfg);
  const std::size_t d = p.slot_dim();
  Matrix d_henc(p.hidden_size(), 1);
  Matrix d_ec_feed(d, 1);

  backprop_decoder(p, caches.fed, 1.0, g, d_henc, &d_ec_feed);

  const double lambda3 = cfg.effective_lambda3();
  if (caches.zero_ec && !caches.l3_capped && lambda3 != 0.0) {
    // d(lambda3 * L3) / d(nll_t) = -lambda3 / tokens while below the cap.
    const double tokens = static_cast<double>(caches.zero_ec->steps.size());
    backprop_decoder(p, *caches.zero_ec, -lambda3 / tokens, g, d_henc, nullptr);
  }

  Matrix d_ec_hat(d, 1);
  if (cfg.mode != Mode::kVanilla) {
    if (caches.feed == EcFeed::kPredicted) d_ec_hat += d_ec_feed;
    const double lambda2 = cfg.effective_lambda2();
    Matrix diff = caches.ec_hat - caches.ec_true;
    const double norm = frobenius_norm(diff);
    // Zero subgradient at ec_hat == ec_true.
    if (lambda2 != 0.0 && norm > 0.0) d_ec_hat += diff * (lambda2 / norm);
  }
  add_outer(g.f_weight, d_ec_hat, caches.encoder.h);
  g.f_bias += d_ec_hat;
  d_henc += matmul_at_b(p.f_weight, d_ec_hat);

  backprop_encoder(p, caches.encoder, d_henc, g);
  return g;
}

// ---------------------------------------------------------------------------
// Optimizer

AdamState AdamState::zeros_like(const ModelConfig& cfg) {
  return {ExtEdParams::zeros(cfg), ExtEdParams::zeros(cfg), 0};
}

void adam_step(ExtEdParams& p, const Gradients& grads, AdamState& state,
               const AdamHyper& hyper) {
  std::vector<Matrix*> params, m, v;
  std::vector<const Matrix*> g;
  std::vector<const char*> names;
  p.for_each([&](const char* name, Matrix& t) {
    params.push_back(&t);
    names.push_back(name);
  });
  grads.for_each([&](const char*, const Matrix& t) { g.push_back(&t); });
  state.m.for_each([&](const char*, Matrix& t) { m.push_back(&t); });
  state.v.for_each([&](const char*, Matrix& t) { v.push_back(&t); });

  for (std::size_t i = 0; i < params.size(); ++i) {
    if (g[i]->size() != params[i]->size() || m[i]->size() != params[i]->size() ||
        v[i]->size() != params[i]->size()) {
      throw DimensionError(std::string("adam_step: shape mismatch for ") + names[i]);
    }
    if (!all_finite(*g[i])) {
      throw NumericError(std::string("adam_step: non-finite gradient in ") + names[i]);
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& w = *params[i];
    const Matrix& gi = *g[i];
    Matrix& mi = *m[i];
    Matrix& vi = *v[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      mi[k] = hyper.beta1 * mi[k] + (1.0 - hyper.beta1) * gi[k];
      vi[k] = hyper.beta2 * vi[k] + (1.0 - hyper.beta2) * gi[k] * gi[k];
      const double m_hat = mi[k] / c1;
      const double v_hat = vi[k] / c2;
      w[k] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation

Matrix select_eval_ec(const ExtEdParams& p, const Matrix& ec_hat, EvalEcMode mode,
                      std::optional<std::span<const double>> oracle, const ModelConfig& cfg) {
  if (cfg.mode == Mode::kVanilla) return Matrix(0, 1);
  switch (mode) {
    case EvalEcMode::kPredicted: return ec_hat;
    case EvalEcMode::kOracle: return ec_true_column(p, oracle, "oracle ec");
    case EvalEcMode::kZero: return Matrix(p.slot_dim(), 1);
  }
  return Matrix(p.slot_dim(), 1);
}

SequenceScore score_response(const ExtEdParams& p, const EncodedPair& pair,
                             std::optional<std::span<const double>> oracle_ec,
                             EvalEcMode eval_mode, const ModelConfig& cfg) {
  p.check_shapes(cfg);
  EncoderState enc = encode(p, pair.context);
  Matrix ec = select_eval_ec(p, predict_external_context(p, enc.h), eval_mode, oracle_ec, cfg);
  for (TokenId id : pair.response) check_id(id, p.vocab_size(), "response");
  DecoderPass pass = run_decoder(p, enc.h, ec, pair.response);
  return {sum_in_order(pass.token_nll), pass.token_nll.size()};
}

std::vector<TokenId> generate(const ExtEdParams& p, std::span<const TokenId> context_ids,
                              std::size_t max_len, const ModelConfig& cfg,
                              EvalEcMode ec_mode,
                              std::optional<std::span<const double>> oracle_ec) {
  if (max_len == 0) throw InputError("generate: max_len must be >= 1");
  p.check_shapes(cfg);
  EncoderState enc = encode(p, context_ids);
  Matrix ec = select_eval_ec(p, predict_external_context(p, enc.h), ec_mode, oracle_ec, cfg);

  std::vector<TokenId> out;
  DecoderState state = initial_decoder_state(p);
  TokenId prev = Vocabulary::kSos;
  while (out.size() < max_len) {
    DecodeStep step = decode_step(p, prev, state, enc.h, ec);
    // max_element returns the first maximum, i.e. the lowest id.
    auto values = step.logits.values();
    const TokenId best =
        static_cast<TokenId>(std::max_element(values.begin(), values.end()) - values.begin());
    if (best == Vocabulary::kEos) break;
    out.push_back(best);
    state = std::move(step.state);
    prev = best;
  }
  return out;
}

std::vector<TokenId> generate(const ExtEdParams& p, std::span<const TokenId> context_ids,
                              std::size_t max_len, const ModelConfig& cfg,
                              std::optional<std::span<const double>> oracle_ec) {
  return generate(p, context_ids, max_len, cfg, cfg.eval_ec_mode, oracle_ec);
}

}  // namespace exted
