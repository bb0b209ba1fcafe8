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

#include "exted/trainer.hpp"

#include <limits>
#include <numeric>

#include "exted/errors.hpp"

namespace exted {

namespace {

std::vector<DialoguePair> training_split(std::span<const DialoguePair> corpus, bool hold_out) {
  std::vector<DialoguePair> out;
  for (const auto& p : corpus) {
    if (!hold_out || !is_validation_id(p.id)) out.push_back(p);
  }
  return out;
}

}  // namespace

Trainer::Trainer(std::span<const DialoguePair> corpus, const TrainConfig& config)
    : config_(config) {
  const std::vector<DialoguePair> train_pairs = training_split(corpus, config_.validation_split);
  if (train_pairs.empty()) throw InputError("train: no training pairs after the split");
  state_.vocab = build_vocab(std::span<const DialoguePair>(train_pairs), config_.vocab_max_size,
                             config_.vocab_min_count);
  config_.model.vocab_size = state_.vocab.size();
  state_.config = config_.model;
  state_.adam = config_.adam;
  state_.rng = Rng(config_.seed);
  state_.params = ExtEdParams::glorot(state_.config, state_.rng);
  state_.opt = AdamState::zeros_like(state_.config);
  state_.epochs_completed = 0;
  prepare(corpus);
}

Trainer::Trainer(std::span<const DialoguePair> corpus, const TrainConfig& config, Checkpoint ckpt)
    : config_(config), state_(std::move(ckpt)) {
  config_.model = state_.config;
  config_.adam = state_.adam;
  prepare(corpus);
}

void Trainer::prepare(std::span<const DialoguePair> corpus) {
  const ModelConfig& cfg = state_.config;
  if (cfg.mode != Mode::kVanilla) {
    for (const auto& pair : corpus) {
      if (!pair.ec) {
        throw InputError("train: no external context vector for pair '" + pair.id + "'");
      }
      if (pair.ec->dim() != cfg.ec_dim) {
        throw DimensionError("train: ec of pair '" + pair.id + "' has dim " +
                             std::to_string(pair.ec->dim()) + ", config ec_dim is " +
                             std::to_string(cfg.ec_dim));
      }
    }
  }
  train_.clear();
  validation_.clear();
  for (const auto& pair : corpus) {
    if (pair.context.empty() || pair.response.empty()) {
      throw InputError("train: pair '" + pair.id + "' has an empty context or response");
    }
  }
  std::vector<Example> all = encode_corpus(corpus, state_.vocab);
  for (auto& ex : all) {
    if (config_.validation_split && is_validation_id(ex.id)) {
      validation_.push_back(std::move(ex));
    } else {
      train_.push_back(std::move(ex));
    }
  }
  if (train_.empty()) throw InputError("train: no training pairs after the split");
}

void Trainer::run_epoch() {
  const ModelConfig& cfg = state_.config;
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle_in_place(order, state_.rng);

  double sum_l1 = 0.0, sum_total = 0.0;
  for (std::size_t idx : order) {
    const Example& ex = train_[idx];
    ForwardResult fwd = forward_losses(state_.params, ex.ids, ex.ec_span(), cfg);
    Gradients grads = backward(state_.params, fwd.caches, cfg);
    adam_step(state_.params, grads, state_.opt, state_.adam);
    const LossBreakdown& l = fwd.losses;
    log_.steps.push_back({state_.opt.step, l.l1, l.l2, l.l3, l.total});
    sum_l1 += l.l1;
    sum_total += l.total;
  }
  ++state_.epochs_completed;

  EpochRecord rec;
  rec.epoch = state_.epochs_completed;
  rec.train_l1 = sum_l1 / static_cast<double>(train_.size());
  rec.train_total = sum_total / static_cast<double>(train_.size());
  rec.val_ppl = std::numeric_limits<double>::quiet_NaN();
  rec.val_bleu4 = std::numeric_limits<double>::quiet_NaN();
  if (!validation_.empty()) {
    rec.val_ppl = perplexity(state_.params, cfg, validation_, cfg.eval_ec_mode);
    if (config_.validation_bleu) {
      rec.val_bleu4 = corpus_bleu4(state_.params, cfg, validation_, cfg.eval_ec_mode,
                                   config_.max_len);
    }
  }
  log_.epochs.push_back(rec);

  if (config_.checkpoint_dir) {
    std::filesystem::create_directories(*config_.checkpoint_dir);
    save_checkpoint(state_, *config_.checkpoint_dir /
                                ("epoch_" + std::to_string(state_.epochs_completed) + ".xed"));
  }
}

void Trainer::run(std::size_t epochs) {
  for (std::size_t e = 0; e < epochs; ++e) run_epoch();
}

TrainResult train(std::span<const DialoguePair> corpus, const TrainConfig& config) {
  Trainer trainer(corpus, config);
  trainer.run(config.epochs);
  return {trainer.checkpoint(), trainer.log()};
}

}  // namespace exted
