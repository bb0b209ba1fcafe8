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

#ifndef EXTED_TRAINER_HPP_
#define EXTED_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "exted/checkpoint.hpp"
#include "exted/corpus.hpp"
#include "exted/evaluation.hpp"
#include "exted/model.hpp"

namespace exted {

struct TrainConfig {
  // vocab_size is overwritten with the size of the vocabulary built from
  // the training split.
  ModelConfig model;
  AdamHyper adam;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  // Hold out pairs with is_validation_id(id) and score them every epoch.
  bool validation_split = true;
  bool validation_bleu = true;
  std::size_t vocab_max_size = 5000;
  std::size_t vocab_min_count = 1;
  std::size_t max_len = 30;  // greedy decoding limit for validation BLEU
  // When set, "epoch_<n>.xed" is written here after every epoch.
  std::optional<std::filesystem::path> checkpoint_dir;
};

// Per-example (batch size 1) teacher-forced training with Adam.
//
// Every epoch visits the training split in an order drawn from the run's
// generator, then scores the validation split. Initialization, shuffling
// and all other randomness come from one Rng seeded with TrainConfig::seed,
// which is saved in checkpoints so a resumed run continues bit for bit.
class Trainer {
 public:
  // Fresh run: splits `corpus`, builds the vocabulary, initializes weights.
  Trainer(std::span<const DialoguePair> corpus, const TrainConfig& config);
  // Resumes from `ckpt`; its vocabulary and model config take precedence.
  Trainer(std::span<const DialoguePair> corpus, const TrainConfig& config, Checkpoint ckpt);

  void run_epoch();
  void run(std::size_t epochs);

  const Checkpoint& checkpoint() const { return state_; }
  const MetricsLog& log() const { return log_; }
  const ModelConfig& model_config() const { return state_.config; }
  std::span<const Example> train_examples() const { return train_; }
  std::span<const Example> validation_examples() const { return validation_; }

 private:
  void prepare(std::span<const DialoguePair> corpus);

  TrainConfig config_;
  Checkpoint state_;
  MetricsLog log_;
  std::vector<Example> train_;
  std::vector<Example> validation_;
};

struct TrainResult {
  Checkpoint checkpoint;
  MetricsLog log;
};

// Trainer(corpus, config).run(config.epochs).
TrainResult train(std::span<const DialoguePair> corpus, const TrainConfig& config);

}  // namespace exted

#endif  // EXTED_TRAINER_HPP_
