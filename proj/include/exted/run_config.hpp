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

// Experiment configuration read by the command-line tool.
//
// A single flat JSON object. Model keys are those of ModelConfig except
// vocab_size (taken from the vocabulary); path keys are resolved against the
// directory holding the config file. Example:
//
//   {"corpus": "train.jsonl", "kb": "nell", "knowledge": "nell.tsv",
//    "embeddings": "glove.txt", "embedding_dim": 100,
//    "stopwords": "stopwords.txt", "ec_file": "ec.jsonl",
//    "checkpoint_dir": "runs/a", "mode": "ext_ed", "epochs": 10,
//    "lr": 0.001, "seed": 1}

#ifndef EXTED_RUN_CONFIG_HPP_
#define EXTED_RUN_CONFIG_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "exted/embeddings.hpp"
#include "exted/trainer.hpp"

namespace exted {

enum class KbKind { kWiki, kNell };

std::string_view to_string(KbKind k);
KbKind parse_kb_kind(std::string_view s);

struct RunConfig {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> knowledge;
  std::optional<std::filesystem::path> ec_file;
  std::optional<std::filesystem::path> checkpoint_dir;
  KbKind kb = KbKind::kWiki;
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  bool scale_ec = false;
  std::size_t workers = 1;
  // model, adam, epochs, seed, split and vocabulary settings. When ec_dim
  // is absent it follows embedding_dim.
  TrainConfig train;
};

// Throws InputError on unknown keys, wrongly typed values, or input paths
// (corpus, embeddings, stopwords, knowledge) that do not exist. ec_file and
// checkpoint_dir may be outputs and are checked by require_existing().
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Returns the path stored under `key`, throwing InputError when it is unset
// or, with must_exist, when nothing is there.
const std::filesystem::path& require_path(const RunConfig& cfg, std::string_view key,
                                          bool must_exist = true);

}  // namespace exted

#endif  // EXTED_RUN_CONFIG_HPP_
