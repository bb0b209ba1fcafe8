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


#include "exted/run_config.hpp"

#include <fstream>
#include <set>

#include "exted/checkpoint.hpp"
#include "exted/errors.hpp"

namespace exted {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string, std::less<>> kModelKeys = {
    "embed_dim", "hidden_size", "ec_dim", "lambda2", "lambda3",
    "mode",      "train_ec_feed", "eval_ec_mode"};

const std::set<std::string, std::less<>> kPathKeys = {
    "corpus", "embeddings", "stopwords", "knowledge", "ec_file", "checkpoint_dir"};

const std::set<std::string, std::less<>> kOtherKeys = {
    "kb",        "embedding_dim",   "scale_ec",        "workers",
    "epochs",    "lr",              "beta1",           "beta2",
    "adam_eps",  "seed",            "validation_split", "validation_bleu",
    "vocab_max_size", "vocab_min_count", "max_len"};

std::optional<fs::path>* path_slot(RunConfig& cfg, std::string_view key) {
  if (key == "corpus") return &cfg.corpus;
  if (key == "embeddings") return &cfg.embeddings;
  if (key == "stopwords") return &cfg.stopwords;
  if (key == "knowledge") return &cfg.knowledge;
  if (key == "ec_file") return &cfg.ec_file;
  if (key == "checkpoint_dir") return &cfg.checkpoint_dir;
  return nullptr;
}

}  // namespace

std::string_view to_string(KbKind k) { return k == KbKind::kWiki ? "wiki" : "nell"; }

KbKind parse_kb_kind(std::string_view s) {
  if (s == "wiki") return KbKind::kWiki;
  if (s == "nell") return KbKind::kNell;
  throw InputError("unknown knowledge base '" + std::string(s) + "' (expected wiki or nell)");
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw InputError("run config must be a JSON object");
  json model = json::object();
  for (const auto& [key, value] : j.items()) {
    if (kModelKeys.contains(key)) {
      model[key] = value;
    } else if (!kPathKeys.contains(key) && !kOtherKeys.contains(key)) {
      throw InputError("unknown config key '" + key + "'");
    }
  }

  RunConfig cfg;
  try {
    for (const auto& key : kPathKeys) {
      if (!j.contains(key)) continue;
      fs::path p = j[key].get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      *path_slot(cfg, key) = p;
    }
    if (j.contains("kb")) cfg.kb = parse_kb_kind(j["kb"].get<std::string>());
    if (j.contains("embedding_dim")) cfg.embedding_dim = j["embedding_dim"].get<std::size_t>();
    if (j.contains("scale_ec")) cfg.scale_ec = j["scale_ec"].get<bool>();
    if (j.contains("workers")) cfg.workers = j["workers"].get<std::size_t>();

    TrainConfig& t = cfg.train;
    if (!model.contains("ec_dim")) model["ec_dim"] = cfg.embedding_dim;
    t.model = model_config_from_json(model);
    if (j.contains("epochs")) t.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("lr")) t.adam.lr = j["lr"].get<double>();
    if (j.contains("beta1")) t.adam.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) t.adam.beta2 = j["beta2"].get<double>();
    if (j.contains("adam_eps")) t.adam.eps = j["adam_eps"].get<double>();
    if (j.contains("seed")) t.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("validation_split")) t.validation_split = j["validation_split"].get<bool>();
    if (j.contains("validation_bleu")) t.validation_bleu = j["validation_bleu"].get<bool>();
    if (j.contains("vocab_max_size")) t.vocab_max_size = j["vocab_max_size"].get<std::size_t>();
    if (j.contains("vocab_min_count")) {
      t.vocab_min_count = j["vocab_min_count"].get<std::size_t>();
    }
    if (j.contains("max_len")) t.max_len = j["max_len"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid config value: ") + e.what());
  }
  if (cfg.embedding_dim == 0) throw InputError("embedding_dim must be positive");
  if (cfg.workers == 0) throw InputError("workers must be positive");
  if (cfg.train.adam.lr <= 0.0) throw InputError("lr must be positive");

  for (const auto* key : {"corpus", "embeddings", "stopwords", "knowledge"}) {
    const auto& p = *path_slot(cfg, key);
    if (p && !fs::exists(*p)) {
      throw InputError("config key '" + std::string(key) + "': no such file " + p->string());
    }
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

const fs::path& require_path(const RunConfig& cfg, std::string_view key, bool must_exist) {
  const auto* slot = path_slot(const_cast<RunConfig&>(cfg), key);
  if (slot == nullptr) throw ContractError("require_path: unknown key " + std::string(key));
  if (!*slot) throw InputError("config key '" + std::string(key) + "' is required");
  if (must_exist && !fs::exists(**slot)) {
    throw InputError("config key '" + std::string(key) + "': no such file " + (*slot)->string());
  }
  return **slot;
}

}  // namespace exted
