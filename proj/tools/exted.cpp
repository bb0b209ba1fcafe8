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


// exted: preprocessing, training, evaluation and generation from the shell.
//
// Results go to stdout (JSON, CSV or generated text); logs go to stderr at
// the level named by EXTED_LOG (error, info or debug; default info).
// Exit codes: 0 ok, 1 usage, 2 data or format error, 3 gradient check failed.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "exted/checkpoint.hpp"
#include "exted/corpus.hpp"
#include "exted/embeddings.hpp"
#include "exted/errors.hpp"
#include "exted/evaluation.hpp"
#include "exted/gradcheck.hpp"
#include "exted/knowledge.hpp"
#include "exted/run_config.hpp"
#include "exted/trainer.hpp"
#include "exted/vocab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace exted {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flag values; unset optionals leave the config untouched.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> ec_mode;
  std::optional<std::size_t> max_len;
  std::optional<std::size_t> epochs;
  std::optional<std::string> mode;
  std::optional<std::string> kb;
  std::vector<std::string> inputs;  // positional paths
  std::optional<std::string> context;
  bool repl = false;
};

RunConfig load_config(const Flags& f, bool required) {
  RunConfig cfg;
  if (!f.config.empty()) {
    cfg = load_run_config(f.config);
  } else if (required) {
    throw UsageError("--config is required");
  }
  if (f.seed) cfg.train.seed = *f.seed;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.max_len) cfg.train.max_len = *f.max_len;
  if (f.mode) cfg.train.model.mode = parse_mode(*f.mode);
  if (f.kb) cfg.kb = parse_kb_kind(*f.kb);
  if (f.ec_mode) cfg.train.model.eval_ec_mode = parse_eval_ec_mode(*f.ec_mode);
  return cfg;
}

std::vector<DialoguePair> load_pairs(const RunConfig& cfg) {
  const fs::path& path = require_path(cfg, "corpus");
  CorpusLoad load = load_corpus(path);
  spdlog::info("loaded {} pairs from {} ({} dropped)", load.pairs.size(), path.string(),
               load.dropped);
  return std::move(load.pairs);
}

// Attaches ec vectors from the configured file. Required unless vanilla.
void attach_configured_ec(const RunConfig& cfg, std::vector<DialoguePair>& pairs, Mode mode) {
  if (mode == Mode::kVanilla && !cfg.ec_file) return;
  const fs::path& path = require_path(cfg, "ec_file");
  const std::size_t missing = attach_ec(pairs, read_ec_file(path));
  spdlog::info("attached ec vectors from {}", path.string());
  if (missing > 0) spdlog::warn("{} pairs have no ec record", missing);
}

std::unique_ptr<KnowledgeSource> load_knowledge(const RunConfig& cfg) {
  const fs::path& path = require_path(cfg, "knowledge");
  if (cfg.kb == KbKind::kWiki) {
    WikiLoad load = load_wiki_snapshot(path);
    spdlog::info("wiki snapshot: {} titles, {} lines skipped", load.source.size(),
                 load.skipped_lines);
    return std::make_unique<WikiSummarySource>(std::move(load.source));
  }
  NellLoad load = load_nell_snapshot(path);
  spdlog::info("nell snapshot: {} entities, {} lines skipped", load.source.entity_count(),
               load.skipped_lines);
  return std::make_unique<NellSource>(std::move(load.source));
}

EmbeddingTable load_configured_embeddings(const RunConfig& cfg) {
  EmbeddingLoad load = load_embeddings(require_path(cfg, "embeddings"), cfg.embedding_dim);
  spdlog::info("embeddings: {} vectors of dim {}, {} lines skipped", load.table.size(),
               cfg.embedding_dim, load.skipped_lines);
  return std::move(load.table);
}

json diagnostics_json(const DiagnosticsReport& d) {
  json j = json::object();
  j["n_vectors"] = d.n_vectors;
  j["mean_distance"] = d.mean_distance;
  j["distance_variance"] = d.distance_variance;
  return j;
}

// Writes `text` to --out when given, else to stdout.
void emit(const Flags& f, const std::string& text) {
  if (!f.out) {
    std::cout << text;
    return;
  }
  std::ofstream out(*f.out, std::ios::binary);
  if (!out) throw IoError("cannot write " + *f.out);
  out << text;
  if (!out) throw IoError("failed writing " + *f.out);
}

int cmd_build_vocab(const Flags& f) {
  if (!f.out) throw UsageError("build-vocab needs --out");
  RunConfig cfg = load_config(f, true);
  std::vector<DialoguePair> pairs = load_pairs(cfg);
  // Same split as training so the file matches the vocabulary a run builds.
  if (cfg.train.validation_split) {
    std::erase_if(pairs, [](const DialoguePair& p) { return is_validation_id(p.id); });
  }
  Vocabulary vocab = build_vocab(pairs, cfg.train.vocab_max_size, cfg.train.vocab_min_count);
  vocab.save(*f.out);
  json j = {{"vocab_size", vocab.size()}, {"training_pairs", pairs.size()}};
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int cmd_build_ec(const Flags& f) {
  RunConfig cfg = load_config(f, true);
  const fs::path out = f.out ? fs::path(*f.out) : require_path(cfg, "ec_file", false);
  std::vector<DialoguePair> pairs = load_pairs(cfg);
  std::unique_ptr<KnowledgeSource> kb = load_knowledge(cfg);
  EmbeddingTable embeddings = load_configured_embeddings(cfg);
  StopwordList stopwords = StopwordList::load(require_path(cfg, "stopwords"));
  PrecomputedEc ec =
      precompute_ec(pairs, *kb, embeddings, stopwords, cfg.scale_ec, cfg.train.seed);
  write_ec_file(out, ec.records);
  spdlog::info("wrote {} ec records to {} ({} zero)", ec.records.size(), out.string(),
               ec.zero_vectors);
  json j = ec.diagnostics ? diagnostics_json(*ec.diagnostics)
                          : json{{"n_vectors", ec.records.size()}};
  j["zero_vectors"] = ec.zero_vectors;
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int cmd_train(const Flags& f) {
  RunConfig cfg = load_config(f, true);
  if (f.out) cfg.checkpoint_dir = *f.out;
  const fs::path dir = require_path(cfg, "checkpoint_dir", false);
  fs::create_directories(dir);

  std::vector<DialoguePair> pairs = load_pairs(cfg);
  attach_configured_ec(cfg, pairs, cfg.train.model.mode);
  TrainConfig tc = cfg.train;
  tc.checkpoint_dir = dir;
  Trainer trainer(pairs, tc);
  spdlog::info("mode {}: {} training, {} validation pairs, vocabulary {}",
               to_string(tc.model.mode), trainer.train_examples().size(),
               trainer.validation_examples().size(), trainer.model_config().vocab_size);
  for (std::size_t e = 0; e < tc.epochs; ++e) {
    trainer.run_epoch();
    const EpochRecord& r = trainer.log().epochs.back();
    spdlog::info("epoch {}: train L1 {:.4f} total {:.4f} val ppl {:.4f} bleu4 {:.4f}", r.epoch,
                 r.train_l1, r.train_total, r.val_ppl, r.val_bleu4);
  }
  trainer.log().save(dir / "steps.csv", dir / "epochs.csv");

  json j = json::object();
  j["epochs"] = trainer.checkpoint().epochs_completed;
  j["steps"] = trainer.checkpoint().opt.step;
  j["checkpoint_dir"] = dir.string();
  if (!trainer.log().epochs.empty()) {
    const EpochRecord& last = trainer.log().epochs.back();
    j["train_l1"] = last.train_l1;
    j["val_ppl"] = last.val_ppl;  // NaN is written as null
    j["val_bleu4"] = last.val_bleu4;
  }
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int cmd_eval(const Flags& f) {
  if (f.inputs.empty()) throw UsageError("eval needs at least one checkpoint");
  // Checkpoints first so a bad path is reported before anything else runs.
  std::vector<Checkpoint> ckpts;
  for (const auto& path : f.inputs) ckpts.push_back(load_checkpoint(path));

  RunConfig cfg = load_config(f, true);
  std::vector<DialoguePair> pairs = load_pairs(cfg);
  if (cfg.train.validation_split) {
    std::erase_if(pairs, [](const DialoguePair& p) { return !is_validation_id(p.id); });
  }
  bool needs_ec = false;
  for (const auto& c : ckpts) needs_ec = needs_ec || c.config.mode != Mode::kVanilla;
  attach_configured_ec(cfg, pairs, needs_ec ? Mode::kExtEd : Mode::kVanilla);

  std::vector<ReportEntry> entries;
  for (const auto& c : ckpts) {
    const EvalEcMode ec_mode =
        f.ec_mode ? parse_eval_ec_mode(*f.ec_mode) : c.config.eval_ec_mode;
    entries.push_back({std::string(to_string(c.config.mode)), &c.params, c.config, &c.vocab,
                       ec_mode});
    if (c.config.mode != Mode::kVanilla) {
      entries.push_back({std::string(to_string(c.config.mode)) + "_ablation", &c.params,
                         c.config, &c.vocab, EvalEcMode::kZero});
    }
  }
  spdlog::info("evaluating {} rows on {} pairs", entries.size(), pairs.size());
  std::vector<ReportRow> rows = evaluate_report(entries, pairs, cfg.train.max_len, cfg.workers);
  std::ostringstream csv;
  write_report_csv(csv, rows);
  emit(f, csv.str());
  return kExitOk;
}

int cmd_generate(const Flags& f) {
  if (f.inputs.size() != 1) throw UsageError("generate needs exactly one checkpoint");
  if (f.repl == f.context.has_value()) throw UsageError("generate needs --context or --repl");
  const Checkpoint ckpt = load_checkpoint(f.inputs.front());
  const EvalEcMode ec_mode = f.ec_mode ? parse_eval_ec_mode(*f.ec_mode) : ckpt.config.eval_ec_mode;
  const std::size_t max_len = f.max_len.value_or(TrainConfig{}.max_len);

  // Oracle ec is computed from the knowledge resources named in the config.
  RunConfig cfg;
  std::unique_ptr<KnowledgeSource> kb;
  EmbeddingTable embeddings;
  StopwordList stopwords;
  const bool oracle = ec_mode == EvalEcMode::kOracle && ckpt.config.mode != Mode::kVanilla;
  if (oracle) {
    cfg = load_config(f, true);
    kb = load_knowledge(cfg);
    embeddings = load_configured_embeddings(cfg);
    stopwords = StopwordList::load(require_path(cfg, "stopwords"));
  }

  auto respond = [&](const std::string& line) {
    const Tokens context = tokenize(line);
    std::optional<std::vector<double>> ec;
    if (oracle) {
      ExternalContextVector v = external_context_vector(context, *kb, embeddings, stopwords);
      if (cfg.scale_ec) {
        Rng rng(cfg.train.seed);
        v = scale_external_context(v, rng);
      }
      spdlog::debug("context ec from {} knowledge tokens", v.n_ext_tokens);
      ec = std::move(v.values);
    }
    std::optional<std::span<const double>> ec_span;
    if (ec) ec_span = std::span<const double>(*ec);
    const std::vector<TokenId> ids =
        generate(ckpt.params, ckpt.vocab.encode(context), max_len, ckpt.config, ec_mode, ec_span);
    std::cout << detokenize(ckpt.vocab.decode(ids)) << '\n' << std::flush;
  };

  if (f.context) {
    respond(*f.context);
    return kExitOk;
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    respond(line);
  }
  return kExitOk;
}

int cmd_kb_stats(const Flags& f) {
  if (f.inputs.size() != 1) throw UsageError("kb-stats needs exactly one ec file");
  std::vector<EcRecord> records = read_ec_file(f.inputs.front());
  std::vector<ExternalContextVector> vectors;
  vectors.reserve(records.size());
  for (auto& r : records) vectors.push_back(std::move(r.ec));
  emit(f, diagnostics_json(knowledge_diagnostics(vectors)).dump() + "\n");
  return kExitOk;
}

int cmd_gradcheck(const Flags& f) {
  const std::uint64_t seed = f.seed.value_or(0);
  std::vector<Mode> modes = {Mode::kVanilla, Mode::kExtEd, Mode::kExtEdMinusL3};
  if (f.mode) modes = {parse_mode(*f.mode)};
  json results = json::array();
  bool passed = true;
  for (Mode m : modes) {
    const GradCheckInstance inst = random_gradcheck_instance(seed, m);
    const GradCheckResult r = check_gradients(inst);
    spdlog::info("gradcheck {} V={} E={} H={} D={}: max rel error {:.3e}", to_string(m),
                 inst.config.vocab_size, inst.config.embed_dim, inst.config.hidden_size,
                 inst.config.slot_dim(), r.max_rel_error);
    for (const auto& t : r.tensors) {
      spdlog::debug("  {} {:.3e}", t.name, t.max_rel_error);
    }
    results.push_back({{"mode", std::string(to_string(m))},
                       {"max_rel_error", r.max_rel_error},
                       {"passed", r.passed}});
    passed = passed && r.passed;
  }
  json j = {{"seed", seed}, {"passed", passed}, {"results", results}};
  emit(f, j.dump() + "\n");
  return passed ? kExitOk : kExitVerify;
}

bool configure_logging() {
  auto logger = spdlog::stderr_logger_st("exted");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("EXTED_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    std::cerr << "EXTED_LOG must be error, info or debug, got '" << level << "'\n";
    return false;
  }
  return true;
}

int run(int argc, char** argv) {
  if (!configure_logging()) return kExitUsage;

  CLI::App app{"Knowledge-grounded dialogue model: preprocessing, training and evaluation"};
  app.require_subcommand(1);
  Flags f;

  auto add_config = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--config", f.config, "JSON run configuration");
    if (required) opt->required();
  };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", f.seed, "random seed"); };
  auto add_out = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("--out", f.out, what);
  };
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", f.mode, "vanilla | ext_ed | ext_ed_minus_L3")
        ->check(CLI::IsMember({"vanilla", "ext_ed", "ext_ed_minus_L3"}));
  };
  auto add_ec_mode = [&](CLI::App* sub) {
    sub->add_option("--ec-mode", f.ec_mode, "predicted | oracle | zero")
        ->check(CLI::IsMember({"predicted", "oracle", "zero"}));
  };
  auto add_kb = [&](CLI::App* sub) {
    sub->add_option("--kb", f.kb, "wiki | nell")->check(CLI::IsMember({"wiki", "nell"}));
  };

  auto* build_vocab_cmd = app.add_subcommand("build-vocab", "corpus to vocabulary file");
  add_config(build_vocab_cmd, true);
  add_out(build_vocab_cmd, "vocabulary file to write");

  auto* build_ec_cmd = app.add_subcommand("build-ec", "corpus and knowledge base to ec file");
  add_config(build_ec_cmd, true);
  add_out(build_ec_cmd, "ec file to write (default: ec_file from the config)");
  add_seed(build_ec_cmd);
  add_kb(build_ec_cmd);

  auto* train_cmd = app.add_subcommand("train", "train and write checkpoints and logs");
  add_config(train_cmd, true);
  add_out(train_cmd, "output directory (default: checkpoint_dir from the config)");
  add_seed(train_cmd);
  add_mode(train_cmd);
  train_cmd->add_option("--epochs", f.epochs, "number of epochs");

  auto* eval_cmd = app.add_subcommand("eval", "checkpoints to report CSV");
  add_config(eval_cmd, true);
  add_out(eval_cmd, "CSV file to write (default: stdout)");
  add_ec_mode(eval_cmd);
  eval_cmd->add_option("--max-len", f.max_len, "greedy decoding limit");
  eval_cmd->add_option("checkpoints", f.inputs, "checkpoint files")->required();

  auto* generate_cmd = app.add_subcommand("generate", "respond to a context");
  add_config(generate_cmd, false);
  add_ec_mode(generate_cmd);
  add_seed(generate_cmd);
  add_kb(generate_cmd);
  generate_cmd->add_option("--max-len", f.max_len, "greedy decoding limit");
  generate_cmd->add_option("--context", f.context, "context text");
  generate_cmd->add_flag("--repl", f.repl, "read contexts from stdin, one per line");
  generate_cmd->add_option("checkpoint", f.inputs, "checkpoint file")->required();

  auto* kb_stats_cmd = app.add_subcommand("kb-stats", "ec file to diagnostics JSON");
  add_out(kb_stats_cmd, "JSON file to write (default: stdout)");
  kb_stats_cmd->add_option("ec_file", f.inputs, "ec file")->required();

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_seed(gradcheck_cmd);
  add_mode(gradcheck_cmd);
  add_out(gradcheck_cmd, "JSON file to write (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (build_vocab_cmd->parsed()) return cmd_build_vocab(f);
    if (build_ec_cmd->parsed()) return cmd_build_ec(f);
    if (train_cmd->parsed()) return cmd_train(f);
    if (eval_cmd->parsed()) return cmd_eval(f);
    if (generate_cmd->parsed()) return cmd_generate(f);
    if (kb_stats_cmd->parsed()) return cmd_kb_stats(f);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(f);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace exted

int main(int argc, char** argv) { return exted::run(argc, argv); }
