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

#ifndef EXTED_EVALUATION_HPP_
#define EXTED_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "exted/corpus.hpp"
#include "exted/model.hpp"
#include "exted/vocab.hpp"

namespace exted {

// A dialogue pair mapped onto one vocabulary.
struct Example {
  std::string id;
  EncodedPair ids;
  std::optional<std::vector<double>> ec;

  std::optional<std::span<const double>> ec_span() const {
    if (!ec) return std::nullopt;
    return std::span<const double>(*ec);
  }
};

std::vector<Example> encode_corpus(std::span<const DialoguePair> pairs, const Vocabulary& vocab);

// exp(total NLL / total tokens) over response tokens plus one EOS each,
// teacher-forced. Per-example sums are combined in id order, so the value
// does not depend on corpus order or on `workers`.
double perplexity(const ExtEdParams& p, const ModelConfig& cfg, std::span<const Example> corpus,
                  EvalEcMode ec_mode, std::size_t workers = 1);

// Mean sentence BLEU-4 of greedy generations against the responses.
double corpus_bleu4(const ExtEdParams& p, const ModelConfig& cfg,
                    std::span<const Example> corpus, EvalEcMode ec_mode, std::size_t max_len,
                    std::size_t workers = 1);

struct StepRecord {
  std::uint64_t step = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double total = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct EpochRecord {
  std::uint64_t epoch = 0;
  double val_ppl = 0.0;    // NaN without a validation split
  double val_bleu4 = 0.0;  // NaN without a validation split
  // In-memory only (not part of the CSV): training means over the epoch.
  double train_l1 = 0.0;
  double train_total = 0.0;
};

struct MetricsLog {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;

  // "step,L1,L2,L3,total"
  void write_steps_csv(std::ostream& out) const;
  // "epoch,val_ppl,val_bleu4"
  void write_epochs_csv(std::ostream& out) const;
  void save(const std::filesystem::path& steps_csv, const std::filesystem::path& epochs_csv) const;
};

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

struct ReportEntry {
  std::string label;
  const ExtEdParams* params = nullptr;
  ModelConfig config;
  const Vocabulary* vocab = nullptr;
  EvalEcMode ec_mode = EvalEcMode::kPredicted;
};

struct ReportRow {
  std::string mode;
  double ppl = 0.0;
  double bleu4 = 0.0;
};

// One row per entry, in entry order. Throws InputError when an oracle row
// meets a pair without an external context vector.
std::vector<ReportRow> evaluate_report(std::span<const ReportEntry> entries,
                                       std::span<const DialoguePair> corpus,
                                       std::size_t max_len, std::size_t workers = 1);

// "mode,ppl,bleu4"
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);

}  // namespace exted

#endif  // EXTED_EVALUATION_HPP_
