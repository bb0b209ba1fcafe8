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

#include "exted/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <thread>

#include "exted/bleu.hpp"
#include "exted/errors.hpp"

namespace exted {

std::vector<Example> encode_corpus(std::span<const DialoguePair> pairs, const Vocabulary& vocab) {
  std::vector<Example> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    Example ex;
    ex.id = pair.id;
    ex.ids.context = vocab.encode(pair.context);
    ex.ids.response = vocab.encode(pair.response);
    if (pair.ec) ex.ec = pair.ec->values;
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

// Runs fn(i) for every i in [0, n) across up to `workers` threads. Results
// must be written to per-index slots by fn; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::size_t> id_order(std::span<const Example> corpus) {
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return corpus[a].id < corpus[b].id; });
  return order;
}

void require_oracle_ec(std::span<const Example> corpus, EvalEcMode mode, const ModelConfig& cfg) {
  if (mode != EvalEcMode::kOracle || cfg.mode == Mode::kVanilla) return;
  for (const auto& ex : corpus) {
    if (!ex.ec) throw InputError("oracle ec requested but pair '" + ex.id + "' has none");
  }
}

}  // namespace

double perplexity(const ExtEdParams& p, const ModelConfig& cfg, std::span<const Example> corpus,
                  EvalEcMode ec_mode, std::size_t workers) {
  if (corpus.empty()) throw InputError("perplexity: empty corpus");
  require_oracle_ec(corpus, ec_mode, cfg);
  std::vector<SequenceScore> scores(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    scores[i] = score_response(p, corpus[i].ids, corpus[i].ec_span(), ec_mode, cfg);
  });
  double nll = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i : id_order(corpus)) {
    nll += scores[i].nll;
    tokens += scores[i].tokens;
  }
  return std::exp(nll / static_cast<double>(tokens));
}

double corpus_bleu4(const ExtEdParams& p, const ModelConfig& cfg,
                    std::span<const Example> corpus, EvalEcMode ec_mode, std::size_t max_len,
                    std::size_t workers) {
  if (corpus.empty()) throw InputError("corpus_bleu4: empty corpus");
  require_oracle_ec(corpus, ec_mode, cfg);
  std::vector<double> scores(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    const auto hyp = generate(p, corpus[i].ids.context, max_len, cfg, ec_mode,
                              corpus[i].ec_span());
    scores[i] = bleu4(hyp, corpus[i].ids.response);
  });
  double sum = 0.0;
  for (std::size_t i : id_order(corpus)) sum += scores[i];
  return sum / static_cast<double>(corpus.size());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void MetricsLog::write_steps_csv(std::ostream& out) const {
  out << "step,L1,L2,L3,total\n";
  for (const auto& r : steps) {
    out << r.step << ',' << format_double(r.l1) << ',' << format_double(r.l2) << ','
        << format_double(r.l3) << ',' << format_double(r.total) << '\n';
  }
}

void MetricsLog::write_epochs_csv(std::ostream& out) const {
  out << "epoch,val_ppl,val_bleu4\n";
  for (const auto& r : epochs) {
    out << r.epoch << ',' << format_double(r.val_ppl) << ',' << format_double(r.val_bleu4)
        << '\n';
  }
}

void MetricsLog::save(const std::filesystem::path& steps_csv,
                      const std::filesystem::path& epochs_csv) const {
  std::ofstream s(steps_csv, std::ios::binary);
  if (!s) throw IoError("cannot write " + steps_csv.string());
  write_steps_csv(s);
  std::ofstream e(epochs_csv, std::ios::binary);
  if (!e) throw IoError("cannot write " + epochs_csv.string());
  write_epochs_csv(e);
  if (!s || !e) throw IoError("failed writing metrics logs");
}

std::vector<ReportRow> evaluate_report(std::span<const ReportEntry> entries,
                                       std::span<const DialoguePair> corpus,
                                       std::size_t max_len, std::size_t workers) {
  std::vector<ReportRow> rows;
  for (const auto& entry : entries) {
    if (entry.params == nullptr || entry.vocab == nullptr) {
      throw ContractError("evaluate_report: entry '" + entry.label + "' has no model");
    }
    const std::vector<Example> examples = encode_corpus(corpus, *entry.vocab);
    ReportRow row;
    row.mode = entry.label;
    row.ppl = perplexity(*entry.params, entry.config, examples, entry.ec_mode, workers);
    row.bleu4 = corpus_bleu4(*entry.params, entry.config, examples, entry.ec_mode, max_len,
                             workers);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << "mode,ppl,bleu4\n";
  for (const auto& r : rows) {
    out << r.mode << ',' << format_double(r.ppl) << ',' << format_double(r.bleu4) << '\n';
  }
}

}  // namespace exted
