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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "exted/bleu.hpp"
#include "exted/checkpoint.hpp"
#include "exted/gradcheck.hpp"
#include "exted/knowledge.hpp"
#include "exted/trainer.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

namespace exted {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;  // extra lines printed under the verdict
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string steps_csv(const MetricsLog& log) {
  std::ostringstream out;
  log.write_steps_csv(out);
  log.write_epochs_csv(out);
  return out.str();
}

// 1 -------------------------------------------------------------------------

Outcome gradient_fidelity() {
  Outcome o;
  double worst = 0.0;
  int failed = 0, total = 0;
  for (Mode mode : {Mode::kVanilla, Mode::kExtEd, Mode::kExtEdMinusL3}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      GradCheckResult r = check_gradients(random_gradcheck_instance(seed, mode), 1e-5, 1e-4);
      worst = std::max(worst, r.max_rel_error);
      failed += r.passed ? 0 : 1;
      ++total;
    }
  }
  o.pass = failed == 0;
  o.detail = std::to_string(total) + " configs over 3 modes, max rel err " +
             fmt("%.2e", worst) + ", " + std::to_string(failed) + " failed";
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome oracle_equivalence() {
  Outcome o;
  Rng rng(2024);
  int mismatches = 0, nonzero = 0;
  for (int trial = 0; trial < 200; ++trial) {
    testing::SyntheticKb kb = testing::random_kb(rng, 1 + rng.below(8), 20);
    const NellSource src = kb.to_nell();
    const EmbeddingTable emb = kb.to_table();
    const StopwordList stop = kb.to_stopwords();
    const auto ctx = testing::random_context(rng, 20);
    const ExternalContextVector ec = external_context_vector(ctx, src, emb, stop);
    const testing::OracleEc ref = testing::oracle_external_context(ctx, kb);
    if (ec.values != ref.values || ec.n_ext_tokens != ref.n) ++mismatches;
    nonzero += ref.n > 0 ? 1 : 0;
  }
  o.pass = mismatches == 0;
  o.detail = "200 contexts (" + std::to_string(nonzero) + " with knowledge hits), " +
             std::to_string(mismatches) + " bitwise mismatches";
  return o;
}

// 3 -------------------------------------------------------------------------

// 32 pairs over 56 regular words (60 with the reserved ids); every word
// appears in some response. A small random KB keys off the first context
// word.
std::vector<DialoguePair> toy_corpus() {
  const std::size_t dim = 8;
  Rng rng(1);
  testing::SyntheticKb kb = testing::random_kb(rng, dim, 0);
  std::vector<std::string> words;
  for (int i = 0; i < 56; ++i) words.push_back("w" + std::to_string(i));
  for (const auto& w : words) {
    std::vector<double> v(dim);
    for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
    kb.embeddings[w] = v;
  }
  std::vector<DialoguePair> pairs(32);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    DialoguePair& p = pairs[i];
    p.id = "t" + std::to_string(i);
    for (std::size_t k = 0, n = 3 + rng.below(3); k < n; ++k) p.context.push_back(words[rng.below(56)]);
    p.response.push_back(words[i]);
    if (i + 32 < 56) p.response.push_back(words[i + 32]);
    for (std::size_t k = 0, n = 1 + rng.below(3); k < n; ++k) p.response.push_back(words[rng.below(56)]);
    kb.entries[p.context[0]].push_back(words[rng.below(56)]);
  }
  PrecomputedEc ec =
      precompute_ec(pairs, kb.to_nell(), kb.to_table(), kb.to_stopwords(), false, 1);
  attach_ec(pairs, ec.records);
  return pairs;
}

Outcome overfit() {
  Outcome o;
  const std::vector<DialoguePair> pairs = toy_corpus();
  TrainConfig tc;
  tc.model.mode = Mode::kExtEd;
  tc.model.embed_dim = 16;
  tc.model.hidden_size = 32;
  tc.model.ec_dim = 8;
  tc.adam.lr = 0.005;
  tc.seed = 1;
  tc.validation_split = false;
  tc.vocab_min_count = 1;

  auto run = [&](std::size_t* first_below) {
    Trainer t(pairs, tc);
    double ppl = 0.0;
    for (std::size_t e = 1; e <= 200; ++e) {
      t.run_epoch();
      const Checkpoint& ck = t.checkpoint();
      ppl = perplexity(ck.params, ck.config, t.train_examples(), EvalEcMode::kPredicted);
      if (first_below != nullptr && *first_below == 0 && ppl < 1.3) *first_below = e;
    }
    return std::make_pair(ppl, steps_csv(t.log()) + serialize_checkpoint(t.checkpoint()));
  };
  std::size_t first = 0;
  const auto [ppl, bytes] = run(&first);
  const auto again = run(nullptr);
  Trainer probe(pairs, tc);
  const bool deterministic = again.second == bytes;
  o.pass = ppl < 1.3 && deterministic && probe.model_config().vocab_size == 60;
  o.detail = "V=" + std::to_string(probe.model_config().vocab_size) +
             ", training ppl after 200 epochs " + fmt("%.4f", ppl) + " (first < 1.3 at epoch " +
             std::to_string(first) + "), rerun " + (deterministic ? "identical" : "DIFFERS");
  return o;
}

// 4, 5 ----------------------------------------------------------------------

TrainConfig synthetic_config(Mode mode, EcFeed feed, EvalEcMode eval, std::uint64_t seed) {
  TrainConfig tc;
  tc.model.mode = mode;
  tc.model.embed_dim = 16;
  tc.model.hidden_size = 32;
  tc.model.ec_dim = 16;
  tc.model.train_ec_feed = feed;
  tc.model.eval_ec_mode = eval;
  tc.adam.lr = 0.005;
  tc.epochs = 10;
  tc.seed = seed;
  tc.vocab_min_count = 2;
  tc.validation_bleu = false;
  return tc;
}

struct TableRun {
  double ext_oracle = 0.0, ext_zero = 0.0, vanilla = 0.0, minus_l3 = 0.0;
  double ext_bleu = 0.0, vanilla_bleu = 0.0;
};

TableRun table_run() {
  testing::SyntheticCorpus c = testing::make_synthetic_corpus(600, 8, 16, 1);
  testing::attach_synthetic_ec(c, false, 2);
  TableRun r;
  auto held_out = [](const Trainer& t, EvalEcMode m) {
    const Checkpoint& ck = t.checkpoint();
    return perplexity(ck.params, ck.config, t.validation_examples(), m);
  };
  auto bleu = [](const Trainer& t, EvalEcMode m) {
    const Checkpoint& ck = t.checkpoint();
    return corpus_bleu4(ck.params, ck.config, t.validation_examples(), m, 30);
  };

  Trainer ext(c.pairs, synthetic_config(Mode::kExtEd, EcFeed::kTrue, EvalEcMode::kOracle, 3));
  ext.run(10);
  r.ext_oracle = held_out(ext, EvalEcMode::kOracle);
  r.ext_zero = held_out(ext, EvalEcMode::kZero);
  r.ext_bleu = bleu(ext, EvalEcMode::kOracle);

  Trainer van(c.pairs,
              synthetic_config(Mode::kVanilla, EcFeed::kPredicted, EvalEcMode::kPredicted, 3));
  van.run(10);
  r.vanilla = held_out(van, EvalEcMode::kPredicted);
  r.vanilla_bleu = bleu(van, EvalEcMode::kPredicted);

  Trainer minus(c.pairs, synthetic_config(Mode::kExtEdMinusL3, EcFeed::kPredicted,
                                          EvalEcMode::kPredicted, 3));
  minus.run(10);
  r.minus_l3 = held_out(minus, EvalEcMode::kPredicted);
  return r;
}

Outcome table_direction(const TableRun& r) {
  Outcome o;
  o.pass = r.ext_oracle < r.vanilla && r.ext_zero > 3.0 * r.ext_oracle;
  o.detail = "held-out ppl ext_ed(oracle ec) " + fmt("%.4f", r.ext_oracle) + " < vanilla " +
             fmt("%.4f", r.vanilla) + "; ext_ed(ec=0) " + fmt("%.2f", r.ext_zero) + " vs 3x " +
             fmt("%.4f", 3.0 * r.ext_oracle);
  o.info.push_back("bleu4 ext_ed " + fmt("%.4f", r.ext_bleu) + ", vanilla " +
                   fmt("%.4f", r.vanilla_bleu));
  return o;
}

Outcome minus_l3_neutrality(const TableRun& r) {
  Outcome o;
  const double rel = std::abs(r.minus_l3 - r.vanilla) / r.vanilla;
  o.pass = rel < 0.15;
  o.detail = "ppl ext_ed_minus_L3 " + fmt("%.4f", r.minus_l3) + " vs vanilla " +
             fmt("%.4f", r.vanilla) + ", relative gap " + fmt("%.4f", rel) + " < 0.15";
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome convergence_speed() {
  Outcome o;
  const std::size_t epochs = 10;
  const double budget = 0.8 * static_cast<double>(epochs);
  std::vector<double> reached;
  std::string per_seed, total_view;
  for (std::uint64_t seed : {11, 12, 13}) {
    testing::SyntheticCorpus c = testing::make_synthetic_corpus(600, 8, 16, seed);
    testing::attach_synthetic_ec(c, true, seed + 100);
    Trainer van(c.pairs, synthetic_config(Mode::kVanilla, EcFeed::kPredicted,
                                          EvalEcMode::kPredicted, seed));
    van.run(epochs);
    Trainer ext(c.pairs,
                synthetic_config(Mode::kExtEd, EcFeed::kTrue, EvalEcMode::kOracle, seed));
    ext.run(epochs);

    const double tau = van.log().epochs.back().train_l1;
    double hit = std::numeric_limits<double>::infinity();
    for (const auto& e : ext.log().epochs) {
      if (e.train_l1 <= tau) {
        hit = static_cast<double>(e.epoch);
        break;
      }
    }
    reached.push_back(hit);
    per_seed += (per_seed.empty() ? "" : ", ") + fmt("%.0f", hit);

    double best_total = std::numeric_limits<double>::infinity();
    for (const auto& e : ext.log().epochs) best_total = std::min(best_total, e.train_total);
    total_view += (total_view.empty() ? "" : "; ") + std::string("vanilla ") +
                  fmt("%.3f", van.log().epochs.back().train_total) + " vs ext_ed best " +
                  fmt("%.3f", best_total);
  }
  std::sort(reached.begin(), reached.end());
  const double median = reached[1];
  o.pass = median <= budget;
  o.detail = "sequence loss: epochs to reach vanilla's epoch-10 level per seed {" + per_seed +
             "}, median " + fmt("%.0f", median) + " <= " + fmt("%.0f", budget);
  o.info.push_back("total loss (different objectives per mode, not used for the verdict): " +
                   total_view);
  return o;
}

// 7 -------------------------------------------------------------------------

Outcome diagnostics() {
  Outcome o;
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> vs(2 + rng.below(40), std::vector<double>(1 + rng.below(10)));
    for (auto& v : vs) {
      for (double& x : v) x = 10.0 * rng.uniform() - 5.0;
    }
    const DiagnosticsReport r = knowledge_diagnostics(std::span<const std::vector<double>>(vs));
    const testing::OracleDiagnostics ref = testing::oracle_diagnostics(vs);
    worst = std::max({worst, std::abs(r.mean_distance - ref.mean_distance),
                      std::abs(r.distance_variance - ref.distance_variance)});
  }
  const std::vector<std::vector<double>> pair{{0.0, 0.0}, {2.0, 0.0}};
  const DiagnosticsReport fixed = knowledge_diagnostics(std::span<const std::vector<double>>(pair));
  const bool exact = fixed.mean_distance == 1.0 && fixed.distance_variance == 0.0;
  o.pass = worst <= 1e-9 && exact;
  o.detail = "100 random sets, max abs diff " + fmt("%.2e", worst) + "; {(0,0),(2,0)} -> mean " +
             fmt("%g", fixed.mean_distance) + ", variance " + fmt("%g", fixed.distance_variance);
  return o;
}

// 8 -------------------------------------------------------------------------

Outcome scaling_statistics() {
  Outcome o;
  Rng rng(8);
  const int n = 100000;
  std::vector<double> s(n);
  bool positive = true;
  double sum = 0.0;
  for (double& x : s) {
    x = draw_scale_factor(rng);
    positive = positive && x > 0.0;
    sum += x;
  }
  const double mean = sum / n;
  double sq = 0.0;
  for (double x : s) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / (n - 1));
  o.pass = std::abs(mean - 4.0) <= 0.02 && std::abs(sd - 1.0) <= 0.02 && positive;
  o.detail = "1e5 draws: mean " + fmt("%.4f", mean) + ", std " + fmt("%.4f", sd) +
             (positive ? ", all > 0" : ", NON-POSITIVE DRAW");
  return o;
}

// 9 -------------------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  testing::SyntheticCorpus c = testing::make_synthetic_corpus(120, 4, 6, 9);
  const auto dir = testing::temp_path("acceptance_determinism");
  std::filesystem::create_directories(dir);
  write_ec_file(dir / "a.jsonl",
                precompute_ec(c.pairs, c.kb, c.embeddings, c.stopwords, true, 5).records);
  write_ec_file(dir / "b.jsonl",
                precompute_ec(c.pairs, c.kb, c.embeddings, c.stopwords, true, 5).records);
  const bool ec_same = read_bytes(dir / "a.jsonl") == read_bytes(dir / "b.jsonl");
  attach_ec(c.pairs, read_ec_file(dir / "a.jsonl"));

  TrainConfig tc = synthetic_config(Mode::kExtEd, EcFeed::kPredicted, EvalEcMode::kPredicted, 4);
  tc.model.ec_dim = 6;
  tc.model.embed_dim = 8;
  tc.model.hidden_size = 12;
  tc.validation_bleu = true;
  tc.max_len = 10;

  const TrainResult a = [&] {
    TrainConfig t = tc;
    t.epochs = 4;
    return train(c.pairs, t);
  }();
  const TrainResult b = [&] {
    TrainConfig t = tc;
    t.epochs = 4;
    return train(c.pairs, t);
  }();
  const bool log_same = steps_csv(a.log) == steps_csv(b.log);

  Trainer first(c.pairs, tc);
  first.run(2);
  save_checkpoint(first.checkpoint(), dir / "mid.xed");
  Trainer resumed(c.pairs, tc, load_checkpoint(dir / "mid.xed"));
  resumed.run(2);
  const auto& full = a.log.steps;
  const auto& tail = resumed.log().steps;
  const bool resume_same =
      serialize_checkpoint(resumed.checkpoint()) == serialize_checkpoint(a.checkpoint) &&
      tail.size() * 2 == full.size() &&
      std::equal(tail.begin(), tail.end(), full.begin() + static_cast<long>(tail.size()));

  o.pass = ec_same && log_same && resume_same;
  o.detail = std::string("ec files ") + (ec_same ? "identical" : "DIFFER") + ", metrics logs " +
             (log_same ? "identical" : "DIFFER") + ", resume after 2 of 4 epochs " +
             (resume_same ? "bitwise identical" : "DIVERGES");
  return o;
}

// 10 ------------------------------------------------------------------------

Outcome bleu_fixture() {
  Outcome o;
  const Tokens hyp{"a", "b", "c", "d"}, ref{"a", "b", "c", "e"};
  const double got = bleu4(hyp, ref);
  const double formula = std::pow(0.75 * (3.0 / 4.0) * (2.0 / 3.0) * 0.5, 0.25);
  const Tokens same{"we", "like", "the", "red", "car"};
  const double identity = bleu4(same, same);
  o.pass = std::abs(got - formula) <= 1e-15 && std::abs(got - 0.6580) < 5e-5 && identity == 1.0;
  o.detail = "hand example " + fmt("%.6f", got) + " (formula " + fmt("%.6f", formula) +
             "), identity " + fmt("%.1f", identity);
  return o;
}

}  // namespace
}  // namespace exted

int main() {
  using namespace exted;
  using Clock = std::chrono::steady_clock;
  struct Criterion {
    int number;
    const char* name;
    double budget_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  TableRun table;
  bool table_done = false;
  auto ensure_table = [&] {
    if (!table_done) table = table_run();
    table_done = true;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient fidelity", 120, gradient_fidelity},
      {2, "external context oracle equivalence", 0, oracle_equivalence},
      {3, "overfit toy corpus", 300, overfit},
      {4, "ablation ordering on synthetic corpus", 900,
       [&] {
         ensure_table();
         return table_direction(table);
       }},
      {5, "minus-L3 neutrality", 0,
       [&] {
         ensure_table();
         return minus_l3_neutrality(table);
       }},
      {6, "convergence speed with scaled ec", 0, convergence_speed},
      {7, "diagnostics correctness", 0, diagnostics},
      {8, "scale factor statistics", 0, scaling_statistics},
      {9, "determinism and persistence", 0, determinism},
      {10, "bleu-4 fixture", 0, bleu_fixture},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + std::to_string(static_cast<int>(c.budget_s)) + "s budget";
    }
    std::printf("%s  %2d  %-40s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.number, c.name,
                o.detail.c_str(), secs);
    for (const auto& line : o.info) std::printf("          %s\n", line.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
