// Copyright 2026 The phrasereg Authors.
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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when a hard criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>
#include <json.hpp>

#include "oracles/dense_solver.hpp"
#include "oracles/phrase_design.hpp"
#include "phrasereg/corpus.hpp"
#include "phrasereg/objective.hpp"
#include "phrasereg/search.hpp"
#include "phrasereg/tuning.hpp"
#include "search_support.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace phrasereg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Traces of every fit run by criteria 2 to 7.
std::vector<std::vector<double>> g_traces;

ModelState traced_fit(const Corpus& corpus, const Labeling& labels,
                      const BanList& ban, const FitConfig& config) {
  ModelState m = fit(corpus, labels, ban, config);
  std::vector<double> losses;
  for (const TraceEntry& t : m.trace) losses.push_back(t.loss);
  g_traces.push_back(std::move(losses));
  return m;
}

FitConfig tight(double C) {
  FitConfig config;
  config.penalty.C = C;
  config.search.convergence_threshold = 1e-15;
  config.search.max_iter = 2000;
  return config;
}

// 1. Table of cut-offs for pruning perfect predictors.
Outcome table_cutoffs() {
  struct Cell {
    double q;  // 0 stands for infinity
    double mu;
    int r;
    double printed;
    double tolerance;  // 0 for exact cells
  };
  const double s2 = std::sqrt(2.0);
  const std::vector<Cell> cells = {
      {0, -1, 1, 4, 0},        {0, -1, 2, 8, 0},         {0, -1, 4, 16, 0},
      {0, 0, 1, 2, 0},         {0, 0, 2, 4, 0},          {0, 0, 4, 8, 0},
      {4, -1, 1, 4, 0},        {4, -1, 2, 6.7, 0.1},     {4, -1, 4, 11.3, 0.1},
      {4, 0, 1, 2, 0},         {4, 0, 2, 3.4, 0.1},      {4, 0, 4, 5.6, 0.1},
      {2, -1, 1, 4, 0},        {2, -1, 2, 4 * s2, 0},    {2, -1, 4, 8, 0},
      {2, 0, 1, 2, 0},         {2, 0, 2, s2, 0},         {2, 0, 4, 4, 0},
      {4. / 3, -1, 1, 4, 0},   {4. / 3, -1, 2, 4.75, 0.01},
      {4. / 3, -1, 4, 5.7, 0.1},
      {4. / 3, 0, 1, 2, 0},    {4. / 3, 0, 2, 2.4, 0.1}, {4. / 3, 0, 4, 2.8, 0.1},
      {1, -1, 1, 4, 0},        {1, -1, 2, 4, 0},         {1, -1, 4, 4, 0},
      {1, 0, 1, 2, 0},         {1, 0, 2, 2, 0},          {1, 0, 4, 2, 0},
  };
  int ok = 0;
  std::string notes;
  for (const Cell& c : cells) {
    const NormOrder q = c.q == 0 ? NormOrder::infinity() : NormOrder::finite(c.q);
    const double got = perfect_predictor_threshold(c.r, c.mu, q);
    // The printed sqrt(2) in the (q=2, mu=0, r=2) cell disagrees with the
    // row formula 2 sqrt(r) = 2 sqrt(2); the formula value is asserted.
    const bool typo = c.q == 2 && c.mu == 0 && c.r == 2;
    const double want = typo ? 2 * s2 : c.printed;
    const double tol = c.tolerance == 0 ? 1e-12 : c.tolerance;
    if (std::abs(got - want) <= tol) {
      ++ok;
    } else {
      notes += fmt::format(" [q={} mu={} r={}: {} vs {}]", c.q, c.mu, c.r, got,
                           want);
    }
    if (typo) {
      notes += fmt::format(" printed sqrt(2) cell checked as 2*sqrt(2)={:.4f};",
                           got);
    }
  }
  return {ok == 30, fmt::format("{}/30 cells{}", ok, notes)};
}

// 2. Closed-form fit of the two-document instance.
Outcome closed_form() {
  const Corpus corpus = testing::corpus_of({{"cat"}, {"dog"}});
  const Labeling labels = testing::labels_of(corpus, {1, -1});
  BanList ban;
  ban.words.insert("dog");
  double worst = 0;
  bool ok = true;
  for (double C : {0.25, 0.5, 1.0, 1.5}) {
    const ModelState m = traced_fit(corpus, labels, ban, tight(C));
    if (m.features.size() != 1) {
      ok = false;
      continue;
    }
    worst = std::max(worst, std::abs(m.intercept - (C / 2 - 1)));
    worst = std::max(worst, std::abs(m.features[0].beta - (2 - C)));
  }
  for (double C : {2.0, 2.5, 4.0}) {
    const ModelState m = traced_fit(corpus, labels, ban, tight(C));
    ok = ok && m.features.empty();
  }
  ok = ok && worst < 1e-6;
  return {ok, fmt::format("max |error| {:.2e}; C>=2 gives beta=0: {}", worst,
                          ok ? "yes" : "see above")};
}

// 3. Final loss against a dense solver on the enumerated design.
Outcome oracle_equivalence() {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> vocab(2, 8);
  std::uniform_int_distribution<int> pattern(1, 3);
  std::uniform_real_distribution<double> cs(0.1, 1.5);
  double worst = 0;
  int unique = 0;
  int support_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto rc = testing::random_corpus(rng, 12, vocab(rng), 8);
    const int max_pattern = pattern(rng);
    const double C = cs(rng);
    const Corpus corpus = testing::corpus_of(rc.docs);
    const Labeling labels = testing::labels_of(corpus, rc.labels);
    FitConfig config = tight(C);
    config.search.max_pattern = max_pattern;
    config.search.max_iter = 20000;
    const ModelState m = traced_fit(corpus, labels, {}, config);
    const auto design = oracle::phrase_design(rc.docs, rc.labels, {},
                                              {max_pattern, 0, 1}, 2.0, C);
    const auto sol = oracle::solve(design.problem);
    worst = std::max(worst, std::abs(m.loss - sol.objective));
    if (oracle::has_unique_support(design.problem, sol, 1e-3)) {
      ++unique;
      std::set<std::string> want;
      for (std::size_t j = 0; j < sol.beta.size(); ++j) {
        if (sol.beta[j] != 0.0) want.insert(oracle::display(design.phrases[j]));
      }
      std::set<std::string> got;
      for (const auto& f : m.features) got.insert(f.phrase.display());
      support_mismatch += got != want;
    }
  }
  return {worst <= 1e-4 && support_mismatch == 0,
          fmt::format("max |loss diff| {:.2e}; {} unique-support cases, {} "
                      "support mismatches",
                      worst, unique, support_mismatch)};
}

// 4. Pruned and exhaustive searches agree; bounds dominate descendants.
Outcome pruning_soundness() {
  std::mt19937_64 rng(4004);
  std::uniform_int_distribution<int> small(0, 2);
  std::uniform_real_distribution<double> cs(0.02, 2.5);
  int states = 0;
  int disagreements = 0;
  double worst = -INFINITY;
  for (int trial = 0; trial < 1200; ++trial) {
    const auto rc = testing::random_corpus(rng, 12, 2 + small(rng) * 2, 9, true);
    const Corpus corpus = testing::corpus_of(rc.docs);
    const Labeling labels = testing::labels_of(corpus, rc.labels);
    FitConfig config;
    config.penalty.C = cs(rng);
    config.search.gap = small(rng);
    config.search.max_pattern = 2 + small(rng) * 2;
    config.search.min_support = 1 + small(rng) / 2;
    const double qs[] = {1.0, 4.0 / 3, 2.0, 4.0, INFINITY};
    const double q = qs[trial % 5];
    config.rescale.q = std::isinf(q) ? NormOrder::infinity() : NormOrder::finite(q);
    config.rescale.binary_features = trial % 3 == 0;
    config.rescale.no_rescaling = trial % 11 == 0;
    config.penalty.positive_only = trial % 4 == 0;
    config.penalty.elastic_a = trial % 6 == 0 ? 0.5 : 1.0;
    const PostingIndex index = PostingIndex::build(corpus, labels, {});
    Trainer trainer(index, labels, config);
    const ExpansionLimits limits{config.search.gap, config.search.min_support,
                                 config.search.max_pattern};
    testing::randomize(trainer, testing::all_phrases(index, limits), rng);
    ++states;
    disagreements += !testing::same_candidate(
        trainer.find_highest_gradient(SearchMode::kPruned),
        trainer.find_highest_gradient(SearchMode::kExhaustive));
    worst = std::max(worst, testing::worst_bound_excess(trainer, limits));
  }
  return {states >= 1000 && disagreements == 0 && worst <= 1e-9,
          fmt::format("{} states, {} disagreements, max magnitude - bound "
                      "{:.2e}",
                      states, disagreements, worst)};
}

// 5. Analytic gradients against central differences.
Outcome gradient_check() {
  std::mt19937_64 rng(5005);
  const double h = 1e-5;
  int states = 0;
  int checks = 0;
  int failures = 0;
  int skipped = 0;
  double worst = 0;
  while (states < 20) {
    const auto rc = testing::random_corpus(rng, 30, 6, 12);
    if (rc.docs.size() < 20) continue;
    const Corpus corpus = testing::corpus_of(rc.docs);
    const Labeling labels = testing::labels_of(corpus, rc.labels);
    FitConfig config;
    config.penalty.C = 0.5;
    config.search.max_pattern = 3;
    config.rescale.q = NormOrder::finite(states % 2 == 0 ? 2.0 : 1.5);
    const PostingIndex index = PostingIndex::build(corpus, labels, {});
    Trainer trainer(index, labels, config);
    const auto phrases = testing::all_phrases(index, {0, 1, 3});
    if (phrases.size() < 50) continue;
    testing::randomize(trainer, phrases, rng);
    ++states;
    const auto margins = trainer.margins();
    const auto y = trainer.labels();
    // Data loss after moving one coordinate by t along `x` (row -> value).
    auto moved = [&](const std::vector<std::pair<std::size_t, double>>& x,
                     double t) {
      std::vector<double> m(margins.begin(), margins.end());
      for (const auto& [i, v] : x) m[i] += t * y[i] * v;
      return data_loss(LossKind::kSquaredHinge, m);
    };
    auto compare = [&](double analytic,
                       const std::vector<std::pair<std::size_t, double>>& x) {
      for (const auto& [i, v] : x) {
        if (std::abs(margins[i] - 1.0) < 10 * h * std::max(1.0, v)) {
          ++skipped;
          return;
        }
      }
      const double numeric = (moved(x, h) - moved(x, -h)) / (2 * h);
      ++checks;
      const double scale = std::abs(analytic);
      const double err = scale > 1e-8 ? std::abs(numeric - analytic) / scale
                                      : std::abs(numeric - analytic);
      worst = std::max(worst, err);
      failures += err >= 1e-6;
    };
    std::vector<std::pair<std::size_t, double>> ones;
    for (std::size_t i = 0; i < margins.size(); ++i) ones.emplace_back(i, 1.0);
    compare(intercept_gradient(margins, y, LossKind::kSquaredHinge), ones);
    std::uniform_int_distribution<std::size_t> pick(0, phrases.size() - 1);
    for (int k = 0; k < 50; ++k) {
      const OccurrenceList& occ = phrases[pick(rng)].second;
      // Rescaled column computed directly from the counts.
      std::vector<std::pair<std::size_t, double>> x;
      double z = 0;
      occ.for_each_document([&](std::uint32_t d, std::uint32_t c) {
        x.emplace_back(static_cast<std::size_t>(trainer.row_of(d)), c);
        z += std::pow(c, config.rescale.q.value());
      });
      z = std::pow(z, 1.0 / config.rescale.q.value());
      for (auto& e : x) e.second /= z;
      compare(trainer.smooth_gradient_of(occ), x);
    }
  }
  return {failures == 0 && checks >= 20 * 40,
          fmt::format("{} states, {} checks ({} skipped at kinks), max relative "
                      "error {:.2e}",
                      states, checks, skipped, worst)};
}

// 6. Planted perfect predictors around the cut-off.
Outcome perfect_predictors() {
  struct Shape {
    int docs;
    int positives;
  };
  int cases = 0;
  int wrong = 0;
  std::string notes;
  for (const Shape shape : {Shape{20, 5}, Shape{20, 10}, Shape{40, 4}}) {
    for (double q : {4.0 / 3, 2.0, 4.0}) {
      for (int r : {1, 2, 4}) {
        if (r > shape.positives) continue;
        oracle::Docs docs;
        std::vector<int> raw;
        for (int d = 0; d < shape.docs; ++d) {
          std::vector<std::string> doc{"common", "shared"};
          if (d < r) doc.push_back("perfect");
          docs.push_back(doc);
          raw.push_back(d < shape.positives ? 1 : -1);
        }
        const Corpus corpus = testing::corpus_of(docs);
        const Labeling labels = testing::labels_of(corpus, raw);
        FitConfig config = tight(1.0);
        config.rescale.q = NormOrder::finite(q);
        config.search.max_pattern = 1;
        config.search.max_iter = 200;
        const PostingIndex index = PostingIndex::build(corpus, labels, {});
        const double mu = intercept_only_mean(index, labels, config);
        const double cstar = perfect_predictor_threshold(r, mu, config.rescale.q);
        config.penalty.C = 1.001 * cstar;
        const bool excluded = !traced_fit(corpus, labels, {}, config)
                                   .find(Phrase::parse("perfect"));
        config.penalty.C = 0.9 * cstar;
        const bool included = traced_fit(corpus, labels, {}, config)
                                  .find(Phrase::parse("perfect")) != nullptr;
        ++cases;
        if (!excluded || !included) {
          ++wrong;
          notes += fmt::format(" [n={} s={} q={} r={}]", shape.docs,
                               shape.positives, q, r);
        }
      }
    }
  }
  return {wrong == 0, fmt::format("{} corpora, {} wrong{}", cases, wrong, notes)};
}

// 7. Calibration of the permutation test.
Outcome permutation_calibration() {
  const int R = 99;
  FitConfig config;
  config.search.threads = 0;
  config.search.max_pattern = 3;
  int rejections = 0;
  std::mt19937_64 rng(7007);
  for (int trial = 0; trial < 200; ++trial) {
    const auto docs = testing::zipf_docs(rng, 40, 15, 150, 1.1);
    const auto raw = testing::random_labels(rng, 40, 12);
    const Corpus corpus = testing::corpus_of(docs);
    const Labeling labels = testing::labels_of(corpus, raw);
    const ThresholdReport r =
        find_threshold_C(corpus, labels, {}, config, R, 1000 + trial);
    rejections += r.p_value <= 0.05;
  }
  const double rate = rejections / 200.0;
  int minimal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto docs = testing::zipf_docs(rng, 40, 15, 150, 1.1);
    const auto raw = testing::random_labels(rng, 40, 12);
    testing::plant(rng, docs, raw, "planted");
    const Corpus corpus = testing::corpus_of(docs);
    const Labeling labels = testing::labels_of(corpus, raw);
    const ThresholdReport r =
        find_threshold_C(corpus, labels, {}, config, R, 5000 + trial);
    minimal += r.p_value == 1.0 / (R + 1);
  }
  return {rate >= 0.01 && rate <= 0.12 && minimal >= 95,
          fmt::format("null rejection rate {:.3f} (200 corpora); planted p=1/{} "
                      "in {}/100",
                      rate, R + 1, minimal)};
}

// 8. Loss traces of all fits above.
Outcome monotone_traces() {
  std::size_t steps = 0;
  double worst = -INFINITY;
  for (const auto& trace : g_traces) {
    for (std::size_t t = 1; t < trace.size(); ++t) {
      worst = std::max(worst, trace[t] - trace[t - 1]);
      ++steps;
    }
  }
  return {worst <= 1e-10 && !g_traces.empty(),
          fmt::format("{} fits, {} steps, largest increase {:.2e}",
                      g_traces.size(), steps, worst)};
}

// 9. Larger q favours more frequent phrases.
Outcome q_direction() {
  std::mt19937_64 rng(9009);
  int corpora = 0;
  int monotone = 0;
  int common_first = 0;
  std::string notes;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 300;
    auto docs = testing::zipf_docs(rng, n, 20, 400, 1.0);
    const auto raw = testing::random_labels(rng, n, 100);
    std::bernoulli_distribution weak_pos(0.7);
    std::bernoulli_distribution weak_neg(0.45);
    std::bernoulli_distribution rare_pos(0.06);
    std::uniform_int_distribution<int> repeats(1, 4);
    for (int d = 0; d < n; ++d) {
      auto& doc = docs[static_cast<std::size_t>(d)];
      const bool pos = raw[static_cast<std::size_t>(d)] == 1;
      if (pos ? weak_pos(rng) : weak_neg(rng)) {
        const int k = repeats(rng);
        for (int i = 0; i < k; ++i) doc.push_back("commonsignal");
      }
      if (pos && rare_pos(rng)) doc.insert(doc.begin(), "raresignal");
    }
    const Corpus corpus = testing::corpus_of(docs);
    const Labeling labels = testing::labels_of(corpus, raw);
    const auto& vocab = corpus.vocabulary();
    std::vector<double> medians;
    for (double q : {1.2, 2.0, 4.0}) {
      FitConfig config;
      config.rescale.q = NormOrder::finite(q);
      config.search.max_pattern = 1;
      config.search.max_iter = 15;
      config.penalty.C = 0.5 * null_threshold_C(corpus, labels, {}, config);
      const ModelState m = fit(corpus, labels, {}, config);
      std::vector<double> freq;
      for (const auto& f : m.features) {
        freq.push_back(static_cast<double>(vocab.at(f.phrase.token(0))));
      }
      std::sort(freq.begin(), freq.end());
      double median = 0;
      if (!freq.empty()) {
        const std::size_t k = freq.size();
        median = k % 2 ? freq[k / 2] : 0.5 * (freq[k / 2 - 1] + freq[k / 2]);
      }
      medians.push_back(median);
    }
    ++corpora;
    const bool ok = medians[0] <= medians[1] && medians[1] <= medians[2];
    monotone += ok;
    notes += fmt::format(" [{} {} {}]", medians[0], medians[1], medians[2]);
    FitConfig raw_counts;
    raw_counts.rescale.no_rescaling = true;
    raw_counts.search.max_pattern = 1;
    raw_counts.search.max_iter = 1;
    raw_counts.penalty.C = 1.0;
    const ModelState first = fit(corpus, labels, {}, raw_counts);
    const bool common = !first.features.empty() &&
                        first.features[0].phrase == Phrase::parse("commonsignal");
    common_first += common;
  }
  return {monotone == corpora && common_first == corpora,
          fmt::format("median frequency non-decreasing in q on {}/{} corpora; "
                      "no-rescaling picks the frequent signal first on {}/{}; medians{}",
                      monotone, corpora, common_first, corpora, notes)};
}

// 10. Desk-scale fit.
Outcome desk_scale() {
  std::mt19937_64 rng(10010);
  const int n = 10000;
  auto docs = testing::zipf_docs(rng, n, 80, 5000, 1.0);
  // Keyword-driven labeling: a document is positive iff it contains one of
  // the planted phrases.
  std::bernoulli_distribution stripper(0.15);
  std::bernoulli_distribution bathtub(0.08);
  std::vector<int> raw(static_cast<std::size_t>(n), -1);
  for (int d = 0; d < n; ++d) {
    auto& doc = docs[static_cast<std::size_t>(d)];
    std::uniform_int_distribution<std::size_t> at(0, doc.size());
    if (stripper(rng)) {
      doc.insert(doc.begin() + static_cast<std::ptrdiff_t>(at(rng)),
                 {"paint", "stripper"});
      raw[static_cast<std::size_t>(d)] = 1;
    }
    if (bathtub(rng)) {
      doc.insert(doc.begin() + static_cast<std::ptrdiff_t>(at(rng)),
                 {"old", "bathtub"});
      raw[static_cast<std::size_t>(d)] = 1;
    }
  }
  const Corpus corpus = testing::corpus_of(docs);
  const Labeling labels = testing::labels_of(corpus, raw);
  FitConfig config;
  config.search.threads = 0;
  const auto start = std::chrono::steady_clock::now();
  const ModelState m = fit(corpus, labels, {}, config);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::string phrases;
  for (const auto& f : m.features) phrases += " [" + f.phrase.display() + "]";
  return {seconds < 120 && m.converged,
          fmt::format("{} docs, {} positives, {} threads: {:.1f} s, {} "
                      "iterations, {};{}",
                      n, labels.positive_count(),
                      std::max(1u, std::thread::hardware_concurrency()),
                      seconds, m.iterations,
                      m.converged ? "converged" : "not converged", phrases)};
}

// 11. Tokenization golden file.
Outcome tokenization_golden() {
  std::ifstream in(std::filesystem::path(PHRASEREG_TEST_DATA_DIR) /
                   "tokenization_golden.jsonl");
  if (!in) return {false, "golden file missing"};
  int cases = 0;
  int ok = 0;
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    ++cases;
    ok += clean_text(j["raw"].get<std::string>()) ==
          j["cleaned"].get<std::string>();
  }
  return {cases == 25 && ok == cases, fmt::format("{}/{} byte-exact", ok, cases)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
    bool soft;
  };
  const std::vector<Criterion> criteria = {
      {1, "table of perfect-predictor cut-offs", table_cutoffs, false},
      {2, "closed-form fit", closed_form, false},
      {3, "oracle equivalence", oracle_equivalence, false},
      {4, "pruning soundness", pruning_soundness, false},
      {5, "gradient correctness", gradient_check, false},
      {6, "perfect-predictor pruning", perfect_predictors, false},
      {7, "permutation calibration", permutation_calibration, false},
      {8, "monotone loss", monotone_traces, false},
      {9, "q direction", q_direction, false},
      {10, "desk-scale performance", desk_scale, true},
      {11, "tokenization golden file", tokenization_golden, false},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  bool hard_failure = false;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    fmt::print("criterion {:>2} {}: {} ({:.2f} s) {}\n", c.id,
               o.pass ? "PASS" : "FAIL", c.name, seconds, o.detail);
    std::fflush(stdout);
    if (!o.pass && !c.soft) hard_failure = true;
  }
  return hard_failure ? 1 : 0;
}
