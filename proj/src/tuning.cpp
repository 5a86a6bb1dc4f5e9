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

#include "phrasereg/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include <fmt/core.h>

#include "phrasereg/random.hpp"
#include "phrasereg/reporting.hpp"

namespace phrasereg {
namespace {

FitConfig single_threaded(FitConfig config) {
  config.search.threads = 1;
  config.search.verbosity = 0;
  config.search.log = nullptr;
  return config;
}

// Runs job(k) for k in [0, count) on up to `threads` workers.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = static_cast<unsigned>(
      std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1)));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next.fetch_add(1); k < count;
           k = next.fetch_add(1)) {
        if (failed.load()) return;
        try {
          job(k);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

double null_threshold_C(const PostingIndex& index, const Labeling& labeling,
                        const FitConfig& config) {
  FitConfig free = config;
  free.penalty.C = 0.0;
  Trainer trainer(index, labeling, free);
  trainer.update_intercept();
  const std::optional<Candidate> best = trainer.find_highest_gradient();
  if (!best) return 0.0;
  return best->magnitude / config.penalty.elastic_a;
}

double null_threshold_C(const Corpus& corpus, const Labeling& labeling,
                        const BanList& ban, const FitConfig& config) {
  validate(config);
  const PostingIndex index = PostingIndex::build(corpus, labeling, ban);
  return null_threshold_C(index, labeling, config);
}

std::vector<double> ThresholdReport::sorted_permutations() const {
  std::vector<double> sorted = c_perm;
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

double permutation_p_value(double c_obs, const std::vector<double>& c_perm) {
  const auto extreme = std::count_if(c_perm.begin(), c_perm.end(),
                                     [c_obs](double c) { return c >= c_obs; });
  return static_cast<double>(1 + extreme) /
         static_cast<double>(c_perm.size() + 1);
}

Labeling permute_labeling(const Labeling& labeling, std::uint64_t seed) {
  std::vector<int> values(labeling.values().begin(), labeling.values().end());
  std::vector<int> nonzero;
  for (int v : values) {
    if (v != 0) nonzero.push_back(v);
  }
  std::mt19937_64 rng(seed);
  shuffle(nonzero, rng);
  std::size_t k = 0;
  for (int& v : values) {
    if (v != 0) v = nonzero[k++];
  }
  return validate_labeling(values.size(), values);
}

ThresholdReport find_threshold_C(const Corpus& corpus,
                                 const Labeling& labeling, const BanList& ban,
                                 const FitConfig& config, int R,
                                 std::uint64_t seed) {
  validate(config);
  if (R < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "number of permutations must be at least 1");
  }
  const PostingIndex index = PostingIndex::build(corpus, labeling, ban);
  ThresholdReport report;
  report.seed = seed;
  report.c_obs = null_threshold_C(index, labeling, config);
  report.c_perm.assign(static_cast<std::size_t>(R), 0.0);
  const FitConfig replicate_config = single_threaded(config);
  parallel_for(report.c_perm.size(), config.search.threads,
               [&](std::size_t k) {
                 const Labeling permuted =
                     permute_labeling(labeling, derive_seed(seed, k));
                 report.c_perm[k] =
                     null_threshold_C(index, permuted, replicate_config);
               });
  report.p_value = permutation_p_value(report.c_obs, report.c_perm);
  return report;
}

double perfect_predictor_threshold(int r, double mu, NormOrder q) {
  if (r < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "perfect predictor size r must be at least 1");
  }
  if (!(mu < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("mean prediction mu={} must be below 1", mu));
  }
  const double exponent = q.is_infinite() ? 1.0 : 1.0 - 1.0 / q.value();
  return 2.0 * (1.0 - mu) * std::pow(static_cast<double>(r), exponent);
}

double intercept_only_mean(const PostingIndex& index, const Labeling& labeling,
                           const FitConfig& config) {
  Trainer trainer(index, labeling, config);
  trainer.update_intercept();
  return trainer.intercept();
}

CrossValidationReport cross_validate_C(const Corpus& corpus,
                                       const Labeling& labeling,
                                       const BanList& ban,
                                       const FitConfig& config, int folds,
                                       const std::vector<double>& C_grid,
                                       std::uint64_t seed) {
  validate(config);
  if (folds < 2) {
    throw Error(ErrorKind::kInvalidArgument, "folds must be at least 2");
  }
  if (C_grid.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "C grid is empty");
  }
  for (double c : C_grid) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorKind::kInvalidArgument,
                  fmt::format("C grid value {} is not a non-negative number", c));
    }
  }
  const auto k = static_cast<std::size_t>(folds);
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t d = 0; d < labeling.size(); ++d) {
    if (labeling[d] > 0) positives.push_back(d);
    if (labeling[d] < 0) negatives.push_back(d);
  }
  if (positives.size() < k || negatives.size() < k) {
    throw Error(ErrorKind::kFoldMissingClass,
                fmt::format("{} folds need at least {} documents of each class "
                            "({} positive, {} negative)",
                            folds, folds, positives.size(), negatives.size()));
  }
  std::vector<std::size_t> fold_of(labeling.size(), k);
  std::mt19937_64 rng(derive_seed(seed, 0));
  shuffle(positives, rng);
  shuffle(negatives, rng);
  for (std::size_t i = 0; i < positives.size(); ++i) fold_of[positives[i]] = i % k;
  for (std::size_t i = 0; i < negatives.size(); ++i) fold_of[negatives[i]] = i % k;

  const PostingIndex everything = PostingIndex::build(corpus);
  std::vector<double> squared_error(C_grid.size(), 0.0);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<int> train(labeling.values().begin(), labeling.values().end());
    for (std::size_t d = 0; d < train.size(); ++d) {
      if (fold_of[d] == f) train[d] = 0;
    }
    const Labeling train_labeling = validate_labeling(corpus, train);
    const PostingIndex index = PostingIndex::build(corpus, train_labeling, ban);
    for (std::size_t g = 0; g < C_grid.size(); ++g) {
      FitConfig fold_config = config;
      fold_config.penalty.C = C_grid[g];
      fold_config.search.log = nullptr;
      Trainer trainer(index, train_labeling, fold_config);
      ModelState model = trainer.run();
      model.stemmed = corpus.stemmed();
      const std::vector<double> scores = predict(model, everything);
      for (std::size_t d = 0; d < labeling.size(); ++d) {
        if (fold_of[d] != f) continue;
        const double yhat = std::clamp(scores[d], -1.0, 1.0);
        const double err = labeling[d] - yhat;
        squared_error[g] += err * err;
      }
    }
  }

  CrossValidationReport report;
  report.C_grid = C_grid;
  const double n = static_cast<double>(labeling.included_count());
  std::size_t best = 0;
  for (std::size_t g = 0; g < C_grid.size(); ++g) {
    report.mse.push_back(squared_error[g] / n);
    const bool better = report.mse[g] < report.mse[best] ||
                        (report.mse[g] == report.mse[best] &&
                         C_grid[g] > C_grid[best]);
    if (better) best = g;
  }
  report.best_C = C_grid[best];
  return report;
}

}  // namespace phrasereg
