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

// Choosing the penalty C.

#ifndef PHRASEREG_TUNING_HPP_
#define PHRASEREG_TUNING_HPP_

#include <cstdint>
#include <vector>

#include "phrasereg/corpus.hpp"
#include "phrasereg/objective.hpp"
#include "phrasereg/posting_index.hpp"
#include "phrasereg/search.hpp"

namespace phrasereg {

// Smallest C that leaves the fitted model intercept-only: the largest
// smooth-gradient magnitude over all phrases at the intercept-only optimum
// (divided by the elastic mixing weight). 0 when no phrase has a gradient.
double null_threshold_C(const PostingIndex& index, const Labeling& labeling,
                        const FitConfig& config);
double null_threshold_C(const Corpus& corpus, const Labeling& labeling,
                        const BanList& ban, const FitConfig& config);

struct ThresholdReport {
  double c_obs = 0.0;
  // Replicate order; replicate k uses the k-th derived seed.
  std::vector<double> c_perm;
  double p_value = 1.0;
  std::uint64_t seed = 0;

  std::size_t replicates() const { return c_perm.size(); }
  std::vector<double> sorted_permutations() const;
};

// Null thresholds under R random permutations of the non-zero labels.
// Replicates run on config.search.threads workers; the result depends only
// on the seed.
ThresholdReport find_threshold_C(const Corpus& corpus,
                                 const Labeling& labeling, const BanList& ban,
                                 const FitConfig& config, int R,
                                 std::uint64_t seed);

// (1 + #{c_perm >= c_obs}) / (R + 1).
double permutation_p_value(double c_obs, const std::vector<double>& c_perm);

// Labeling with the non-zero entries shuffled; zeros stay in place.
Labeling permute_labeling(const Labeling& labeling, std::uint64_t seed);

// Penalty above which a phrase that appears once in each of r positive
// documents (and nowhere else) is never selected: 2 (1 - mu) r^(1 - 1/q).
// Throws kInvalidArgument when mu >= 1 or r < 1.
double perfect_predictor_threshold(int r, double mu, NormOrder q);

// Prediction of the intercept-only fit.
double intercept_only_mean(const PostingIndex& index, const Labeling& labeling,
                           const FitConfig& config);

struct CrossValidationReport {
  std::vector<double> C_grid;
  std::vector<double> mse;
  double best_C = 0.0;
};

// Stratified k-fold estimate of the squared prediction error for each C.
// Predictions are clamped to [-1, 1]. Ties in the error go to the larger C.
CrossValidationReport cross_validate_C(const Corpus& corpus,
                                       const Labeling& labeling,
                                       const BanList& ban,
                                       const FitConfig& config, int folds,
                                       const std::vector<double>& C_grid,
                                       std::uint64_t seed);

}  // namespace phrasereg

#endif  // PHRASEREG_TUNING_HPP_
