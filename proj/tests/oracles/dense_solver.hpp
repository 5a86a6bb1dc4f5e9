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

// Dense proximal-gradient reference solver for
//
//   sum_i ((1 - y_i (b0 + x_i'b)) v 0)^2 + C a |b|_1 + C (1 - a) |b|_2^2
//
// with an unpenalized intercept, written against plain matrices.

#ifndef PHRASEREG_TESTS_ORACLES_DENSE_SOLVER_HPP_
#define PHRASEREG_TESTS_ORACLES_DENSE_SOLVER_HPP_

#include <vector>

namespace oracle {

struct DenseProblem {
  // rows x columns, row-major.
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  double C = 1.0;
  double a = 1.0;
  bool positive_only = false;
  // Per-coefficient multipliers of the penalty; empty means all 1.
  std::vector<double> weights;
};

struct DenseSolution {
  double intercept = 0.0;
  std::vector<double> beta;
  double objective = 0.0;
  int iterations = 0;
};

double objective(const DenseProblem& p, double intercept,
                 const std::vector<double>& beta);

// Accelerated proximal gradient with adaptive restart, run until the
// objective stalls below `tolerance` or `max_iterations` is hit.
DenseSolution solve(const DenseProblem& p, double tolerance = 1e-13,
                    int max_iterations = 2000000);

// True when the solution is the unique optimum with a clear margin: every
// zero coefficient has |gradient| < C a - margin (or, positive-only,
// gradient > -C a + margin), every non-zero one has |b_j| > margin, and the
// columns of the intercept and the non-zero coefficients restricted to rows
// inside the hinge are linearly independent.
bool has_unique_support(const DenseProblem& p, const DenseSolution& s,
                        double margin);

}  // namespace oracle

#endif  // PHRASEREG_TESTS_ORACLES_DENSE_SOLVER_HPP_
