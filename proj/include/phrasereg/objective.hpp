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

// Losses, L^q rescaling and (sub)gradients of the penalized objective
//
//   L(b0, b) = sum_i xi(m_i) + C a sum_j |b_j| + C (1 - a) sum_j b_j^2,
//   m_i      = y_i (b0 + sum_j b_j c_ij / z_j),
//   z_j      = (sum_i c_ij^q)^(1/q).
//
// The quadratic term is the one whose derivative is C (1 - a) 2 b_j; with
// the default a = 1 the penalty is plain L1. The intercept is never
// penalized. Everything here works on "rows", the documents that take part
// in the fit, indexed 0..n-1.

#ifndef PHRASEREG_OBJECTIVE_HPP_
#define PHRASEREG_OBJECTIVE_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "phrasereg/error.hpp"

namespace phrasereg {

enum class LossKind { kSquaredHinge, kLogistic };

// xi(m): ((1 - m) v 0)^2 or log(1 + e^-m).
double loss(LossKind kind, double margin);
// xi'(m) <= 0.
double loss_derivative(LossKind kind, double margin);

// Order of an L^q norm, q in [1, inf].
class NormOrder {
 public:
  // Throws kInvalidArgument unless q >= 1. Passing +inf is allowed.
  static NormOrder finite(double q);
  static NormOrder infinity() { return NormOrder(kInf); }

  bool is_infinite() const { return q_ == kInf; }
  double value() const { return q_; }
  // Hoelder conjugate r with 1/q + 1/r = 1.
  NormOrder conjugate() const;

  friend bool operator==(NormOrder, NormOrder) = default;

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  explicit NormOrder(double q) : q_(q) {}
  double q_;
};

struct RescaleConfig {
  NormOrder q = NormOrder::finite(2.0);
  bool binary_features = false;
  // Every z_j is 1.
  bool no_rescaling = false;
};

struct PenaltyConfig {
  double C = 1.0;
  double elastic_a = 1.0;
  bool positive_only = false;

  double l1_weight() const { return C * elastic_a; }
  double l2_weight() const { return C * (1.0 - elastic_a); }
};

// z_j of a count column (binarized first in binary mode). Throws
// kVacuousFeature when no entry is positive.
double norm(std::span<const double> counts, const RescaleConfig& config);

// Non-zero entries of one rescaled design-matrix column, x_ij = c_ij / z_j.
struct FeatureColumn {
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
};

// Builds x = c / z from (row, count) pairs and reports z.
FeatureColumn rescaled_column(std::span<const std::uint32_t> rows,
                              std::span<const double> counts,
                              const RescaleConfig& config, double* z_out);

// sum_i xi(m_i).
double data_loss(LossKind kind, std::span<const double> margins);
// C a sum |b_j| + C (1-a) sum b_j^2.
double penalty_value(std::span<const double> coefficients,
                     const PenaltyConfig& penalty);

// m_i = y_i (b0 + sum_j b_j x_ij), computed from scratch.
std::vector<double> compute_margins(
    double intercept, std::span<const FeatureColumn> columns,
    std::span<const double> coefficients, std::span<const std::int8_t> y);

// sum_i xi'(m_i) y_i x_ij.
double smooth_gradient(const FeatureColumn& column,
                       std::span<const double> margins,
                       std::span<const std::int8_t> y, LossKind kind);

// sum_i xi'(m_i) y_i, the intercept's gradient (no penalty term).
double intercept_gradient(std::span<const double> margins,
                          std::span<const std::int8_t> y, LossKind kind);

struct SubgradientInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }
};

// Subdifferential of L with respect to b_j given the smooth part g:
// [g + C a sign(b) + 2 C (1-a) b] off zero, [g - C a, g + C a] at zero.
SubgradientInterval penalized_subgradient(double smooth, double coefficient,
                                          const PenaltyConfig& penalty);

SubgradientInterval feature_gradient(const FeatureColumn& column,
                                     double coefficient,
                                     std::span<const double> margins,
                                     std::span<const std::int8_t> y,
                                     LossKind kind,
                                     const PenaltyConfig& penalty);

// Size of the steepest available descent along b_j: the distance of the
// subdifferential from zero. In positive-only mode a coefficient at zero
// can only grow, so only a negative upper end counts.
double descent_magnitude(const SubgradientInterval& interval,
                         double coefficient, bool positive_only);

}  // namespace phrasereg

#endif  // PHRASEREG_OBJECTIVE_HPP_
