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

#include "phrasereg/objective.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace phrasereg {

double loss(LossKind kind, double margin) {
  switch (kind) {
    case LossKind::kSquaredHinge: {
      const double slack = std::max(1.0 - margin, 0.0);
      return slack * slack;
    }
    case LossKind::kLogistic:
      // log(1 + e^-m) without overflow for large negative m.
      return margin > 0 ? std::log1p(std::exp(-margin))
                        : -margin + std::log1p(std::exp(margin));
  }
  return 0.0;
}

double loss_derivative(LossKind kind, double margin) {
  switch (kind) {
    case LossKind::kSquaredHinge:
      return -2.0 * std::max(1.0 - margin, 0.0);
    case LossKind::kLogistic:
      // -e^-m / (1 + e^-m) = -1 / (1 + e^m)
      return margin > 0 ? -std::exp(-margin) / (1.0 + std::exp(-margin))
                        : -1.0 / (1.0 + std::exp(margin));
  }
  return 0.0;
}

NormOrder NormOrder::finite(double q) {
  if (!(q >= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("norm order q={} must be at least 1", q));
  }
  return NormOrder(q);
}

NormOrder NormOrder::conjugate() const {
  if (is_infinite()) return NormOrder(1.0);
  if (q_ == 1.0) return NormOrder(kInf);
  return NormOrder(q_ / (q_ - 1.0));
}

double norm(std::span<const double> counts, const RescaleConfig& config) {
  double largest = 0.0;
  for (double c : counts) largest = std::max(largest, c);
  if (!(largest > 0.0)) {
    throw Error(ErrorKind::kVacuousFeature,
                "feature has no positive count");
  }
  if (config.no_rescaling) return 1.0;
  if (config.binary_features) {
    std::size_t support = 0;
    for (double c : counts) support += c > 0 ? 1 : 0;
    if (config.q.is_infinite()) return 1.0;
    return std::pow(static_cast<double>(support), 1.0 / config.q.value());
  }
  if (config.q.is_infinite()) return largest;
  const double q = config.q.value();
  double sum = 0.0;
  if (q == 1.0) {
    for (double c : counts) sum += c;
    return sum;
  }
  if (q == 2.0) {
    for (double c : counts) sum += c * c;
    return std::sqrt(sum);
  }
  // Scale by the largest entry so high powers do not overflow.
  for (double c : counts) sum += std::pow(c / largest, q);
  return largest * std::pow(sum, 1.0 / q);
}

FeatureColumn rescaled_column(std::span<const std::uint32_t> rows,
                              std::span<const double> counts,
                              const RescaleConfig& config, double* z_out) {
  const double z = norm(counts, config);
  FeatureColumn column;
  column.rows.reserve(rows.size());
  column.values.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!(counts[k] > 0)) continue;
    const double c = config.binary_features ? 1.0 : counts[k];
    column.rows.push_back(rows[k]);
    column.values.push_back(c / z);
  }
  if (z_out != nullptr) *z_out = z;
  return column;
}

double data_loss(LossKind kind, std::span<const double> margins) {
  double total = 0.0;
  for (double m : margins) total += loss(kind, m);
  return total;
}

double penalty_value(std::span<const double> coefficients,
                     const PenaltyConfig& penalty) {
  double l1 = 0.0;
  double l2 = 0.0;
  for (double b : coefficients) {
    l1 += std::abs(b);
    l2 += b * b;
  }
  return penalty.l1_weight() * l1 + penalty.l2_weight() * l2;
}

std::vector<double> compute_margins(double intercept,
                                    std::span<const FeatureColumn> columns,
                                    std::span<const double> coefficients,
                                    std::span<const std::int8_t> y) {
  std::vector<double> score(y.size(), intercept);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const FeatureColumn& col = columns[j];
    for (std::size_t k = 0; k < col.rows.size(); ++k) {
      score[col.rows[k]] += coefficients[j] * col.values[k];
    }
  }
  for (std::size_t i = 0; i < y.size(); ++i) score[i] *= y[i];
  return score;
}

double smooth_gradient(const FeatureColumn& column,
                       std::span<const double> margins,
                       std::span<const std::int8_t> y, LossKind kind) {
  double g = 0.0;
  for (std::size_t k = 0; k < column.rows.size(); ++k) {
    const std::uint32_t i = column.rows[k];
    g += loss_derivative(kind, margins[i]) * y[i] * column.values[k];
  }
  return g;
}

double intercept_gradient(std::span<const double> margins,
                          std::span<const std::int8_t> y, LossKind kind) {
  double g = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    g += loss_derivative(kind, margins[i]) * y[i];
  }
  return g;
}

SubgradientInterval penalized_subgradient(double smooth, double coefficient,
                                          const PenaltyConfig& penalty) {
  if (coefficient == 0.0) {
    return {smooth - penalty.l1_weight(), smooth + penalty.l1_weight()};
  }
  const double sign = coefficient > 0 ? 1.0 : -1.0;
  const double g = smooth + penalty.l1_weight() * sign +
                   2.0 * penalty.l2_weight() * coefficient;
  return {g, g};
}

SubgradientInterval feature_gradient(const FeatureColumn& column,
                                     double coefficient,
                                     std::span<const double> margins,
                                     std::span<const std::int8_t> y,
                                     LossKind kind,
                                     const PenaltyConfig& penalty) {
  return penalized_subgradient(smooth_gradient(column, margins, y, kind),
                               coefficient, penalty);
}

double descent_magnitude(const SubgradientInterval& interval,
                         double coefficient, bool positive_only) {
  if (coefficient != 0.0) return std::abs(interval.lo);
  if (positive_only) return std::max(0.0, -interval.hi);
  if (interval.lo > 0.0) return interval.lo;
  if (interval.hi < 0.0) return -interval.hi;
  return 0.0;
}

}  // namespace phrasereg
