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

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/dense_solver.hpp"
#include "phrasereg/objective.hpp"

using namespace phrasereg;

namespace {

RescaleConfig with_q(double q) {
  RescaleConfig c;
  c.q = std::isinf(q) ? NormOrder::infinity() : NormOrder::finite(q);
  return c;
}

FeatureColumn unit_column(std::vector<std::uint32_t> rows,
                          std::vector<double> values) {
  return {std::move(rows), std::move(values)};
}

}  // namespace

TEST_CASE("norm examples") {
  const std::vector<double> a{1, 1, 0};
  const std::vector<double> b{3, 0, 4};
  CHECK(norm(a, with_q(2)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(norm(b, with_q(2)) == doctest::Approx(5.0));
  CHECK(norm(b, with_q(INFINITY)) == 4.0);
  CHECK(norm(b, with_q(1)) == 7.0);
  RescaleConfig none;
  none.no_rescaling = true;
  CHECK(norm(b, none) == 1.0);
  RescaleConfig binary = with_q(2);
  binary.binary_features = true;
  CHECK(norm(b, binary) == doctest::Approx(std::sqrt(2.0)));

  const std::vector<double> zero{0, 0};
  CHECK_THROWS_AS(norm(zero, with_q(2)), Error);
  try {
    norm(zero, with_q(2));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kVacuousFeature);
  }
  CHECK_THROWS_AS(NormOrder::finite(0.5), Error);
}

TEST_CASE("norm at high order stays finite") {
  const std::vector<double> big{1e3, 2e3};
  const double z = norm(big, with_q(400));
  CHECK(std::isfinite(z));
  CHECK(z == doctest::Approx(2e3).epsilon(1e-2));
}

TEST_CASE("conjugate orders") {
  CHECK(NormOrder::finite(2).conjugate().value() == 2.0);
  CHECK(NormOrder::finite(4).conjugate().value() == doctest::Approx(4.0 / 3));
  CHECK(NormOrder::finite(1).conjugate().is_infinite());
  CHECK(NormOrder::infinity().conjugate().value() == 1.0);
}

TEST_CASE("loss examples") {
  const std::vector<double> zero{0.0, 0.0};
  CHECK(data_loss(LossKind::kSquaredHinge, zero) == 2.0);
  const std::vector<double> shifted{-1.0, 1.0};
  CHECK(data_loss(LossKind::kSquaredHinge, shifted) == 4.0);

  // The 2-document cat model at C=1.
  const FeatureColumn cat = unit_column({0}, {1.0});
  const std::vector<std::int8_t> y{1, -1};
  const std::vector<FeatureColumn> cols{cat};
  const std::vector<double> beta{1.0};
  const auto m = compute_margins(-0.5, cols, beta, y);
  CHECK(m == std::vector<double>{0.5, 0.5});
  PenaltyConfig penalty;
  CHECK(data_loss(LossKind::kSquaredHinge, m) + penalty_value(beta, penalty) ==
        1.5);
}

TEST_CASE("loss derivative examples") {
  CHECK(loss_derivative(LossKind::kSquaredHinge, 0.0) == -2.0);
  CHECK(loss_derivative(LossKind::kSquaredHinge, 2.0) == 0.0);
  CHECK(loss_derivative(LossKind::kLogistic, 0.0) == -0.5);
}

TEST_CASE("losses are convex and non-increasing") {
  for (LossKind kind : {LossKind::kSquaredHinge, LossKind::kLogistic}) {
    for (double m = -50; m <= 50; m += 0.01) {
      CHECK(loss_derivative(kind, m) <= 0.0);
      CHECK(loss(kind, m) >= 0.0);
      const double h = 0.005;
      CHECK(loss(kind, m - h) + loss(kind, m + h) >= 2 * loss(kind, m) - 1e-12);
      CHECK(loss_derivative(kind, m + h) >= loss_derivative(kind, m));
    }
    CHECK(std::isfinite(loss(kind, -1e4)));
    CHECK(std::isfinite(loss_derivative(kind, 1e4)));
  }
}

TEST_CASE("feature gradient examples") {
  const FeatureColumn cat = unit_column({0}, {1.0});
  const std::vector<std::int8_t> y{1, -1};
  const std::vector<double> m{0.0, 0.0};
  PenaltyConfig p1;
  p1.C = 1.0;
  const auto g1 = feature_gradient(cat, 0.0, m, y, LossKind::kSquaredHinge, p1);
  CHECK(g1.lo == -3.0);
  CHECK(g1.hi == -1.0);
  CHECK(!g1.contains_zero());
  CHECK(descent_magnitude(g1, 0.0, false) == 1.0);

  PenaltyConfig p3;
  p3.C = 3.0;
  const auto g3 = feature_gradient(cat, 0.0, m, y, LossKind::kSquaredHinge, p3);
  CHECK(g3.lo == -5.0);
  CHECK(g3.hi == 1.0);
  CHECK(g3.contains_zero());
  CHECK(descent_magnitude(g3, 0.0, false) == 0.0);

  CHECK(intercept_gradient(m, y, LossKind::kSquaredHinge) == 0.0);
}

TEST_CASE("positive-only descent ignores negative directions") {
  const SubgradientInterval up{0.5, 2.5};
  CHECK(descent_magnitude(up, 0.0, false) == 0.5);
  CHECK(descent_magnitude(up, 0.0, true) == 0.0);
  const SubgradientInterval down{-2.5, -0.5};
  CHECK(descent_magnitude(down, 0.0, true) == 0.5);
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(-1.5, 1.5);
  std::uniform_int_distribution<int> count(0, 3);
  const double h = 1e-5;
  int checked = 0;
  for (int state = 0; state < 40; ++state) {
    const std::size_t n = 12;
    std::vector<std::int8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = i % 2 == 0 ? 1 : -1;
    std::vector<FeatureColumn> cols;
    std::vector<double> beta;
    for (int j = 0; j < 6; ++j) {
      FeatureColumn col;
      for (std::uint32_t i = 0; i < n; ++i) {
        const int c = count(rng);
        if (c > 0) {
          col.rows.push_back(i);
          col.values.push_back(c * 0.4);
        }
      }
      if (col.rows.empty()) {
        col.rows.push_back(0);
        col.values.push_back(1.0);
      }
      cols.push_back(col);
      beta.push_back(unit(rng));
    }
    const double b0 = unit(rng) * 0.3;
    const auto margins = compute_margins(b0, cols, beta, y);
    bool near_kink = false;
    for (double m : margins) near_kink |= std::abs(m - 1.0) < 1e-3;
    if (near_kink) continue;
    auto objective = [&](double intercept, const std::vector<double>& b) {
      return data_loss(LossKind::kSquaredHinge,
                       compute_margins(intercept, cols, b, y));
    };
    const double gi = intercept_gradient(margins, y, LossKind::kSquaredHinge);
    const double fi =
        (objective(b0 + h, beta) - objective(b0 - h, beta)) / (2 * h);
    CHECK(std::abs(gi - fi) <= 1e-6 * std::max(1.0, std::abs(gi)));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      auto up = beta;
      auto down = beta;
      up[j] += h;
      down[j] -= h;
      const double g =
          smooth_gradient(cols[j], margins, y, LossKind::kSquaredHinge);
      const double f = (objective(b0, up) - objective(b0, down)) / (2 * h);
      CHECK(std::abs(g - f) <= 1e-6 * std::max(1.0, std::abs(g)));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("rescaling is a reweighted penalty on raw counts") {
  // Fitting on x/z with penalty C equals fitting on x with penalty C z_j,
  // with coefficients related by beta_raw = beta / z.
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> count(0, 3);
  for (int trial = 0; trial < 5; ++trial) {
    oracle::DenseProblem raw;
    oracle::DenseProblem scaled;
    const int n = 8;
    const int p = 3;
    raw.x.assign(n, std::vector<double>(p));
    for (int i = 0; i < n; ++i) {
      raw.y.push_back(i % 2 == 0 ? 1 : -1);
      for (int j = 0; j < p; ++j) raw.x[i][j] = count(rng);
    }
    for (int j = 0; j < p; ++j) raw.x[j][j] += 1;  // no empty column
    scaled = raw;
    raw.C = scaled.C = 0.7;
    for (int j = 0; j < p; ++j) {
      std::vector<double> column;
      for (int i = 0; i < n; ++i) column.push_back(raw.x[i][j]);
      const double z = norm(column, with_q(2));
      raw.weights.push_back(z);
      for (int i = 0; i < n; ++i) scaled.x[i][j] /= z;
    }
    const auto a = oracle::solve(raw);
    const auto b = oracle::solve(scaled);
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-7));
    CHECK(a.intercept == doctest::Approx(b.intercept).epsilon(1e-4));
  }
}
