/*
 * Copyright 2026 The attrikit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "attrikit/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "attrikit/error.hpp"

namespace attrikit {
namespace {

// Newton iteration on P_m from the Chebyshev-like initial guess.
QuadratureNodes gauss_legendre(int m) {
  QuadratureNodes q;
  q.nodes.resize(static_cast<std::size_t>(m));
  q.weights.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) p0 = 1.0;
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) p0 = 1.0;
      dp = m * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // half of 2/(...)
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(m - 1 - i);
    q.nodes[lo] = 0.5 * (1.0 - x);
    q.nodes[hi] = 0.5 * (1.0 + x);
    q.weights[lo] = w;
    q.weights[hi] = w;
  }
  if (m % 2 == 1) q.nodes[static_cast<std::size_t>(m / 2)] = 0.5;
  return q;
}

}  // namespace

QuadratureNodes quadrature_nodes(QuadratureRule rule, int steps) {
  if (steps < 1) throw ArgumentError("quadrature step count must be >= 1");
  QuadratureNodes q;
  const double h = 1.0 / steps;
  switch (rule) {
    case QuadratureRule::kMidpoint:
      for (int k = 0; k < steps; ++k) {
        q.nodes.push_back((k + 0.5) * h);
        q.weights.push_back(h);
      }
      return q;
    case QuadratureRule::kTrapezoid:
      for (int k = 0; k <= steps; ++k) {
        q.nodes.push_back(k * h);
        q.weights.push_back(k == 0 || k == steps ? 0.5 * h : h);
      }
      return q;
    case QuadratureRule::kGaussLegendre:
      return gauss_legendre(steps);
  }
  throw ArgumentError("unknown quadrature rule");
}

std::string to_string(QuadratureRule rule) {
  switch (rule) {
    case QuadratureRule::kMidpoint:
      return "midpoint";
    case QuadratureRule::kTrapezoid:
      return "trapezoid";
    case QuadratureRule::kGaussLegendre:
      return "gauss_legendre";
  }
  return "?";
}

QuadratureRule parse_quadrature_rule(std::string_view text) {
  if (text == "midpoint") return QuadratureRule::kMidpoint;
  if (text == "trapezoid") return QuadratureRule::kTrapezoid;
  if (text == "gauss_legendre" || text == "gauss") {
    return QuadratureRule::kGaussLegendre;
  }
  throw ArgumentError(fmt::format("unknown quadrature rule '{}'", text));
}

}  // namespace attrikit
