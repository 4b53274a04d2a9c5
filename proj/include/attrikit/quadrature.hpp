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

#ifndef ATTRIKIT_QUADRATURE_HPP_
#define ATTRIKIT_QUADRATURE_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace attrikit {

enum class QuadratureRule { kMidpoint, kTrapezoid, kGaussLegendre };

// Nodes in ascending order on [0, 1] with weights summing to 1.
struct QuadratureNodes {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// midpoint: m cells, m nodes. trapezoid: m cells, m + 1 nodes.
// gauss_legendre: m nodes, exact for polynomials of degree 2m - 1.
QuadratureNodes quadrature_nodes(QuadratureRule rule, int steps);

std::string to_string(QuadratureRule rule);
// Accepts midpoint, trapezoid, gauss_legendre (or gauss).
QuadratureRule parse_quadrature_rule(std::string_view text);

}  // namespace attrikit

#endif  // ATTRIKIT_QUADRATURE_HPP_
