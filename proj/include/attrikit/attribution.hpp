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

#ifndef ATTRIKIT_ATTRIBUTION_HPP_
#define ATTRIKIT_ATTRIBUTION_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrikit/model.hpp"
#include "attrikit/parallel.hpp"
#include "attrikit/quadrature.hpp"

namespace attrikit {

// Point of interest and reference point. Feature indices in this API are
// 0-based; printed feature names are x1..xP.
struct BaselinePair {
  std::vector<double> x_o;
  std::vector<double> x_r;

  std::size_t dimension() const { return x_o.size(); }
  // Throws ArgumentError on a dimension mismatch or non-finite entries.
  void validate(int arity) const;
};

enum class Method { kBShapExact, kBShapSampled, kIg };
std::string to_string(Method method);

struct AttributionResult {
  Method method = Method::kBShapExact;
  std::vector<double> attributions;
  // sum(attributions) - (f(x_o) - f(x_r))
  double gap = 0.0;
  double value_o = 0.0;
  double value_r = 0.0;
  std::uint64_t model_evals = 0;
  std::uint64_t gradient_evals = 0;
  // Sampled estimator only.
  std::vector<double> standard_errors;
  std::optional<std::uint64_t> seed;
  std::optional<int> permutations;
  // IG only: number of path segments the integral was split into.
  std::optional<int> segments;
};

struct ExactOptions {
  int max_arity = 20;
};

struct SamplingSpec {
  int permutations = 1000;
  std::uint64_t seed = 0;
};

struct QuadratureSpec {
  QuadratureRule rule = QuadratureRule::kGaussLegendre;
  // Nodes per path segment.
  int steps = 64;
  // Split the path where a switching function of the model changes sign and
  // integrate each piece separately.
  bool split_at_kinks = true;
  // Uniform samples used to bracket sign changes before bisection.
  int scan_points = 1024;
};

// v(S) = f(x_o on S, x_r elsewhere). `members` holds 0-based indices.
double coalition_value(const Model& model, const BaselinePair& pair,
                       std::span<const int> members);
double coalition_value_mask(const Model& model, const BaselinePair& pair,
                            std::uint64_t mask);

// |S|! (P - |S| - 1)! / P! for 0 <= s <= P - 1.
double shapley_weight(int s, int p);
// All weights for s = 0..P-1 via the ratio recurrence.
std::vector<double> shapley_weights(int p);

// Exact baseline Shapley by enumerating all 2^P coalitions once.
AttributionResult bshap_exact(const Model& model, const BaselinePair& pair,
                              const ExactOptions& options = {},
                              const Exec& exec = {});

// Permutation-sampling estimator: every sampled ordering contributes each
// feature's marginal v(pred ∪ {i}) - v(pred). SE is the sample standard
// deviation of the marginals over sqrt(M), 0 when M == 1.
AttributionResult bshap_sampled(const Model& model, const BaselinePair& pair,
                                const SamplingSpec& spec,
                                const Exec& exec = {});

// Integrated gradients along x_r + alpha (x_o - x_r). The gap is the
// quadrature-error diagnostic.
AttributionResult ig_quadrature(const Model& model, const BaselinePair& pair,
                                const QuadratureSpec& spec = {},
                                const Exec& exec = {});

// Interior alphas in (0, 1) where some switching function of the model
// crosses zero along the straight path, sorted and deduplicated.
std::vector<double> path_breakpoints(const Model& model,
                                     const BaselinePair& pair, int scan_points);

struct ClosedFormAttributions {
  AttributionResult bshap;
  AttributionResult ig;
};

// Closed forms for b0 + b1 x1 + b2 x2 + b12 x1 x2^2.
ClosedFormAttributions closed_form_poly_interaction(
    const std::array<double, 4>& beta, const BaselinePair& pair);

struct TwoFeatureDecomposition {
  double e11 = 0.0;  // f(o1, o2) - f(r1, o2)
  double e12 = 0.0;  // f(o1, r2) - f(r1, r2)
  double phi1 = 0.0;
};

TwoFeatureDecomposition two_feature_decomposition(const Model& model,
                                                  const BaselinePair& pair);

// Brute force over all P! orderings (P <= 10). Independent of the coalition
// weights used by bshap_exact; meant as an oracle.
std::vector<double> bshap_by_orderings(const Model& model,
                                       const BaselinePair& pair);

}  // namespace attrikit

#endif  // ATTRIKIT_ATTRIBUTION_HPP_
