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

#ifndef ATTRIKIT_AXIOMS_HPP_
#define ATTRIKIT_AXIOMS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "attrikit/attribution.hpp"
#include "attrikit/expr.hpp"

namespace attrikit {

// Tolerances for the attribution axioms.
struct AxiomTolerances {
  double efficiency_bshap = 1e-10;  // scaled by 1 + |f(x_o) - f(x_r)|
  double efficiency_ig = 1e-6;
  double linearity_bshap = 1e-10;
  double linearity_ig = 1e-8;
  double dummy = 1e-12;
  double symmetry = 1e-10;
  double affine = 1e-8;
  double proportionality = 1e-8;  // relative to the common ratio
  int monotonicity_sweep = 50;
};

struct AxiomOptions {
  int trials = 20;
  std::uint64_t seed = 0;
  double low = -1.0;
  double high = 2.0;
  QuadratureSpec quadrature;
  AxiomTolerances tolerances;
  Exec exec;
};

struct AxiomCheck {
  std::string axiom;
  std::string method;  // "bshap" or "ig"
  bool passed = true;
  double worst = 0.0;  // largest violation measure seen
  double tolerance = 0.0;
  std::string detail;
};

struct AxiomReport {
  std::string model;
  std::vector<AxiomCheck> checks;

  bool all_passed() const;
};

// Runs Efficiency, Linearity, Dummy, Affine Scale Invariance and Symmetry for
// both methods, Demand Monotonicity for BShap and Proportionality for IG on
// random pairs drawn uniformly from [low, high]^P.
//
// Checks that need a particular structure derive it from the model:
//   Dummy            appends an unused input x_{P+1}
//   Symmetry         f(x) + f(x with x1, x2 swapped)
//   Proportionality  f(s, ..., s) with s = x1 + ... + xP, baseline 0
//   Monotonicity     features with nonnegative sampled partials, otherwise
//                    the reference model relu(x1) + x2
AxiomReport run_axioms(const ModelDefinition& model, const AxiomOptions& options);

std::string axiom_report_to_json(const AxiomReport& report, int indent = 2);

}  // namespace attrikit

#endif  // ATTRIKIT_AXIOMS_HPP_
