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

#ifndef ATTRIKIT_OUTPUT_HPP_
#define ATTRIKIT_OUTPUT_HPP_

#include <string>
#include <vector>

#include "attrikit/attribution.hpp"

namespace attrikit {

std::vector<std::string> feature_names(int arity);

// {"method", "features", "attributions", "gap", "evals", "gradient_evals",
//  "value_o", "value_r"} plus "standard_errors", "seed", "permutations" for
// the sampled estimator and "segments" for IG. indent < 0 gives one line.
std::string attribution_to_json(const AttributionResult& result, int indent = -1);

// method,gap,evals,gradient_evals,x1,...,xP
std::string attribution_csv_header(int arity);
std::string attribution_csv_row(const AttributionResult& result);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace attrikit

#endif  // ATTRIKIT_OUTPUT_HPP_
