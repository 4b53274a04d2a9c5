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

#include "attrikit/output.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace attrikit {

std::vector<std::string> feature_names(int arity) {
  std::vector<std::string> names;
  for (int i = 1; i <= arity; ++i) names.push_back(fmt::format("x{}", i));
  return names;
}

std::string format_double(double v) { return fmt::format("{}", v); }

std::string attribution_to_json(const AttributionResult& result, int indent) {
  nlohmann::ordered_json j;
  j["method"] = to_string(result.method);
  j["features"] = feature_names(static_cast<int>(result.attributions.size()));
  j["attributions"] = result.attributions;
  j["gap"] = result.gap;
  j["evals"] = result.model_evals;
  j["gradient_evals"] = result.gradient_evals;
  j["value_o"] = result.value_o;
  j["value_r"] = result.value_r;
  if (result.method == Method::kBShapSampled) {
    j["standard_errors"] = result.standard_errors;
  }
  if (result.seed) j["seed"] = *result.seed;
  if (result.permutations) j["permutations"] = *result.permutations;
  if (result.segments) j["segments"] = *result.segments;
  return j.dump(indent);
}

std::string attribution_csv_header(int arity) {
  std::string out = "method,gap,evals,gradient_evals";
  for (const auto& name : feature_names(arity)) out += "," + name;
  return out;
}

std::string attribution_csv_row(const AttributionResult& result) {
  std::string out = fmt::format("{},{},{},{}", to_string(result.method),
                                format_double(result.gap), result.model_evals,
                                result.gradient_evals);
  for (double v : result.attributions) out += "," + format_double(v);
  return out;
}

}  // namespace attrikit
