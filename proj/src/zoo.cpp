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

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "attrikit/error.hpp"
#include "attrikit/expr.hpp"

namespace attrikit {
namespace {

constexpr std::string_view kAdditive =
    "max(0, x1) + x2^3 + exp(-2*x3) + (1 + abs(x4))^-1 + sqrt(abs(x5))";

constexpr std::string_view kInteraction =
    "x1 + x2 + x3 + x4 + x5 + x6 + x7 + x8 + x1*x2 + 0.5*x3*x4^2"
    " + 2*max(x5, x6) + 1.5*abs(x7 + x8)";

void expect_params(std::string_view name, std::span<const double> params,
                   std::size_t count) {
  if (params.size() != count) {
    throw ArgumentError(fmt::format("builtin {} takes {} parameter(s), got {}",
                                    name, count, params.size()));
  }
  for (double p : params) {
    if (!std::isfinite(p)) {
      throw ArgumentError(fmt::format("builtin {}: non-finite parameter", name));
    }
  }
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"additive_eq2", "interaction_eq3", "product", "poly_interaction",
          "max2",         "relu_sum2"};
}

ModelDefinition builtin_model(std::string_view name,
                              std::span<const double> params) {
  if (name == "additive_eq2") {
    expect_params(name, params, 0);
    return {"additive_eq2", 5, parse_expression(kAdditive, 5)};
  }
  if (name == "interaction_eq3") {
    expect_params(name, params, 0);
    return {"interaction_eq3", 8, parse_expression(kInteraction, 8)};
  }
  if (name == "product") {
    expect_params(name, params, 1);
    const double p = params[0];
    if (p < 1 || p > 64 || p != std::floor(p)) {
      throw ArgumentError("product arity must be an integer in [1, 64]");
    }
    const int arity = static_cast<int>(p);
    Expr body = Expr::variable(1);
    for (int i = 2; i <= arity; ++i) {
      body = Expr::binary(Op::kMul, std::move(body), Expr::variable(i));
    }
    return {fmt::format("product{}", arity), arity, std::move(body)};
  }
  if (name == "poly_interaction") {
    expect_params(name, params, 4);
    // b0 + b1*x1 + b2*x2 + b12*x1*x2^2
    Expr body = Expr::binary(
        Op::kAdd,
        Expr::binary(
            Op::kAdd,
            Expr::binary(Op::kAdd, Expr::constant(params[0]),
                         Expr::binary(Op::kMul, Expr::constant(params[1]),
                                      Expr::variable(1))),
            Expr::binary(Op::kMul, Expr::constant(params[2]),
                         Expr::variable(2))),
        Expr::binary(
            Op::kMul,
            Expr::binary(Op::kMul, Expr::constant(params[3]), Expr::variable(1)),
            Expr::power(Expr::variable(2), 2.0)));
    return {fmt::format("poly_interaction({},{},{},{})", params[0], params[1],
                        params[2], params[3]),
            2, std::move(body)};
  }
  if (name == "max2") {
    expect_params(name, params, 0);
    return {"max2", 2, parse_expression("max(x1, x2)", 2)};
  }
  if (name == "relu_sum2") {
    expect_params(name, params, 0);
    return {"relu_sum2", 2, parse_expression("max(x1 + x2, 0)", 2)};
  }
  throw ArgumentError(fmt::format("unknown builtin model '{}'", name));
}

ModelDefinition resolve_builtin(std::string_view spec) {
  std::vector<double> params;
  std::string_view name = spec;
  if (const auto open = spec.find('('); open != std::string_view::npos) {
    if (spec.back() != ')') {
      throw ArgumentError(fmt::format("malformed builtin spec '{}'", spec));
    }
    name = spec.substr(0, open);
    std::string_view rest = spec.substr(open + 1, spec.size() - open - 2);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      std::string_view item = rest.substr(0, comma);
      while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
      while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
        throw ArgumentError(fmt::format("malformed builtin parameter '{}'", item));
      }
      params.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  } else if (name.size() > 7 && name.substr(0, 7) == "product") {
    int p = 0;
    auto [ptr, ec] = std::from_chars(name.data() + 7, name.data() + name.size(), p);
    if (ec != std::errc() || ptr != name.data() + name.size()) {
      throw ArgumentError(fmt::format("unknown builtin model '{}'", spec));
    }
    params.push_back(p);
    name = "product";
  }
  return builtin_model(name, params);
}

}  // namespace attrikit
