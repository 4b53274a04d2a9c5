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

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "attrikit/error.hpp"
#include "attrikit/expr.hpp"

namespace attrikit {

void check_point(const Model& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.arity()) {
    throw ArgumentError(fmt::format("point has dimension {}, model {} has arity {}",
                                    x.size(), model.name(), model.arity()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw ArgumentError("point has a non-finite entry");
  }
}

ExprModel::ExprModel(ModelDefinition def) : def_(std::move(def)) {
  if (def_.arity < 1) throw ArgumentError("model arity must be at least 1");
  if (max_variable(def_.body) > def_.arity) {
    throw ArgumentError(fmt::format("model {} references x{} beyond arity {}",
                                    def_.name, max_variable(def_.body),
                                    def_.arity));
  }
  compile(def_.body);
}

int ExprModel::compile(const Expr& e) {
  Instr in{e.op, e.value, e.var, -1, -1, 0, 0};
  const int want = op_arity(e.op);
  if ((want >= 0 && static_cast<int>(e.args.size()) != want) ||
      (want < 0 && e.args.size() < 2)) {
    throw ArgumentError("malformed expression: wrong operand count");
  }
  if (e.op == Op::kVariable && e.var < 1) {
    throw ArgumentError("variable index must be positive");
  }
  if (e.op == Op::kPow &&
      (!std::isfinite(e.value) || 2.0 * e.value != std::floor(2.0 * e.value))) {
    throw ArgumentError("power exponent must be an integer or half-integer");
  }
  if (want < 0) {
    std::vector<int> kids;
    for (const auto& a : e.args) kids.push_back(compile(a));
    in.args_begin = static_cast<int>(operands_.size());
    in.args_count = static_cast<int>(kids.size());
    operands_.insert(operands_.end(), kids.begin(), kids.end());
    for (std::size_t i = 0; i < kids.size(); ++i) {
      for (std::size_t j = i + 1; j < kids.size(); ++j) {
        switches_.push_back({kids[i], kids[j]});
      }
    }
  } else {
    if (want >= 1) in.lhs = compile(e.args[0]);
    if (want == 2) in.rhs = compile(e.args[1]);
    switch (e.op) {
      case Op::kAbs:
      case Op::kRelu:
      case Op::kSqrt:
        switches_.push_back({in.lhs, -1});
        break;
      case Op::kPow:
        if (e.value < 0 || e.value != std::floor(e.value)) {
          switches_.push_back({in.lhs, -1});
        }
        break;
      case Op::kDiv:
        switches_.push_back({in.rhs, -1});
        break;
      default:
        break;
    }
  }
  tape_.push_back(in);
  labels_.push_back(to_string(e));
  return static_cast<int>(tape_.size()) - 1;
}

void ExprModel::fail(int node, const std::string& what) const {
  throw DomainError(what, labels_[static_cast<std::size_t>(node)]);
}

void ExprModel::forward(std::span<const double> x,
                        std::vector<double>& vals) const {
  check_point(*this, x);
  vals.resize(tape_.size());
  for (std::size_t k = 0; k < tape_.size(); ++k) {
    const Instr& in = tape_[k];
    const int node = static_cast<int>(k);
    const double a = in.lhs >= 0 ? vals[static_cast<std::size_t>(in.lhs)] : 0.0;
    const double b = in.rhs >= 0 ? vals[static_cast<std::size_t>(in.rhs)] : 0.0;
    double v = 0.0;
    switch (in.op) {
      case Op::kConstant:
        v = in.value;
        break;
      case Op::kVariable:
        v = x[static_cast<std::size_t>(in.var - 1)];
        break;
      case Op::kNeg:
        v = -a;
        break;
      case Op::kAdd:
        v = a + b;
        break;
      case Op::kSub:
        v = a - b;
        break;
      case Op::kMul:
        v = a * b;
        break;
      case Op::kDiv:
        if (b == 0.0) fail(node, "division by zero");
        v = a / b;
        break;
      case Op::kPow:
        if (a == 0.0 && in.value < 0) fail(node, "zero raised to a negative power");
        if (a < 0.0 && in.value != std::floor(in.value)) {
          fail(node, "fractional power of a negative number");
        }
        v = std::pow(a, in.value);
        break;
      case Op::kExp:
        v = std::exp(a);
        break;
      case Op::kSqrt:
        if (a < 0.0) fail(node, "square root of a negative number");
        v = std::sqrt(a);
        break;
      case Op::kAbs:
        v = std::fabs(a);
        break;
      case Op::kRelu:
        v = a > 0.0 ? a : 0.0;
        break;
      case Op::kMax:
      case Op::kMin: {
        const int* ops = operands_.data() + in.args_begin;
        v = vals[static_cast<std::size_t>(ops[0])];
        for (int i = 1; i < in.args_count; ++i) {
          const double c = vals[static_cast<std::size_t>(ops[i])];
          v = in.op == Op::kMax ? std::max(v, c) : std::min(v, c);
        }
        break;
      }
    }
    if (!std::isfinite(v)) fail(node, "non-finite result");
    vals[k] = v;
  }
}

double ExprModel::evaluate(std::span<const double> x) const {
  thread_local std::vector<double> vals;
  forward(x, vals);
  return vals.back();
}

double ExprModel::gradient(std::span<const double> x,
                           std::span<double> grad) const {
  thread_local std::vector<double> vals;
  thread_local std::vector<double> adj;
  forward(x, vals);
  if (static_cast<int>(grad.size()) != def_.arity) {
    throw ArgumentError("gradient buffer has the wrong size");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  adj.assign(tape_.size(), 0.0);
  adj.back() = 1.0;
  for (std::size_t k = tape_.size(); k-- > 0;) {
    const Instr& in = tape_[k];
    const double g = adj[k];
    if (g == 0.0) continue;
    const auto lhs = static_cast<std::size_t>(in.lhs);
    const auto rhs = static_cast<std::size_t>(in.rhs);
    const double a = in.lhs >= 0 ? vals[lhs] : 0.0;
    const double b = in.rhs >= 0 ? vals[rhs] : 0.0;
    switch (in.op) {
      case Op::kConstant:
        break;
      case Op::kVariable:
        grad[static_cast<std::size_t>(in.var - 1)] += g;
        break;
      case Op::kNeg:
        adj[lhs] -= g;
        break;
      case Op::kAdd:
        adj[lhs] += g;
        adj[rhs] += g;
        break;
      case Op::kSub:
        adj[lhs] += g;
        adj[rhs] -= g;
        break;
      case Op::kMul:
        adj[lhs] += g * b;
        adj[rhs] += g * a;
        break;
      case Op::kDiv:
        adj[lhs] += g / b;
        adj[rhs] -= g * a / (b * b);
        break;
      case Op::kPow:
        if (in.value == 0.0) break;
        if (a == 0.0 && in.value < 1.0) {
          fail(static_cast<int>(k), "derivative undefined at zero");
        }
        adj[lhs] += g * in.value * std::pow(a, in.value - 1.0);
        break;
      case Op::kExp:
        adj[lhs] += g * vals[k];
        break;
      case Op::kSqrt:
        if (a == 0.0) fail(static_cast<int>(k), "derivative undefined at zero");
        adj[lhs] += g * 0.5 / vals[k];
        break;
      case Op::kAbs:
        if (a > 0.0) {
          adj[lhs] += g;
        } else if (a < 0.0) {
          adj[lhs] -= g;
        }
        break;
      case Op::kRelu:
        if (a > 0.0) adj[lhs] += g;
        break;
      case Op::kMax:
      case Op::kMin: {
        const int* ops = operands_.data() + in.args_begin;
        int ties = 0;
        for (int i = 0; i < in.args_count; ++i) {
          if (vals[static_cast<std::size_t>(ops[i])] == vals[k]) ++ties;
        }
        const double share = g / ties;
        for (int i = 0; i < in.args_count; ++i) {
          const auto idx = static_cast<std::size_t>(ops[i]);
          if (vals[idx] == vals[k]) adj[idx] += share;
        }
        break;
      }
    }
  }
  for (double d : grad) {
    if (!std::isfinite(d)) fail(static_cast<int>(tape_.size()) - 1,
                                "non-finite derivative");
  }
  return vals.back();
}

void ExprModel::switching_values(std::span<const double> x,
                                 std::span<double> out) const {
  thread_local std::vector<double> vals;
  forward(x, vals);
  for (std::size_t i = 0; i < switches_.size(); ++i) {
    const auto& s = switches_[i];
    const double a = vals[static_cast<std::size_t>(s.lhs)];
    out[i] = s.rhs >= 0 ? a - vals[static_cast<std::size_t>(s.rhs)] : a;
  }
}

}  // namespace attrikit
