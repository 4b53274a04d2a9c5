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

#include "attrikit/expr.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "attrikit/error.hpp"

namespace attrikit {

Expr Expr::constant(double v) {
  Expr e;
  e.op = Op::kConstant;
  e.value = v;
  return e;
}

Expr Expr::variable(int index) {
  Expr e;
  e.op = Op::kVariable;
  e.var = index;
  return e;
}

Expr Expr::unary(Op op, Expr arg) {
  if (op_arity(op) != 1 || op == Op::kPow) {
    throw ArgumentError("operator is not unary");
  }
  Expr e;
  e.op = op;
  e.args.push_back(std::move(arg));
  return e;
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (op_arity(op) != 2 && op != Op::kMax && op != Op::kMin) {
    throw ArgumentError("operator is not binary");
  }
  Expr e;
  e.op = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

Expr Expr::power(Expr base, double exponent) {
  Expr e;
  e.op = Op::kPow;
  e.value = exponent;
  e.args.push_back(std::move(base));
  return e;
}

Expr Expr::call(Op op, std::vector<Expr> args) {
  const int want = op_arity(op);
  if ((want >= 0 && static_cast<int>(args.size()) != want) ||
      (want < 0 && args.size() < 2)) {
    throw ArgumentError("wrong number of arguments");
  }
  Expr e;
  e.op = op;
  e.args = std::move(args);
  return e;
}

int op_arity(Op op) {
  switch (op) {
    case Op::kConstant:
    case Op::kVariable:
      return 0;
    case Op::kNeg:
    case Op::kPow:
    case Op::kExp:
    case Op::kSqrt:
    case Op::kAbs:
    case Op::kRelu:
      return 1;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
      return 2;
    case Op::kMax:
    case Op::kMin:
      return -1;
  }
  return 0;
}

int max_variable(const Expr& e) {
  int best = e.op == Op::kVariable ? e.var : 0;
  for (const auto& a : e.args) best = std::max(best, max_variable(a));
  return best;
}

namespace {

void mark_used(const Expr& e, std::vector<bool>& used) {
  if (e.op == Op::kVariable && e.var >= 1 &&
      e.var <= static_cast<int>(used.size())) {
    used[static_cast<std::size_t>(e.var - 1)] = true;
  }
  for (const auto& a : e.args) mark_used(a, used);
}

bool is_polynomial_exponent(double c) {
  return c >= 0 && c == std::floor(c);
}

std::string number(double v) { return fmt::format("{}", v); }

const char* function_name(Op op) {
  switch (op) {
    case Op::kExp:
      return "exp";
    case Op::kSqrt:
      return "sqrt";
    case Op::kAbs:
      return "abs";
    case Op::kRelu:
      return "relu";
    case Op::kMax:
      return "max";
    case Op::kMin:
      return "min";
    default:
      return "";
  }
}

const char* infix(Op op) {
  switch (op) {
    case Op::kAdd:
      return " + ";
    case Op::kSub:
      return " - ";
    case Op::kMul:
      return " * ";
    case Op::kDiv:
      return " / ";
    default:
      return "";
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.op) {
    case Op::kConstant:
      out += number(e.value);
      return;
    case Op::kVariable:
      out += "x" + std::to_string(e.var);
      return;
    case Op::kNeg:
      out += "-(";
      print(e.args[0], out);
      out += ")";
      return;
    case Op::kPow:
      out += "(";
      print(e.args[0], out);
      out += ")^" + number(e.value);
      return;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
      out += "(";
      print(e.args[0], out);
      out += infix(e.op);
      print(e.args[1], out);
      out += ")";
      return;
    default:
      out += function_name(e.op);
      out += "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i > 0) out += ", ";
        print(e.args[i], out);
      }
      out += ")";
      return;
  }
}

}  // namespace

std::vector<bool> used_variables(const Expr& e, int arity) {
  std::vector<bool> used(static_cast<std::size_t>(std::max(arity, 0)), false);
  mark_used(e, used);
  return used;
}

bool has_kinks(const Expr& e) {
  switch (e.op) {
    case Op::kMax:
    case Op::kMin:
    case Op::kAbs:
    case Op::kRelu:
      return true;
    case Op::kPow:
      if (!is_polynomial_exponent(e.value)) return true;
      break;
    default:
      break;
  }
  for (const auto& a : e.args) {
    if (has_kinks(a)) return true;
  }
  return false;
}

Expr substitute(const Expr& e, std::span<const Expr> replacements) {
  if (e.op == Op::kVariable) {
    if (e.var < 1 || e.var > static_cast<int>(replacements.size())) {
      throw ArgumentError(fmt::format("no replacement for x{}", e.var));
    }
    return replacements[static_cast<std::size_t>(e.var - 1)];
  }
  Expr out = e;
  for (auto& a : out.args) a = substitute(a, replacements);
  return out;
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

}  // namespace attrikit
