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

#ifndef ATTRIKIT_EXPR_HPP_
#define ATTRIKIT_EXPR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attrikit/model.hpp"

namespace attrikit {

enum class Op {
  kConstant,
  kVariable,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,  // constant exponent stored in Expr::value
  kExp,
  kSqrt,
  kAbs,
  kRelu,
  kMax,  // n-ary, at least two arguments
  kMin,
};

// Expression tree with value semantics. Variables are 1-based (x1..xP).
struct Expr {
  Op op = Op::kConstant;
  double value = 0.0;
  int var = 0;
  std::vector<Expr> args;

  bool operator==(const Expr&) const = default;

  static Expr constant(double v);
  static Expr variable(int index);
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr power(Expr base, double exponent);
  static Expr call(Op op, std::vector<Expr> args);
};

// Number of arguments `op` takes; -1 for the n-ary max/min.
int op_arity(Op op);

// Largest variable index referenced, 0 for a constant expression.
int max_variable(const Expr& e);

// used[i] is true when x_{i+1} occurs in the expression.
std::vector<bool> used_variables(const Expr& e, int arity);

// True when the tree contains max, min, abs, relu, or a non-polynomial power.
bool has_kinks(const Expr& e);

// Replaces variable x_i with replacements[i-1].
Expr substitute(const Expr& e, std::span<const Expr> replacements);

// Renders the tree in the DSL grammar; parse_expression(to_string(e)) == e.
std::string to_string(const Expr& e);

// Grammar, loosest to tightest: + -, * /, ^ (right associative, constant
// exponent), unary minus, primary. Primaries are numbers, x1..xP,
// parenthesized expressions and exp/sqrt/abs/relu/max/min calls.
// A unary minus applied directly to a numeric literal yields a negative
// constant.
Expr parse_expression(std::string_view source, int arity);

struct ModelDefinition {
  std::string name;
  int arity = 0;
  Expr body;
};

// Parses `model <name> arity <P> := <expression>`. Blank lines and lines
// starting with '#' are ignored.
ModelDefinition parse_model_file(std::string_view text);
ModelDefinition load_model_file(const std::string& path);
std::string to_model_file(const ModelDefinition& def);

// Builtin zoo: additive_eq2, interaction_eq3, product (params: {P}),
// poly_interaction (params: {b0, b1, b2, b12}), max2, relu_sum2.
ModelDefinition builtin_model(std::string_view name,
                              std::span<const double> params = {});

// Accepts "name", "name(a,b,...)" and the shorthand "productN".
ModelDefinition resolve_builtin(std::string_view spec);
std::vector<std::string> builtin_names();

// Model backed by an expression tree, compiled to a flat tape for evaluation
// and reverse-mode differentiation.
//
// Subgradient convention: ties in max/min split the derivative equally among
// the tied arguments, relu'(0) = 0 and abs'(0) = 0. sqrt and fractional
// powers at 0 have no finite derivative and raise DomainError.
class ExprModel final : public Model {
 public:
  explicit ExprModel(ModelDefinition def);

  int arity() const override { return def_.arity; }
  const std::string& name() const override { return def_.name; }
  const ModelDefinition& definition() const { return def_; }

  double evaluate(std::span<const double> x) const override;
  double gradient(std::span<const double> x,
                  std::span<double> grad) const override;
  using Model::gradient;

  std::size_t switch_count() const override { return switches_.size(); }
  void switching_values(std::span<const double> x,
                        std::span<double> out) const override;

 private:
  struct Instr {
    Op op;
    double value;
    int var;
    int lhs;
    int rhs;
    int args_begin;  // into operands_ for max/min
    int args_count;
  };
  // Switching function: value(lhs) - value(rhs), or value(lhs) if rhs < 0.
  struct Switch {
    int lhs;
    int rhs;
  };

  int compile(const Expr& e);
  void forward(std::span<const double> x, std::vector<double>& vals) const;
  [[noreturn]] void fail(int node, const std::string& what) const;

  ModelDefinition def_;
  std::vector<Instr> tape_;
  std::vector<int> operands_;
  std::vector<std::string> labels_;
  std::vector<Switch> switches_;
};

}  // namespace attrikit

#endif  // ATTRIKIT_EXPR_HPP_
