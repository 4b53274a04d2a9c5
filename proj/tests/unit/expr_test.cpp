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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "attrikit/error.hpp"
#include "attrikit/expr.hpp"
#include "unit/oracles.hpp"

namespace attrikit {
namespace {

double eval(const std::string& src, int arity, std::vector<double> x) {
  ExprModel m({"t", arity, parse_expression(src, arity)});
  return m.evaluate(x);
}

std::vector<double> grad(const std::string& src, int arity, std::vector<double> x) {
  ExprModel m({"t", arity, parse_expression(src, arity)});
  return m.gradient(x);
}

TEST(ParseExpression, TopLevelSumOverMaxAndPower) {
  const Expr e = parse_expression("max(0, x1) + x2^3", 5);
  ASSERT_EQ(e.op, Op::kAdd);
  ASSERT_EQ(e.args.size(), 2u);
  EXPECT_EQ(e.args[0].op, Op::kMax);
  EXPECT_EQ(e.args[0].args[0], Expr::constant(0.0));
  EXPECT_EQ(e.args[0].args[1], Expr::variable(1));
  EXPECT_EQ(e.args[1].op, Op::kPow);
  EXPECT_EQ(e.args[1].value, 3.0);
  EXPECT_EQ(e.args[1].args[0], Expr::variable(2));
}

TEST(ParseExpression, SingleVariable) {
  EXPECT_EQ(parse_expression("x1", 1), Expr::variable(1));
  EXPECT_EQ(parse_expression("  ( x1 ) ", 1), Expr::variable(1));
}

TEST(ParseExpression, Precedence) {
  // + binds loosest, then *, then ^; ^ is right associative.
  EXPECT_EQ(parse_expression("x1 + x2 * x3", 3),
            Expr::binary(Op::kAdd, Expr::variable(1),
                         Expr::binary(Op::kMul, Expr::variable(2), Expr::variable(3))));
  EXPECT_EQ(parse_expression("x1 - x2 - x3", 3),
            Expr::binary(Op::kSub,
                         Expr::binary(Op::kSub, Expr::variable(1), Expr::variable(2)),
                         Expr::variable(3)));
  EXPECT_EQ(parse_expression("2 * x1^2", 1),
            Expr::binary(Op::kMul, Expr::constant(2), Expr::power(Expr::variable(1), 2)));
  EXPECT_DOUBLE_EQ(eval("2^3^2", 1, {0.0}), 512.0);
  EXPECT_DOUBLE_EQ(eval("x1 / 4 / 2", 1, {16.0}), 2.0);
  // Unary minus binds tighter than power.
  EXPECT_DOUBLE_EQ(eval("-x1^2", 1, {3.0}), 9.0);
  EXPECT_EQ(parse_expression("-2.5", 1), Expr::constant(-2.5));
  EXPECT_EQ(parse_expression("-x1", 1), Expr::unary(Op::kNeg, Expr::variable(1)));
}

TEST(ParseExpression, NumbersAndCalls) {
  EXPECT_DOUBLE_EQ(eval("1.5e2 + 2E-1 + .5", 1, {0.0}), 150.7);
  EXPECT_DOUBLE_EQ(eval("relu(x1) + abs(x2) + exp(0) + sqrt(x3)", 3, {-1, -2, 9}), 6.0);
  EXPECT_DOUBLE_EQ(eval("max(x1, x2, x3) - min(x1, x2, x3)", 3, {1, 5, -2}), 7.0);
  EXPECT_DOUBLE_EQ(eval("x1^0.5", 1, {16.0}), 4.0);
  EXPECT_DOUBLE_EQ(eval("(1 + abs(x1))^-1", 1, {-3.0}), 0.25);
}

TEST(ParseExpression, VariableOutOfRange) {
  try {
    parse_expression("x1 + x9", 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 5u);
    EXPECT_NE(std::string(e.what()).find("out of range"), std::string::npos);
  }
  EXPECT_THROW(parse_expression("x0", 2), ParseError);
}

TEST(ParseExpression, Errors) {
  EXPECT_THROW(parse_expression("", 1), ParseError);
  EXPECT_THROW(parse_expression("x1 +", 1), ParseError);
  EXPECT_THROW(parse_expression("(x1", 1), ParseError);
  EXPECT_THROW(parse_expression("x1 x1", 1), ParseError);
  EXPECT_THROW(parse_expression("foo(x1)", 1), ParseError);
  EXPECT_THROW(parse_expression("y1", 1), ParseError);
  EXPECT_THROW(parse_expression("max(x1)", 1), ParseError);
  EXPECT_THROW(parse_expression("exp(x1, x1)", 1), ParseError);
  EXPECT_THROW(parse_expression("x1 ^ x1", 1), ParseError);
  EXPECT_THROW(parse_expression("x1 ^ 0.3", 1), ParseError);
  try {
    parse_expression("x1 * (x1 + )", 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 11u);
    EXPECT_NE(std::string(e.what()).find("expected"), std::string::npos);
  }
  try {
    parse_expression("2 * x1^x1", 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("non-constant exponent"), std::string::npos);
  }
  try {
    parse_expression("1 + bogus(x1)", 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
    EXPECT_NE(std::string(e.what()).find("unknown identifier"), std::string::npos);
  }
}

TEST(Evaluate, Examples) {
  EXPECT_EQ(eval("x1 * x2", 2, {3, 4}), 12.0);
  EXPECT_EQ(eval("sqrt(abs(x1))", 1, {-4}), 2.0);

  ExprModel eq2(builtin_model("additive_eq2"));
  const std::vector<double> zero(5, 0.0);
  // Term by term: max(0,0) + 0^3 + exp(0) + 1/(1+0) + sqrt(0).
  const double expected = std::max(0.0, 0.0) + std::pow(0.0, 3) + std::exp(-2.0 * 0.0) +
                          1.0 / (1.0 + std::fabs(0.0)) + std::sqrt(std::fabs(0.0));
  EXPECT_EQ(expected, 2.0);
  EXPECT_EQ(eq2.evaluate(zero), expected);
}

TEST(Evaluate, MatchesHandWrittenZoo) {
  ExprModel eq2(builtin_model("additive_eq2"));
  ExprModel eq3(builtin_model("interaction_eq3"));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(8);
    for (auto& v : x) v = u(rng);
    const double f2 = std::max(0.0, x[0]) + x[1] * x[1] * x[1] + std::exp(-2 * x[2]) +
                      1.0 / (1.0 + std::fabs(x[3])) + std::sqrt(std::fabs(x[4]));
    EXPECT_NEAR(eq2.evaluate(std::span(x).first(5)), f2, 1e-14 * (1 + std::fabs(f2)));
    double f3 = 0.0;
    for (double v : x) f3 += v;
    f3 += x[0] * x[1] + 0.5 * x[2] * x[3] * x[3] + 2 * std::max(x[4], x[5]) +
          1.5 * std::fabs(x[6] + x[7]);
    EXPECT_NEAR(eq3.evaluate(x), f3, 1e-13 * (1 + std::fabs(f3)));
  }
}

TEST(Evaluate, DomainErrorsNameTheSubexpression) {
  ExprModel m({"t", 2, parse_expression("x2 + sqrt(x1 - 1)", 2)});
  try {
    m.evaluate(std::vector<double>{0.0, 1.0});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.subexpression(), "sqrt((x1 - 1))");
  }
  EXPECT_THROW(eval("1 / x1", 1, {0.0}), DomainError);
  EXPECT_THROW(eval("x1^-1", 1, {0.0}), DomainError);
  EXPECT_THROW(eval("x1^1.5", 1, {-1.0}), DomainError);
  EXPECT_THROW(eval("exp(x1)", 1, {1000.0}), DomainError);
  EXPECT_THROW(grad("sqrt(x1)", 1, {0.0}), DomainError);
  EXPECT_EQ(eval("sqrt(x1)", 1, {0.0}), 0.0);
}

TEST(Evaluate, ArgumentChecks) {
  ExprModel m(builtin_model("max2"));
  EXPECT_THROW(check_point(m, std::vector<double>{1.0}), ArgumentError);
  EXPECT_THROW(check_point(m, std::vector<double>{1.0, NAN}), ArgumentError);
  EXPECT_NO_THROW(check_point(m, std::vector<double>{1.0, 2.0}));
}

TEST(Gradient, Examples) {
  EXPECT_EQ(grad("x1 * x2^2", 2, {1, 1}), (std::vector<double>{1, 2}));
  EXPECT_EQ(grad("max(x1, x2)", 2, {2, 1}), (std::vector<double>{1, 0}));
}

TEST(Gradient, SubgradientConvention) {
  EXPECT_EQ(grad("max(x1, x2)", 2, {1, 1}), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(grad("min(x1, x2, x3)", 3, {1, 1, 1}),
            (std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}));
  EXPECT_EQ(grad("relu(x1)", 1, {0}), (std::vector<double>{0}));
  EXPECT_EQ(grad("abs(x1)", 1, {0}), (std::vector<double>{0}));
  EXPECT_EQ(grad("max(0, x1)", 1, {0}), (std::vector<double>{0.5}));
  // A zero adjoint never reaches the singular sqrt.
  EXPECT_EQ(grad("0 * sqrt(x1) + x2", 2, {0, 3}), (std::vector<double>{0, 1}));
}

// Distance below which the central-difference oracle is itself unreliable.
bool near_switch(const Model& m, const std::vector<double>& x, double margin) {
  std::vector<double> s(m.switch_count());
  m.switching_values(x, s);
  for (double v : s) {
    if (std::fabs(v) < margin) return true;
  }
  return false;
}

std::vector<ModelDefinition> zoo() {
  std::vector<ModelDefinition> out{builtin_model("additive_eq2"),
                                   builtin_model("interaction_eq3"),
                                   builtin_model("max2"), builtin_model("relu_sum2"),
                                   resolve_builtin("poly_interaction(0.5,-1,2,1.5)")};
  for (int p = 2; p <= 8; ++p) out.push_back(resolve_builtin("product" + std::to_string(p)));
  return out;
}

TEST(Gradient, MatchesCentralDifferencesOnZoo) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (const auto& def : zoo()) {
    ExprModel m(def);
    const testing::Fn f = [&](const std::vector<double>& x) { return m.evaluate(x); };
    // sqrt(|x|) is singular at 0, not merely kinked: the h^2 f''' / f' truncation
    // term of the oracle exceeds 1e-6 inside |x| < 4e-3, so singular switches
    // get a wider exclusion than the 1e-3 used for max/abs/relu.
    const double margin = def.name == "additive_eq2" ? 1e-2 : 1e-3;
    int checked = 0;
    while (checked < 1000) {
      std::vector<double> x(static_cast<std::size_t>(def.arity));
      for (auto& v : x) v = u(rng);
      if (near_switch(m, x, 1e-3)) continue;
      if (def.name == "additive_eq2" && std::fabs(x[4]) < margin) continue;
      const auto g = m.gradient(x);
      for (int i = 0; i < def.arity; ++i) {
        const double fd = testing::central_difference(f, x, i, 1e-5);
        const double err = std::fabs(g[static_cast<std::size_t>(i)] - fd);
        EXPECT_LE(err, std::max(1e-6 * std::fabs(fd), 1e-8))
            << def.name << " feature " << i + 1;
      }
      ++checked;
    }
  }
}

TEST(Builtins, Definitions) {
  const auto eq2 = builtin_model("additive_eq2");
  EXPECT_EQ(eq2.arity, 5);
  EXPECT_EQ(eq2.body, parse_expression("max(0, x1) + x2^3 + exp(-2*x3) + (1 + abs(x4))^-1 + "
                                       "sqrt(abs(x5))",
                                       5));
  const double three[] = {3};
  const auto prod = builtin_model("product", three);
  EXPECT_EQ(prod.arity, 3);
  EXPECT_EQ(ExprModel(prod).evaluate(std::vector<double>{2, 3, 4}), 24.0);
  EXPECT_EQ(resolve_builtin("product(3)").body, prod.body);
  EXPECT_EQ(resolve_builtin("product3").body, prod.body);

  const auto poly = resolve_builtin("poly_interaction(0,1,1,1)");
  ExprModel pm(poly);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> x{u(rng), u(rng)};
    EXPECT_NEAR(pm.evaluate(x), x[0] + x[1] + x[0] * x[1] * x[1], 1e-14);
  }
  EXPECT_EQ(builtin_model("max2").body, parse_expression("max(x1, x2)", 2));
  EXPECT_EQ(builtin_model("relu_sum2").body, parse_expression("max(x1 + x2, 0)", 2));
  EXPECT_EQ(builtin_model("interaction_eq3").arity, 8);

  EXPECT_THROW(builtin_model("nope"), ArgumentError);
  EXPECT_THROW(resolve_builtin("product0"), ArgumentError);
  EXPECT_THROW(resolve_builtin("poly_interaction(1,2)"), ArgumentError);
  EXPECT_THROW(builtin_model("additive_eq2", three), ArgumentError);
}

// Random tree generator for the round-trip property.
Expr random_expr(std::mt19937_64& rng, int depth, int arity) {
  std::uniform_int_distribution<int> pick(0, depth <= 1 ? 1 : 11);
  std::uniform_real_distribution<double> cval(-50.0, 50.0);
  auto sub = [&] { return random_expr(rng, depth - 1, arity); };
  switch (pick(rng)) {
    case 0: {
      double c = cval(rng);
      if (rng() % 3 == 0) c = std::round(c);
      if (rng() % 7 == 0) c *= 1e-9;
      return Expr::constant(c);
    }
    case 1:
      return Expr::variable(1 + static_cast<int>(rng() % static_cast<unsigned>(arity)));
    case 2:
      return Expr::unary(Op::kNeg, sub());
    case 3:
      return Expr::binary(Op::kAdd, sub(), sub());
    case 4:
      return Expr::binary(Op::kSub, sub(), sub());
    case 5:
      return Expr::binary(Op::kMul, sub(), sub());
    case 6:
      return Expr::binary(Op::kDiv, sub(), sub());
    case 7: {
      static const double kExp[] = {2, 3, -1, 0.5, -1.5, 4, 0};
      return Expr::power(sub(), kExp[rng() % 7]);
    }
    case 8: {
      static const Op kUnary[] = {Op::kExp, Op::kSqrt, Op::kAbs, Op::kRelu};
      return Expr::call(kUnary[rng() % 4], {sub()});
    }
    default: {
      std::vector<Expr> args;
      const int n = 2 + static_cast<int>(rng() % 3);
      for (int k = 0; k < n; ++k) args.push_back(sub());
      return Expr::call(rng() % 2 ? Op::kMax : Op::kMin, std::move(args));
    }
  }
}

int depth_of(const Expr& e) {
  int d = 0;
  for (const auto& a : e.args) d = std::max(d, depth_of(a));
  return d + 1;
}

TEST(RoundTrip, ZooModels) {
  for (const auto& def : zoo()) {
    EXPECT_EQ(parse_expression(to_string(def.body), def.arity), def.body) << def.name;
  }
}

TEST(RoundTrip, RandomTrees) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 500; ++t) {
    const int arity = 1 + static_cast<int>(rng() % 6);
    const Expr e = random_expr(rng, 1 + static_cast<int>(rng() % 6), arity);
    ASSERT_LE(depth_of(e), 6);
    const std::string text = to_string(e);
    EXPECT_EQ(parse_expression(text, arity), e) << text;
  }
}

TEST(Purity, RepeatedAndConcurrentEvaluationIsBitIdentical) {
  ExprModel m(builtin_model("interaction_eq3"));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  std::vector<std::vector<double>> pts(200, std::vector<double>(8));
  for (auto& p : pts) {
    for (auto& v : p) v = u(rng);
  }
  std::vector<double> first(pts.size()), second(pts.size());
  std::vector<std::vector<double>> g1(pts.size()), g2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    first[i] = m.evaluate(pts[i]);
    g1[i] = m.gradient(pts[i]);
  }
  std::thread a([&] {
    for (std::size_t i = 0; i < pts.size(); i += 2) {
      second[i] = m.evaluate(pts[i]);
      g2[i] = m.gradient(pts[i]);
    }
  });
  std::thread b([&] {
    for (std::size_t i = 1; i < pts.size(); i += 2) {
      second[i] = m.evaluate(pts[i]);
      g2[i] = m.gradient(pts[i]);
    }
  });
  a.join();
  b.join();
  EXPECT_EQ(std::memcmp(first.data(), second.data(), first.size() * sizeof(double)), 0);
  EXPECT_EQ(g1, g2);
}

TEST(ModelFile, ParseAndRoundTrip) {
  const auto def = parse_model_file(
      "# interaction toy\n\nmodel toy arity 3 := x1 * x2 + max(x3, 0)\n");
  EXPECT_EQ(def.name, "toy");
  EXPECT_EQ(def.arity, 3);
  EXPECT_EQ(ExprModel(def).evaluate(std::vector<double>{2, 3, -1}), 6.0);
  const auto again = parse_model_file(to_model_file(def));
  EXPECT_EQ(again.name, def.name);
  EXPECT_EQ(again.body, def.body);

  EXPECT_THROW(parse_model_file("model toy := x1"), ParseError);
  EXPECT_THROW(parse_model_file("model toy arity 0 := 1"), ParseError);
  EXPECT_THROW(parse_model_file("model toy arity 1 := x2"), ParseError);
  EXPECT_THROW(load_model_file("/nonexistent/model.txt"), IoError);

  const auto path = std::filesystem::temp_directory_path() / "attrikit_expr_test.model";
  {
    std::ofstream(path) << to_model_file(def);
  }
  EXPECT_EQ(load_model_file(path.string()).body, def.body);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace attrikit
