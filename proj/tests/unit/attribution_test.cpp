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

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "attrikit/attribution.hpp"
#include "attrikit/error.hpp"
#include "attrikit/expr.hpp"
#include "unit/oracles.hpp"

namespace attrikit {
namespace {

ExprModel model(const std::string& src, int arity) {
  return ExprModel({"t", arity, parse_expression(src, arity)});
}

std::vector<double> uniform_point(std::mt19937_64& rng, int p, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(static_cast<std::size_t>(p));
  for (auto& v : x) v = u(rng);
  return x;
}

TEST(CoalitionValue, Examples) {
  const auto f = model("x1 * x2", 2);
  const BaselinePair pair{{1, 1}, {0, 0}};
  const int one[] = {0};
  EXPECT_EQ(coalition_value(f, pair, one), 0.0);
  const auto g = model("x1 + 2 * x2 + x1 * x2", 2);
  const BaselinePair q{{3, 5}, {1, -1}};
  const int both[] = {0, 1};
  EXPECT_EQ(coalition_value(g, q, both), g.evaluate(q.x_o));
  EXPECT_EQ(coalition_value(g, q, {}), g.evaluate(q.x_r));
  EXPECT_EQ(coalition_value_mask(g, q, 0b10), g.evaluate(std::vector<double>{1, 5}));
  const int bad[] = {2};
  EXPECT_THROW(coalition_value(g, q, bad), ArgumentError);
}

TEST(ShapleyWeight, Examples) {
  EXPECT_EQ(shapley_weight(0, 2), 0.5);
  EXPECT_EQ(shapley_weight(1, 2), 0.5);
  EXPECT_NEAR(shapley_weight(1, 3), 1.0 / 6, 1e-16);
  EXPECT_THROW(shapley_weight(2, 2), ArgumentError);
  EXPECT_THROW(shapley_weight(-1, 2), ArgumentError);
}

TEST(ShapleyWeight, SubsetSumsToOne) {
  for (int p = 1; p <= 20; ++p) {
    const auto w = shapley_weights(p);
    ASSERT_EQ(w.size(), static_cast<std::size_t>(p));
    // Each size s has C(P-1, s) subsets of P \ {i}.
    double total = 0.0;
    double binom = 1.0;
    for (int s = 0; s < p; ++s) {
      total += binom * w[static_cast<std::size_t>(s)];
      EXPECT_NEAR(w[static_cast<std::size_t>(s)], shapley_weight(s, p),
                  1e-15 * w[static_cast<std::size_t>(s)]);
      const double direct = std::exp(std::lgamma(s + 1.0) + std::lgamma(p - s + 0.0) -
                                     std::lgamma(p + 1.0));
      EXPECT_NEAR(w[static_cast<std::size_t>(s)], direct, 1e-12 * direct);
      binom = binom * (p - 1 - s) / (s + 1);
    }
    EXPECT_NEAR(total, 1.0, 1e-12) << "P=" << p;
  }
}

TEST(BShapExact, Examples) {
  const auto r1 = bshap_exact(model("x1 * x2", 2), {{1, 1}, {0, 0}});
  EXPECT_EQ(r1.method, Method::kBShapExact);
  EXPECT_EQ(r1.attributions, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(r1.model_evals, 4u);

  // Hand enumeration of x1 x2^2: v(0)=0, v(1)=0, v(2)=0, v(12)=1.
  const auto r2 = bshap_exact(model("x1 * x2^2", 2), {{1, 1}, {0, 0}});
  EXPECT_EQ(r2.attributions, (std::vector<double>{0.5, 0.5}));

  const auto r3 = bshap_exact(model("x1", 2), {{1, 5}, {0, 0}});
  EXPECT_EQ(r3.attributions, (std::vector<double>{1, 0}));
}

TEST(BShapExact, MatchesSubsetOracleAndOrderingEnumeration) {
  std::mt19937_64 rng(8);
  for (const char* spec : {"additive_eq2", "interaction_eq3", "max2", "relu_sum2", "product6"}) {
    ExprModel m(resolve_builtin(spec));
    const testing::Fn f = [&](const std::vector<double>& x) { return m.evaluate(x); };
    for (int t = 0; t < 10; ++t) {
      const BaselinePair pair{uniform_point(rng, m.arity(), -1, 2),
                              uniform_point(rng, m.arity(), -1, 2)};
      const auto got = bshap_exact(m, pair);
      const auto want = testing::subset_shapley(f, pair.x_o, pair.x_r);
      const auto perm = bshap_by_orderings(m, pair);
      for (int i = 0; i < m.arity(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        EXPECT_NEAR(got.attributions[k], want[k], 1e-11) << spec;
        EXPECT_NEAR(got.attributions[k], perm[k], 1e-11) << spec;
      }
      EXPECT_LE(std::fabs(got.gap), 1e-10 * (1 + std::fabs(got.value_o - got.value_r)));
    }
  }
}

TEST(BShapExact, ArityCapAndErrors) {
  ExprModel big(resolve_builtin("product21"));
  const BaselinePair pair{std::vector<double>(21, 1.0), std::vector<double>(21, 0.0)};
  EXPECT_THROW(bshap_exact(big, pair), ArgumentError);
  ExprModel p3(resolve_builtin("product3"));
  EXPECT_THROW(bshap_exact(p3, {{1, 1, 1}, {0, 0, 0}}, {2}), ArgumentError);
  // 30 features is the hard limit whatever the configured cap.
  ExprModel p31(resolve_builtin("product31"));
  EXPECT_THROW(bshap_exact(p31, {std::vector<double>(31, 1.0), std::vector<double>(31, 0.0)},
                           {40}),
               ArgumentError);
  const auto f = model("x1 * x2", 2);
  EXPECT_THROW(bshap_exact(f, {{1}, {0, 0}}), ArgumentError);
  EXPECT_THROW(bshap_exact(f, {{1, NAN}, {0, 0}}), ArgumentError);
  EXPECT_THROW(bshap_exact(model("sqrt(x1)", 1), {{1}, {-1}}), DomainError);
}

TEST(BShapExact, IndependentOfThreadCount) {
  ExprModel m(builtin_model("interaction_eq3"));
  std::mt19937_64 rng(4);
  const BaselinePair pair{uniform_point(rng, 8, -1, 2), std::vector<double>(8, 0.5)};
  const auto a = bshap_exact(m, pair, {}, Exec{1});
  const auto b = bshap_exact(m, pair, {}, Exec{3});
  const auto c = bshap_exact(m, pair, {}, Exec{8});
  EXPECT_EQ(a.attributions, b.attributions);
  EXPECT_EQ(a.attributions, c.attributions);
}

TEST(DegeneratePair, ZeroWithoutPathEvaluation) {
  ExprModel m(builtin_model("interaction_eq3"));
  const std::vector<double> x(8, 0.3);
  for (const auto& r : {bshap_exact(m, {x, x}), bshap_sampled(m, {x, x}, {10, 1}),
                        ig_quadrature(m, {x, x})}) {
    EXPECT_EQ(r.attributions, std::vector<double>(8, 0.0));
    EXPECT_EQ(r.gap, 0.0);
    EXPECT_EQ(r.gradient_evals, 0u);
    EXPECT_LE(r.model_evals, 1u);
  }
}

TEST(BShapSampled, SinglePermutationIsAnExactOrdering) {
  const auto f = model("x1 * x2", 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = bshap_sampled(f, {{1, 1}, {0, 0}}, {1, seed});
    EXPECT_EQ(r.method, Method::kBShapSampled);
    for (double v : r.attributions) EXPECT_TRUE(v == 0.0 || v == 1.0);
    EXPECT_EQ(r.attributions[0] + r.attributions[1], 1.0);
    EXPECT_EQ(r.standard_errors, (std::vector<double>{0, 0}));
  }
}

TEST(BShapSampled, ConvergesWithinThreeStandardErrors) {
  const auto f = model("x1 * x2", 2);
  const BaselinePair pair{{1, 1}, {0, 0}};
  const auto r = bshap_sampled(f, pair, {2000, 42});
  const auto exact = bshap_exact(f, pair);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_GT(r.standard_errors[i], 0.0);
    EXPECT_LE(std::fabs(r.attributions[i] - exact.attributions[i]), 3 * r.standard_errors[i]);
  }
  EXPECT_EQ(r.seed, 42u);
  EXPECT_EQ(r.permutations, 2000);
}

TEST(BShapSampled, AdditiveModelIsExact) {
  ExprModel m(builtin_model("additive_eq2"));
  std::mt19937_64 rng(9);
  for (int M : {1, 7, 500}) {
    const BaselinePair pair{uniform_point(rng, 5, -1, 2), uniform_point(rng, 5, -1, 2)};
    const auto s = bshap_sampled(m, pair, {M, 3});
    const auto e = bshap_exact(m, pair);
    const double scale = 1 + std::fabs(e.value_o - e.value_r);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(s.attributions[i], e.attributions[i], 1e-12 * scale);
      EXPECT_LE(s.standard_errors[i], 1e-12 * scale);
    }
  }
}

TEST(BShapSampled, SeedDeterminismAndThreadIndependence) {
  ExprModel m(builtin_model("interaction_eq3"));
  std::mt19937_64 rng(10);
  const BaselinePair pair{uniform_point(rng, 8, -1, 2), std::vector<double>(8, 0.5)};
  const auto a = bshap_sampled(m, pair, {300, 5}, Exec{1});
  const auto b = bshap_sampled(m, pair, {300, 5}, Exec{4});
  const auto c = bshap_sampled(m, pair, {300, 6}, Exec{1});
  EXPECT_EQ(a.attributions, b.attributions);
  EXPECT_EQ(a.standard_errors, b.standard_errors);
  EXPECT_NE(a.attributions, c.attributions);
  EXPECT_THROW(bshap_sampled(m, pair, {0, 5}), ArgumentError);
}

TEST(IgQuadrature, PolynomialIsExactWithGauss) {
  QuadratureSpec q;
  q.rule = QuadratureRule::kGaussLegendre;
  q.steps = 16;
  const auto r = ig_quadrature(model("x1 * x2^2", 2), {{1, 1}, {0, 0}}, q);
  EXPECT_EQ(r.method, Method::kIg);
  EXPECT_NEAR(r.attributions[0], 1.0 / 3, 1e-12);
  EXPECT_NEAR(r.attributions[1], 2.0 / 3, 1e-12);
  EXPECT_NEAR(r.gap, 0.0, 1e-12);
  EXPECT_EQ(r.gradient_evals, 16u);
}

TEST(IgQuadrature, AdditiveMidpointAgreesWithBShap) {
  ExprModel m(builtin_model("additive_eq2"));
  std::mt19937_64 rng(12);
  QuadratureSpec mid;
  mid.rule = QuadratureRule::kMidpoint;
  mid.steps = 4096;
  for (int t = 0; t < 20; ++t) {
    const BaselinePair pair{uniform_point(rng, 5, -1, 2), uniform_point(rng, 5, -1, 2)};
    const auto ig = ig_quadrature(m, pair, mid);
    const auto bs = bshap_exact(m, pair);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(ig.attributions[i], bs.attributions[i], 1e-6) << "t=" << t << " i=" << i;
    }
  }
}

TEST(IgQuadrature, MatchesIndependentPathIntegral) {
  // Oracle: Simpson on the analytic derivative of each term, no library
  // gradient involved.
  std::mt19937_64 rng(13);
  ExprModel m(builtin_model("interaction_eq3"));
  for (int t = 0; t < 10; ++t) {
    const auto xo = uniform_point(rng, 8, -1, 2);
    const auto xr = uniform_point(rng, 8, -1, 2);
    auto at = [&](double a, int i) {
      return xr[static_cast<std::size_t>(i)] +
             a * (xo[static_cast<std::size_t>(i)] - xr[static_cast<std::size_t>(i)]);
    };
    auto d = [&](int i) { return xo[static_cast<std::size_t>(i)] - xr[static_cast<std::size_t>(i)]; };
    auto sgn = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
    std::vector<std::function<double(double)>> partial = {
        [&](double a) { return 1 + at(a, 1); },
        [&](double a) { return 1 + at(a, 0); },
        [&](double a) { return 1 + 0.5 * at(a, 3) * at(a, 3); },
        [&](double a) { return 1 + at(a, 2) * at(a, 3); },
        [&](double a) { return 1 + (at(a, 4) > at(a, 5) ? 2.0 : 0.0); },
        [&](double a) { return 1 + (at(a, 5) > at(a, 4) ? 2.0 : 0.0); },
        [&](double a) { return 1 + 1.5 * sgn(at(a, 6) + at(a, 7)); },
        [&](double a) { return 1 + 1.5 * sgn(at(a, 6) + at(a, 7)); },
    };
    const auto ig = ig_quadrature(m, {xo, xr});
    for (int i = 0; i < 8; ++i) {
      // Step integrands converge at O(1/n) under midpoint; 2e6 nodes gives ~1e-6.
      const double want = d(i) * testing::midpoint(partial[static_cast<std::size_t>(i)], 2000000);
      EXPECT_NEAR(ig.attributions[static_cast<std::size_t>(i)], want, 1e-5) << i;
    }
    EXPECT_LE(std::fabs(ig.gap), 1e-10);
  }
}

TEST(IgQuadrature, RulesConvergeAndGapShrinks) {
  const auto f = model("exp(x1) * x2 + x2^3", 2);
  const BaselinePair pair{{1.5, -0.7}, {-0.5, 1.2}};
  auto gap = [&](QuadratureRule rule, int m) {
    QuadratureSpec q;
    q.rule = rule;
    q.steps = m;
    return std::fabs(ig_quadrature(f, pair, q).gap);
  };
  // Second order: 4x the nodes cuts the error about 16x.
  for (auto rule : {QuadratureRule::kMidpoint, QuadratureRule::kTrapezoid}) {
    EXPECT_NEAR(gap(rule, 16) / gap(rule, 64), 16.0, 1.0);
  }
  EXPECT_LE(gap(QuadratureRule::kGaussLegendre, 4), 1e-2);
  EXPECT_LE(gap(QuadratureRule::kGaussLegendre, 16), 1e-13);
  QuadratureSpec bad;
  bad.steps = 0;
  EXPECT_THROW(ig_quadrature(f, pair, bad), ArgumentError);
}

TEST(IgQuadrature, KinkSplittingFindsBreakpoints) {
  ExprModel m(builtin_model("relu_sum2"));
  const BaselinePair pair{{1.0, 0.5}, {-1.0, -0.5}};
  const auto bp = path_breakpoints(m, pair, 1024);
  ASSERT_EQ(bp.size(), 1u);
  EXPECT_NEAR(bp[0], 0.5, 1e-14);
  const auto r = ig_quadrature(m, pair);
  EXPECT_EQ(r.segments, 2);
  EXPECT_NEAR(r.attributions[0], 1.0, 1e-13);
  EXPECT_NEAR(r.attributions[1], 0.5, 1e-13);
  QuadratureSpec plain;
  plain.split_at_kinks = false;
  EXPECT_EQ(ig_quadrature(m, pair, plain).segments, 1);
}

TEST(IgQuadrature, DomainErrorOnPath) {
  const auto f = model("sqrt(x1 + 1)", 1);
  EXPECT_THROW(ig_quadrature(f, {{1}, {-3}}), DomainError);
}

TEST(IgQuadrature, IndependentOfThreadCount) {
  ExprModel m(builtin_model("additive_eq2"));
  std::mt19937_64 rng(14);
  const BaselinePair pair{uniform_point(rng, 5, -1, 2), std::vector<double>(5, 0.5)};
  EXPECT_EQ(ig_quadrature(m, pair, {}, Exec{1}).attributions,
            ig_quadrature(m, pair, {}, Exec{5}).attributions);
}

// Straight-line IG of max(x1 + x2, 0) from the origin: the gradient is (1, 1)
// on the whole path when x1 + x2 > 0 and zero otherwise.
TEST(KinkedModels, ReluSumFromOrigin) {
  ExprModel m(builtin_model("relu_sum2"));
  for (int a = 0; a <= 40; ++a) {
    for (int b = 0; b <= 40; ++b) {
      const double x1 = -1 + a * 0.05, x2 = -1 + b * 0.05;
      if (std::fabs(x1 + x2) < 1e-9) continue;
      const auto r = ig_quadrature(m, {{x1, x2}, {0, 0}});
      EXPECT_NEAR(r.attributions[0], x1 + x2 > 0 ? x1 : 0.0, 1e-3);
    }
  }
}

TEST(KinkedModels, MaxTwoAgainstDenseMidpoint) {
  ExprModel m(builtin_model("max2"));
  const std::vector<double> xr{-0.3, 0.4};
  for (double x1 : {-1.0, -0.25, 0.5, 1.0}) {
    for (double x2 : {-0.9, 0.1, 0.75}) {
      auto g1 = [&](double a) {
        const double p1 = xr[0] + a * (x1 - xr[0]), p2 = xr[1] + a * (x2 - xr[1]);
        return p1 > p2 ? 1.0 : (p1 < p2 ? 0.0 : 0.5);
      };
      const double want = (x1 - xr[0]) * testing::midpoint(g1, 100000);
      const auto r = ig_quadrature(m, {{x1, x2}, xr});
      EXPECT_NEAR(r.attributions[0], want, 1e-4);
      const testing::Fn f = [&](const std::vector<double>& x) { return std::max(x[0], x[1]); };
      const auto oracle = testing::subset_shapley(f, {x1, x2}, xr);
      const auto bs = bshap_exact(m, {{x1, x2}, xr});
      EXPECT_EQ(bs.attributions[0], oracle[0]);
    }
  }
}

TEST(ClosedForm, Examples) {
  const auto cf = closed_form_poly_interaction({0, 0, 0, 1}, {{1, 1}, {0, 0}});
  EXPECT_NEAR(cf.bshap.attributions[0], 0.5, 1e-15);
  EXPECT_NEAR(cf.bshap.attributions[1], 0.5, 1e-15);
  EXPECT_NEAR(cf.ig.attributions[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(cf.ig.attributions[1], 2.0 / 3, 1e-15);
  EXPECT_NEAR(cf.bshap.gap, 0.0, 1e-15);
  EXPECT_NEAR(cf.ig.gap, 0.0, 1e-15);

  const BaselinePair pair{{2.5, -1.0}, {0.5, 3.0}};
  const auto lin = closed_form_poly_interaction({0, 1, 1, 0}, pair);
  for (const auto* r : {&lin.bshap, &lin.ig}) {
    EXPECT_NEAR(r->attributions[0], 2.0, 1e-15);
    EXPECT_NEAR(r->attributions[1], -4.0, 1e-15);
  }
  const auto konst = closed_form_poly_interaction({5, 0, 0, 0}, pair);
  EXPECT_EQ(konst.bshap.attributions, (std::vector<double>{0, 0}));
  EXPECT_EQ(konst.ig.attributions, (std::vector<double>{0, 0}));
  EXPECT_THROW(closed_form_poly_interaction({0, 0, 0, 1}, {{1, 1, 1}, {0, 0, 0}}),
               ArgumentError);
}

TEST(ClosedForm, GenericEnginesAgree) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> ub(-3.0, 3.0);
  QuadratureSpec gl;
  gl.steps = 16;
  for (int t = 0; t < 100; ++t) {
    const std::array<double, 4> beta{ub(rng), ub(rng), ub(rng), ub(rng)};
    const BaselinePair pair{uniform_point(rng, 2, -2, 2), uniform_point(rng, 2, -2, 2)};
    const auto cf = closed_form_poly_interaction(beta, pair);
    ExprModel m(builtin_model("poly_interaction", beta));
    const auto bs = bshap_exact(m, pair);
    const auto ig = ig_quadrature(m, pair, gl);
    // Independent: subset oracle for BShap.
    const testing::Fn f = [&](const std::vector<double>& x) {
      return beta[0] + beta[1] * x[0] + beta[2] * x[1] + beta[3] * x[0] * x[1] * x[1];
    };
    const auto oracle = testing::subset_shapley(f, pair.x_o, pair.x_r);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(bs.attributions[i], cf.bshap.attributions[i], 1e-10);
      EXPECT_NEAR(oracle[i], cf.bshap.attributions[i], 1e-10);
      EXPECT_NEAR(ig.attributions[i], cf.ig.attributions[i], 1e-12);
    }
  }
}

TEST(TwoFeatureDecomposition, Examples) {
  const auto d1 = two_feature_decomposition(model("x1 * x2", 2), {{1, 1}, {0, 0}});
  EXPECT_EQ(d1.e11, 1.0);
  EXPECT_EQ(d1.e12, 0.0);
  EXPECT_EQ(d1.phi1, 0.5);

  const auto add = model("x1^2 + exp(x2)", 2);
  const BaselinePair pair{{1.7, -0.4}, {0.2, 0.9}};
  const auto d2 = two_feature_decomposition(add, pair);
  EXPECT_NEAR(d2.e11, d2.e12, 1e-14);

  const auto poly = model("x1 * x2^2", 2);
  const auto d3 = two_feature_decomposition(poly, {{1, 1}, {0, 0}});
  EXPECT_EQ(d3.e11, 1.0);
  EXPECT_EQ(d3.e12, 0.0);
  EXPECT_EQ(d3.phi1, 0.5);
  EXPECT_EQ(d3.phi1, closed_form_poly_interaction({0, 0, 0, 1}, {{1, 1}, {0, 0}})
                         .bshap.attributions[0]);

  std::mt19937_64 rng(16);
  ExprModel mx(builtin_model("max2"));
  for (int t = 0; t < 20; ++t) {
    const BaselinePair p{uniform_point(rng, 2, -1, 2), uniform_point(rng, 2, -1, 2)};
    EXPECT_NEAR(two_feature_decomposition(mx, p).phi1, bshap_exact(mx, p).attributions[0],
                1e-15);
  }
  EXPECT_THROW(two_feature_decomposition(model("x1", 1), {{1}, {0}}), ArgumentError);
}

TEST(ResultTwo, ProductEquivalenceWithGaussOrderP) {
  std::mt19937_64 rng(17);
  for (int p = 2; p <= 8; ++p) {
    ExprModel m(resolve_builtin("product" + std::to_string(p)));
    QuadratureSpec q;
    q.steps = p;
    for (int t = 0; t < 10; ++t) {
      const BaselinePair pair{uniform_point(rng, p, -1, 2), uniform_point(rng, p, -1, 2)};
      const auto bs = bshap_exact(m, pair);
      const auto ig = ig_quadrature(m, pair, q);
      for (int i = 0; i < p; ++i) {
        EXPECT_NEAR(bs.attributions[static_cast<std::size_t>(i)],
                    ig.attributions[static_cast<std::size_t>(i)], 1e-8);
      }
    }
  }
}

}  // namespace
}  // namespace attrikit
