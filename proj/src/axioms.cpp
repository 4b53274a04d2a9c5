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

#include "attrikit/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attrikit/error.hpp"

namespace attrikit {
namespace {

class PairSampler {
 public:
  PairSampler(std::uint64_t seed, double low, double high)
      : rng_(seed), dist_(low, high) {}

  std::vector<double> point(int p) {
    std::vector<double> x(static_cast<std::size_t>(p));
    for (double& v : x) v = dist_(rng_);
    return x;
  }

  BaselinePair pair(int p) { return {point(p), point(p)}; }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> dist_;
};

std::vector<Expr> identity_vars(int p) {
  std::vector<Expr> vars;
  for (int i = 1; i <= p; ++i) vars.push_back(Expr::variable(i));
  return vars;
}

// Smooth companion used as the second function in the linearity check.
Expr companion(int p) {
  Expr g = Expr::constant(0.25);
  for (int i = 1; i <= p; ++i) {
    g = Expr::binary(Op::kAdd, std::move(g),
                     Expr::binary(Op::kMul, Expr::constant(0.5 * i),
                                  Expr::power(Expr::variable(i), 2.0)));
  }
  if (p >= 2) {
    g = Expr::binary(Op::kAdd, std::move(g),
                     Expr::binary(Op::kMul, Expr::variable(1), Expr::variable(p)));
  }
  return g;
}

struct Checker {
  AxiomCheck check;

  Checker(std::string axiom, std::string method, double tol) {
    check.axiom = std::move(axiom);
    check.method = std::move(method);
    check.tolerance = tol;
  }

  // `violation` is compared against `limit` (tolerance times any scale).
  void observe(double violation, double limit) {
    check.worst = std::max(check.worst, violation);
    if (!(violation <= limit)) check.passed = false;
  }
};

}  // namespace

bool AxiomReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AxiomCheck& c) { return c.passed; });
}

AxiomReport run_axioms(const ModelDefinition& def, const AxiomOptions& options) {
  if (options.trials < 1) throw ArgumentError("axiom trials must be >= 1");
  if (!(options.low < options.high)) throw ArgumentError("sampling range needs low < high");
  const int p = def.arity;
  const ExprModel f(def);
  const auto& tol = options.tolerances;
  const auto& quad = options.quadrature;
  const auto& exec = options.exec;
  PairSampler sampler(options.seed, options.low, options.high);
  AxiomReport report;
  report.model = def.name;

  auto bshap = [&](const Model& m, const BaselinePair& pr) {
    return bshap_exact(m, pr, {}, exec).attributions;
  };
  auto ig = [&](const Model& m, const BaselinePair& pr) {
    return ig_quadrature(m, pr, quad, exec).attributions;
  };

  // Efficiency.
  {
    Checker cb("efficiency", "bshap", tol.efficiency_bshap);
    Checker ci("efficiency", "ig", tol.efficiency_ig);
    for (int t = 0; t < options.trials; ++t) {
      const auto pr = sampler.pair(p);
      const auto rb = bshap_exact(f, pr, {}, exec);
      cb.observe(std::fabs(rb.gap) / (1.0 + std::fabs(rb.value_o - rb.value_r)),
                 tol.efficiency_bshap);
      const auto ri = ig_quadrature(f, pr, quad, exec);
      ci.observe(std::fabs(ri.gap), tol.efficiency_ig);
    }
    report.checks.push_back(cb.check);
    report.checks.push_back(ci.check);
  }

  // Linearity: a f + b g against a attr(f) + b attr(g).
  {
    Checker cb("linearity", "bshap", tol.linearity_bshap);
    Checker ci("linearity", "ig", tol.linearity_ig);
    const Expr g_expr = companion(p);
    const ExprModel g({"companion", p, g_expr});
    for (int t = 0; t < options.trials; ++t) {
      const double a = sampler.uniform(-2.0, 2.0);
      const double b = sampler.uniform(-2.0, 2.0);
      const ExprModel h({"combination", p,
                         Expr::binary(Op::kAdd,
                                      Expr::binary(Op::kMul, Expr::constant(a), def.body),
                                      Expr::binary(Op::kMul, Expr::constant(b), g_expr))});
      const auto pr = sampler.pair(p);
      for (auto [checker, method] :
           {std::pair{&cb, 0}, std::pair{&ci, 1}}) {
        const auto af = method == 0 ? bshap(f, pr) : ig(f, pr);
        const auto ag = method == 0 ? bshap(g, pr) : ig(g, pr);
        const auto ah = method == 0 ? bshap(h, pr) : ig(h, pr);
        for (std::size_t i = 0; i < ah.size(); ++i) {
          checker->observe(std::fabs(ah[i] - (a * af[i] + b * ag[i])),
                           checker->check.tolerance);
        }
      }
    }
    report.checks.push_back(cb.check);
    report.checks.push_back(ci.check);
  }

  // Dummy: every input absent from the expression, plus an appended one.
  {
    Checker cb("dummy", "bshap", tol.dummy);
    Checker ci("dummy", "ig", tol.dummy);
    const ExprModel fd({def.name + "+dummy", p + 1, def.body});
    auto used = used_variables(def.body, p + 1);
    std::vector<std::size_t> dummies;
    for (std::size_t i = 0; i < used.size(); ++i) {
      if (!used[i]) dummies.push_back(i);
    }
    for (int t = 0; t < options.trials; ++t) {
      const auto pr = sampler.pair(p + 1);
      const auto ab = bshap(fd, pr);
      const auto ai = ig(fd, pr);
      for (auto i : dummies) {
        cb.observe(std::fabs(ab[i]), tol.dummy);
        ci.observe(std::fabs(ai[i]), tol.dummy);
      }
    }
    cb.check.detail = fmt::format("{} dummy feature(s), max |phi| reported", dummies.size());
    ci.check.detail = cb.check.detail;
    report.checks.push_back(cb.check);
    report.checks.push_back(ci.check);
  }

  // Affine scale invariance: g(x) = f((x - c) / a) at (a x_o + c, a x_r + c).
  {
    Checker cb("affine_scale_invariance", "bshap", tol.affine);
    Checker ci("affine_scale_invariance", "ig", tol.affine);
    for (int t = 0; t < options.trials; ++t) {
      std::vector<double> scale(static_cast<std::size_t>(p));
      std::vector<double> shift(static_cast<std::size_t>(p));
      std::vector<Expr> repl;
      for (int i = 0; i < p; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        scale[ui] = sampler.uniform(0.5, 2.0);
        shift[ui] = sampler.uniform(-1.0, 1.0);
        repl.push_back(Expr::binary(
            Op::kDiv,
            Expr::binary(Op::kSub, Expr::variable(i + 1), Expr::constant(shift[ui])),
            Expr::constant(scale[ui])));
      }
      const ExprModel g({def.name + "@affine", p, substitute(def.body, repl)});
      const auto pr = sampler.pair(p);
      BaselinePair moved = pr;
      for (std::size_t i = 0; i < moved.x_o.size(); ++i) {
        moved.x_o[i] = scale[i] * pr.x_o[i] + shift[i];
        moved.x_r[i] = scale[i] * pr.x_r[i] + shift[i];
      }
      const auto fb = bshap(f, pr), gb = bshap(g, moved);
      const auto fi = ig(f, pr), gi = ig(g, moved);
      for (std::size_t i = 0; i < fb.size(); ++i) {
        cb.observe(std::fabs(fb[i] - gb[i]), tol.affine);
        ci.observe(std::fabs(fi[i] - gi[i]), tol.affine);
      }
    }
    report.checks.push_back(cb.check);
    report.checks.push_back(ci.check);
  }

  // Symmetry on f(x) + f(swap12 x) with x1 = x2 in both points.
  {
    Checker cb("symmetry", "bshap", tol.symmetry);
    Checker ci("symmetry", "ig", tol.symmetry);
    if (p < 2) {
      cb.check.detail = ci.check.detail = "not applicable: arity 1";
    } else {
      auto swapped = identity_vars(p);
      std::swap(swapped[0], swapped[1]);
      const ExprModel s({def.name + "+swap", p,
                         Expr::binary(Op::kAdd, def.body, substitute(def.body, swapped))});
      for (int t = 0; t < options.trials; ++t) {
        auto pr = sampler.pair(p);
        pr.x_o[1] = pr.x_o[0];
        pr.x_r[1] = pr.x_r[0];
        const auto ab = bshap(s, pr);
        const auto ai = ig(s, pr);
        cb.observe(std::fabs(ab[0] - ab[1]), tol.symmetry);
        ci.observe(std::fabs(ai[0] - ai[1]), tol.symmetry);
      }
      cb.check.detail = ci.check.detail = "symmetrized in x1, x2";
    }
    report.checks.push_back(cb.check);
    report.checks.push_back(ci.check);
  }

  // Demand monotonicity (BShap).
  {
    Checker cb("demand_monotonicity", "bshap", 0.0);
    std::vector<bool> monotone(static_cast<std::size_t>(p), true);
    std::vector<double> grad(static_cast<std::size_t>(p));
    for (int k = 0; k < 200; ++k) {
      const auto x = sampler.point(p);
      try {
        f.gradient(x, grad);
      } catch (const DomainError&) {
        continue;
      }
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (grad[i] < 0.0) monotone[i] = false;
      }
    }
    std::vector<int> features;
    for (int i = 0; i < p; ++i) {
      if (monotone[static_cast<std::size_t>(i)]) features.push_back(i);
    }
    const ModelDefinition fallback{"relu(x1) + x2", 2, parse_expression("relu(x1) + x2", 2)};
    const bool use_fallback = features.empty();
    const ExprModel mono(use_fallback ? fallback : def);
    if (use_fallback) features = {0, 1};
    const int sweep = std::max(tol.monotonicity_sweep, 2);
    for (int t = 0; t < options.trials; ++t) {
      for (int i : features) {
        auto pr = sampler.pair(mono.arity());
        const auto ui = static_cast<std::size_t>(i);
        double previous = 0.0;
        for (int k = 0; k < sweep; ++k) {
          pr.x_o[ui] = options.low + (options.high - options.low) * k / (sweep - 1);
          const double phi = bshap(mono, pr)[ui];
          if (k > 0) {
            cb.observe(std::max(0.0, previous - phi),
                       1e-12 * (1.0 + std::fabs(previous)));
          }
          previous = phi;
        }
      }
    }
    std::string list;
    for (int i : features) list += fmt::format("{}x{}", list.empty() ? "" : ",", i + 1);
    cb.check.detail = use_fallback
                          ? "model not monotone in any feature; checked relu(x1) + x2"
                          : "swept features " + list;
    report.checks.push_back(cb.check);
  }

  // Proportionality (IG): f(s, ..., s), s = sum x_i, baseline 0.
  {
    Checker ci("proportionality", "ig", tol.proportionality);
    Expr sum = Expr::variable(1);
    for (int i = 2; i <= p; ++i) {
      sum = Expr::binary(Op::kAdd, std::move(sum), Expr::variable(i));
    }
    const std::vector<Expr> repl(static_cast<std::size_t>(p), sum);
    const ExprModel h({def.name + "@sum", p, substitute(def.body, repl)});
    for (int t = 0; t < options.trials; ++t) {
      BaselinePair pr{sampler.point(p), std::vector<double>(static_cast<std::size_t>(p), 0.0)};
      const auto ai = ig(h, pr);
      const double ratio0 = ai[0] / pr.x_o[0];
      for (std::size_t i = 1; i < ai.size(); ++i) {
        if (pr.x_o[i] == 0.0) continue;
        ci.observe(std::fabs(ai[i] / pr.x_o[i] - ratio0) / (1.0 + std::fabs(ratio0)),
                   tol.proportionality);
      }
    }
    ci.check.detail = "f(s, ..., s), s = x1 + ... + xP";
    report.checks.push_back(ci.check);
  }
  return report;
}

std::string axiom_report_to_json(const AxiomReport& report, int indent) {
  nlohmann::ordered_json j;
  j["model"] = report.model;
  j["passed"] = report.all_passed();
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"axiom", c.axiom},
                           {"method", c.method},
                           {"passed", c.passed},
                           {"worst", c.worst},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
  }
  return j.dump(indent);
}

}  // namespace attrikit
