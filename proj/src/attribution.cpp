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

#include "attrikit/attribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "attrikit/error.hpp"

namespace attrikit {
namespace {

bool degenerate(const BaselinePair& pair) { return pair.x_o == pair.x_r; }

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

AttributionResult zero_result(const Model& model, const BaselinePair& pair,
                              Method method) {
  AttributionResult r;
  r.method = method;
  r.attributions.assign(pair.dimension(), 0.0);
  r.value_o = model.evaluate(pair.x_o);
  r.value_r = r.value_o;
  r.model_evals = 1;
  return r;
}

// The cubic smoothstep has zero slope at both ends, which removes
// inverse-square-root singularities sitting on a segment boundary.
double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }
double smoothstep_slope(double t) { return 6.0 * t * (1.0 - t); }

}  // namespace

void BaselinePair::validate(int arity) const {
  if (static_cast<int>(x_o.size()) != arity ||
      static_cast<int>(x_r.size()) != arity) {
    throw ArgumentError(fmt::format(
        "baseline pair has dimensions ({}, {}), model arity is {}", x_o.size(),
        x_r.size(), arity));
  }
  for (std::size_t i = 0; i < x_o.size(); ++i) {
    if (!std::isfinite(x_o[i]) || !std::isfinite(x_r[i])) {
      throw ArgumentError("baseline pair has a non-finite entry");
    }
  }
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kBShapExact:
      return "bshap_exact";
    case Method::kBShapSampled:
      return "bshap_sampled";
    case Method::kIg:
      return "ig";
  }
  return "?";
}

double coalition_value_mask(const Model& model, const BaselinePair& pair,
                            std::uint64_t mask) {
  pair.validate(model.arity());
  std::vector<double> x = pair.x_r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask >> i & 1u) x[i] = pair.x_o[i];
  }
  return model.evaluate(x);
}

double coalition_value(const Model& model, const BaselinePair& pair,
                       std::span<const int> members) {
  if (model.arity() > 64) throw ArgumentError("coalitions support at most 64 features");
  std::uint64_t mask = 0;
  for (int i : members) {
    if (i < 0 || i >= model.arity()) {
      throw ArgumentError(fmt::format("feature index {} out of range", i));
    }
    mask |= std::uint64_t{1} << i;
  }
  return coalition_value_mask(model, pair, mask);
}

double shapley_weight(int s, int p) {
  if (p < 1 || s < 0 || s > p - 1) {
    throw ArgumentError(fmt::format("shapley weight needs 0 <= s < P (s={}, P={})", s, p));
  }
  return shapley_weights(p)[static_cast<std::size_t>(s)];
}

std::vector<double> shapley_weights(int p) {
  if (p < 1) throw ArgumentError("arity must be at least 1");
  std::vector<double> w(static_cast<std::size_t>(p));
  w[0] = 1.0 / p;  // 0! (P-1)! / P!
  for (int s = 0; s + 1 < p; ++s) {
    w[static_cast<std::size_t>(s + 1)] =
        w[static_cast<std::size_t>(s)] * (s + 1) / (p - s - 1);
  }
  return w;
}

AttributionResult bshap_exact(const Model& model, const BaselinePair& pair,
                              const ExactOptions& options, const Exec& exec) {
  const int p = model.arity();
  pair.validate(p);
  if (p > options.max_arity || p > 30) {
    throw ArgumentError(fmt::format(
        "exact enumeration needs 2^{} coalitions; cap is {} features", p,
        std::min(options.max_arity, 30)));
  }
  if (degenerate(pair)) return zero_result(model, pair, Method::kBShapExact);

  const std::size_t n = std::size_t{1} << p;
  std::vector<double> v(n);
  parallel_for(n, exec, [&](std::size_t mask) {
    std::vector<double> x = pair.x_r;
    for (int i = 0; i < p; ++i) {
      if (mask >> i & 1u) x[static_cast<std::size_t>(i)] = pair.x_o[static_cast<std::size_t>(i)];
    }
    v[mask] = model.evaluate(x);
  });

  // by_size[i * p + s]: sum of marginals of feature i over coalitions of size s.
  const auto up = static_cast<std::size_t>(p);
  std::vector<double> by_size(up * up, 0.0);
  for (std::size_t mask = 0; mask < n; ++mask) {
    const auto s = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t i = 0; i < up; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      if (mask & bit) continue;
      by_size[i * up + s] += v[mask | bit] - v[mask];
    }
  }
  const auto w = shapley_weights(p);
  AttributionResult r;
  r.method = Method::kBShapExact;
  r.attributions.assign(up, 0.0);
  for (std::size_t i = 0; i < up; ++i) {
    for (std::size_t s = 0; s < up; ++s) r.attributions[i] += w[s] * by_size[i * up + s];
  }
  r.value_o = v[n - 1];
  r.value_r = v[0];
  r.gap = sum_of(r.attributions) - (r.value_o - r.value_r);
  r.model_evals = n;
  return r;
}

AttributionResult bshap_sampled(const Model& model, const BaselinePair& pair,
                                const SamplingSpec& spec, const Exec& exec) {
  const int p = model.arity();
  pair.validate(p);
  if (spec.permutations < 1) throw ArgumentError("permutation count must be >= 1");
  AttributionResult r;
  if (degenerate(pair)) {
    r = zero_result(model, pair, Method::kBShapSampled);
    r.standard_errors.assign(pair.dimension(), 0.0);
  } else {
    const auto up = static_cast<std::size_t>(p);
    const auto m = static_cast<std::size_t>(spec.permutations);
    std::mt19937_64 rng(spec.seed);
    std::vector<int> orders(m * up);
    std::vector<int> perm(up);
    for (std::size_t k = 0; k < m; ++k) {
      std::iota(perm.begin(), perm.end(), 0);
      // Fisher-Yates with explicit draws keeps orderings stable across
      // standard library implementations.
      for (std::size_t i = up; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(perm[i - 1], perm[j]);
      }
      std::copy(perm.begin(), perm.end(), orders.begin() + static_cast<std::ptrdiff_t>(k * up));
    }
    const double f_r = model.evaluate(pair.x_r);
    const double f_o = model.evaluate(pair.x_o);
    std::vector<double> marginals(m * up);
    parallel_for(m, exec, [&](std::size_t k) {
      std::vector<double> x = pair.x_r;
      double prev = f_r;
      for (std::size_t pos = 0; pos < up; ++pos) {
        const auto i = static_cast<std::size_t>(orders[k * up + pos]);
        x[i] = pair.x_o[i];
        const double cur = model.evaluate(x);
        marginals[k * up + i] = cur - prev;
        prev = cur;
      }
    });
    r.method = Method::kBShapSampled;
    r.attributions.assign(up, 0.0);
    r.standard_errors.assign(up, 0.0);
    for (std::size_t i = 0; i < up; ++i) {
      double mean = 0.0;
      for (std::size_t k = 0; k < m; ++k) mean += marginals[k * up + i];
      mean /= static_cast<double>(m);
      double ss = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double d = marginals[k * up + i] - mean;
        ss += d * d;
      }
      r.attributions[i] = mean;
      if (m > 1) {
        r.standard_errors[i] =
            std::sqrt(ss / static_cast<double>(m - 1)) / std::sqrt(static_cast<double>(m));
      }
    }
    r.value_o = f_o;
    r.value_r = f_r;
    r.gap = sum_of(r.attributions) - (f_o - f_r);
    r.model_evals = m * up + 2;
  }
  r.seed = spec.seed;
  r.permutations = spec.permutations;
  return r;
}

std::vector<double> path_breakpoints(const Model& model,
                                     const BaselinePair& pair, int scan_points) {
  pair.validate(model.arity());
  const std::size_t ns = model.switch_count();
  if (ns == 0 || degenerate(pair)) return {};
  const int k_max = std::max(scan_points, 2);
  const std::size_t dim = pair.dimension();
  auto point_at = [&](double alpha, std::vector<double>& x) {
    for (std::size_t i = 0; i < dim; ++i) {
      x[i] = pair.x_r[i] + alpha * (pair.x_o[i] - pair.x_r[i]);
    }
  };
  std::vector<double> x(dim);
  std::vector<double> table((static_cast<std::size_t>(k_max) + 1) * ns);
  for (int k = 0; k <= k_max; ++k) {
    point_at(static_cast<double>(k) / k_max, x);
    model.switching_values(x, std::span<double>(table).subspan(static_cast<std::size_t>(k) * ns, ns));
  }
  auto at = [&](int k, std::size_t j) { return table[static_cast<std::size_t>(k) * ns + j]; };

  std::vector<double> roots;
  std::vector<double> scratch(ns);
  for (std::size_t j = 0; j < ns; ++j) {
    for (int k = 0; k < k_max; ++k) {
      const double s0 = at(k, j);
      const double s1 = at(k + 1, j);
      if (k > 0 && s0 == 0.0 && (at(k - 1, j) != 0.0 || s1 != 0.0)) {
        roots.push_back(static_cast<double>(k) / k_max);
        continue;
      }
      if (!((s0 < 0.0 && s1 > 0.0) || (s0 > 0.0 && s1 < 0.0))) continue;
      double lo = static_cast<double>(k) / k_max;
      double hi = static_cast<double>(k + 1) / k_max;
      const bool rising = s0 < 0.0;
      for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        point_at(mid, x);
        model.switching_values(x, scratch);
        const double sm = scratch[j];
        if (sm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((sm < 0.0) == rising) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  constexpr double kMerge = 1e-13;
  for (double a : roots) {
    if (a <= kMerge || a >= 1.0 - kMerge) continue;
    if (!out.empty() && a - out.back() <= kMerge) continue;
    out.push_back(a);
  }
  return out;
}

AttributionResult ig_quadrature(const Model& model, const BaselinePair& pair,
                                const QuadratureSpec& spec, const Exec& exec) {
  const int p = model.arity();
  pair.validate(p);
  if (spec.steps < 1) throw ArgumentError("quadrature step count must be >= 1");
  if (degenerate(pair)) {
    auto r = zero_result(model, pair, Method::kIg);
    r.segments = 0;
    return r;
  }
  const auto q = quadrature_nodes(spec.rule, spec.steps);
  std::vector<double> cuts{0.0};
  if (spec.split_at_kinks) {
    for (double b : path_breakpoints(model, pair, spec.scan_points)) cuts.push_back(b);
  }
  cuts.push_back(1.0);

  std::vector<double> alphas;
  std::vector<double> weights;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    const bool smooth_ends = s > 0 || s + 2 < cuts.size();
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double t = q.nodes[k];
      double alpha = a + (b - a) * t;
      double w = q.weights[k] * (b - a);
      if (smooth_ends) {
        alpha = a + (b - a) * smoothstep(t);
        w *= smoothstep_slope(t);
      }
      if (w == 0.0) continue;
      alphas.push_back(alpha);
      weights.push_back(w);
    }
  }

  const auto up = static_cast<std::size_t>(p);
  std::vector<double> grads(alphas.size() * up);
  parallel_for(alphas.size(), exec, [&](std::size_t k) {
    std::vector<double> x(up);
    for (std::size_t i = 0; i < up; ++i) {
      x[i] = pair.x_r[i] + alphas[k] * (pair.x_o[i] - pair.x_r[i]);
    }
    model.gradient(x, std::span<double>(grads).subspan(k * up, up));
  });

  AttributionResult r;
  r.method = Method::kIg;
  r.attributions.assign(up, 0.0);
  for (std::size_t i = 0; i < up; ++i) {
    const double delta = pair.x_o[i] - pair.x_r[i];
    if (delta == 0.0) continue;
    double acc = 0.0;
    for (std::size_t k = 0; k < alphas.size(); ++k) acc += weights[k] * grads[k * up + i];
    r.attributions[i] = delta * acc;
  }
  r.value_o = model.evaluate(pair.x_o);
  r.value_r = model.evaluate(pair.x_r);
  r.gap = sum_of(r.attributions) - (r.value_o - r.value_r);
  r.model_evals = 2;
  r.gradient_evals = alphas.size();
  r.segments = static_cast<int>(cuts.size()) - 1;
  return r;
}

ClosedFormAttributions closed_form_poly_interaction(
    const std::array<double, 4>& beta, const BaselinePair& pair) {
  pair.validate(2);
  const auto [b0, b1, b2, b12] = beta;
  for (double b : beta) {
    if (!std::isfinite(b)) throw ArgumentError("non-finite coefficient");
  }
  const double o1 = pair.x_o[0], o2 = pair.x_o[1];
  const double r1 = pair.x_r[0], r2 = pair.x_r[1];
  const double d1 = o1 - r1, d2 = o2 - r2;
  auto f = [&](double a, double b) { return b0 + b1 * a + b2 * b + b12 * a * b * b; };

  ClosedFormAttributions out;
  out.bshap.method = Method::kBShapExact;
  out.bshap.attributions = {
      b1 * d1 + 0.5 * b12 * d1 * (o2 * o2 + r2 * r2),
      b2 * d2 + 0.5 * b12 * (o2 * o2 - r2 * r2) * (o1 + r1)};
  out.ig.method = Method::kIg;
  out.ig.attributions = {
      b1 * d1 + b12 * d1 * (o2 * o2 + r2 * o2 + r2 * r2) / 3.0,
      b2 * d2 + b12 * d2 * (2.0 * (o1 * o2 + r1 * r2) + o1 * r2 + r1 * o2) / 3.0};
  for (auto* r : {&out.bshap, &out.ig}) {
    r->value_o = f(o1, o2);
    r->value_r = f(r1, r2);
    r->gap = sum_of(r->attributions) - (r->value_o - r->value_r);
  }
  return out;
}

TwoFeatureDecomposition two_feature_decomposition(const Model& model,
                                                  const BaselinePair& pair) {
  if (model.arity() != 2) {
    throw ArgumentError("two-feature decomposition needs a 2-ary model");
  }
  pair.validate(2);
  const double o1 = pair.x_o[0], o2 = pair.x_o[1];
  const double r1 = pair.x_r[0], r2 = pair.x_r[1];
  auto f = [&](double a, double b) {
    const std::array<double, 2> x{a, b};
    return model.evaluate(x);
  };
  TwoFeatureDecomposition d;
  d.e11 = f(o1, o2) - f(r1, o2);
  d.e12 = f(o1, r2) - f(r1, r2);
  d.phi1 = 0.5 * (d.e11 + d.e12);
  return d;
}

std::vector<double> bshap_by_orderings(const Model& model,
                                       const BaselinePair& pair) {
  const int p = model.arity();
  pair.validate(p);
  if (p > 10) throw ArgumentError("ordering enumeration supports at most 10 features");
  const auto up = static_cast<std::size_t>(p);
  std::vector<int> order(up);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(up, 0.0);
  double count = 0.0;
  do {
    std::vector<double> x = pair.x_r;
    double prev = model.evaluate(x);
    for (int i : order) {
      const auto ui = static_cast<std::size_t>(i);
      x[ui] = pair.x_o[ui];
      const double cur = model.evaluate(x);
      phi[ui] += cur - prev;
      prev = cur;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : phi) v /= count;
  return phi;
}

}  // namespace attrikit
