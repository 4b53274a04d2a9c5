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

#ifndef ATTRIKIT_MODEL_HPP_
#define ATTRIKIT_MODEL_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace attrikit {

// A scalar function of `arity()` real inputs that can be evaluated and
// differentiated. Implementations are immutable after construction and every
// const member is safe to call concurrently.
class Model {
 public:
  virtual ~Model() = default;

  virtual int arity() const = 0;
  virtual const std::string& name() const = 0;

  virtual double evaluate(std::span<const double> x) const = 0;

  // Writes the partial derivatives into `grad` (size arity()) and returns
  // f(x). Nondifferentiable points follow the subgradient convention of the
  // implementation.
  virtual double gradient(std::span<const double> x,
                          std::span<double> grad) const = 0;

  // Switching functions: scalars whose zero crossings are exactly the places
  // where the model's gradient can jump or blow up (kinks, singularities).
  virtual std::size_t switch_count() const { return 0; }
  virtual void switching_values(std::span<const double> /*x*/,
                                std::span<double> /*out*/) const {}

  bool has_kinks() const { return switch_count() > 0; }

  std::vector<double> gradient(std::span<const double> x) const {
    std::vector<double> g(static_cast<std::size_t>(arity()));
    gradient(x, g);
    return g;
  }
};

// Throws ArgumentError unless x has the model's arity and finite entries.
void check_point(const Model& model, std::span<const double> x);

}  // namespace attrikit

#endif  // ATTRIKIT_MODEL_HPP_
