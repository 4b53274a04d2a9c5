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

#ifndef ATTRIKIT_NEURAL_HPP_
#define ATTRIKIT_NEURAL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "attrikit/model.hpp"

namespace attrikit {

// Feedforward network: ReLU on every hidden layer, identity scalar output.
struct MlpSpec {
  int input_dim = 1;
  std::vector<int> widths;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  // Throws ArgumentError if the shapes do not chain input_dim -> widths -> 1
  // or any entry is non-finite.
  void validate(const MlpSpec& spec) const;
  int input_dim() const { return static_cast<int>(layers.front().weights.cols()); }
};

// He-normal weights (std = sqrt(2 / fan_in)), zero biases.
MlpParams init_network(const MlpSpec& spec);

double forward(const MlpParams& params, std::span<const double> x);
// Rows of `x` are points; returns one prediction per row.
Eigen::VectorXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& x);
// Reverse-mode input gradient with relu'(0) = 0. Returns f(x).
double input_gradient(const MlpParams& params, std::span<const double> x,
                      std::span<double> grad);

struct Dataset {
  Eigen::MatrixXd x;  // n x P
  Eigen::VectorXd y;  // n
  std::string model_name;
  double noise_variance = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Mini-batch Adam on mean squared error.
struct TrainingConfig {
  double learning_rate = 1e-3;
  int batch_size = 128;
  int epochs = 200;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Decoupled (AdamW-style) decay applied to weights, not biases.
  double weight_decay = 0.0;
  // Anneal the step size from learning_rate to 0 along a half cosine.
  bool cosine_decay = false;

  void validate() const;
};

struct EpochLoss {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainingReport {
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  double validation_r2 = 0.0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  std::vector<EpochLoss> epochs;
};

struct TrainedNetwork {
  MlpParams params;
  TrainingReport report;
};

// Holds out the first validation_fraction of a seeded shuffle. With no
// validation rows, validation metrics are computed on the training rows.
// Throws TrainingDiverged when a loss is non-finite or grows past
// 1e6 * (initial loss + 1).
TrainedNetwork train(const MlpSpec& spec, const TrainingConfig& config,
                     const Dataset& data);

double mean_squared_error(const Eigen::VectorXd& pred, const Eigen::VectorXd& y);
double r_squared(const Eigen::VectorXd& pred, const Eigen::VectorXd& y);

// {"spec": {"input_dim", "widths", "seed"},
//  "layers": [{"weights": [[...]], "bias": [...]}]}
std::string network_to_json(const MlpSpec& spec, const MlpParams& params);
std::pair<MlpSpec, MlpParams> network_from_json(std::string_view text);
void save_network(const std::string& path, const MlpSpec& spec,
                  const MlpParams& params);
std::pair<MlpSpec, MlpParams> load_network(const std::string& path);

// Model adapter; switching functions are the hidden pre-activations.
class MlpModel final : public Model {
 public:
  MlpModel(MlpSpec spec, MlpParams params, std::string name = "mlp");

  int arity() const override { return spec_.input_dim; }
  const std::string& name() const override { return name_; }
  const MlpSpec& spec() const { return spec_; }
  const MlpParams& params() const { return params_; }

  double evaluate(std::span<const double> x) const override;
  double gradient(std::span<const double> x,
                  std::span<double> grad) const override;
  using Model::gradient;

  std::size_t switch_count() const override { return hidden_units_; }
  void switching_values(std::span<const double> x,
                        std::span<double> out) const override;

 private:
  MlpSpec spec_;
  MlpParams params_;
  std::string name_;
  std::size_t hidden_units_ = 0;
};

}  // namespace attrikit

#endif  // ATTRIKIT_NEURAL_HPP_
