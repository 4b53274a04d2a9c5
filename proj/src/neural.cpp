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

#include "attrikit/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attrikit/error.hpp"

namespace attrikit {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_input(const MlpParams& params, std::span<const double> x) {
  if (params.layers.empty()) throw ArgumentError("network has no layers");
  if (static_cast<Eigen::Index>(x.size()) != params.layers.front().weights.cols()) {
    throw ArgumentError(fmt::format("point has dimension {}, network expects {}",
                                    x.size(), params.layers.front().weights.cols()));
  }
}

Eigen::Map<const VectorXd> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

struct AdamState {
  std::vector<MatrixXd> mw, vw;
  std::vector<VectorXd> mb, vb;
};

}  // namespace

void MlpSpec::validate() const {
  if (input_dim < 1) throw ArgumentError("input dimension must be >= 1");
  if (widths.empty()) throw ArgumentError("network needs at least one hidden layer");
  for (int w : widths) {
    if (w < 1) throw ArgumentError("hidden layer widths must be >= 1");
  }
}

void MlpParams::validate(const MlpSpec& spec) const {
  spec.validate();
  if (layers.size() != spec.widths.size() + 1) {
    throw ArgumentError(fmt::format("shape mismatch: {} layers for {} hidden widths",
                                    layers.size(), spec.widths.size()));
  }
  Eigen::Index in = spec.input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Eigen::Index out = l < spec.widths.size() ? spec.widths[l] : 1;
    const auto& layer = layers[l];
    if (layer.weights.rows() != out || layer.weights.cols() != in ||
        layer.bias.size() != out) {
      throw ArgumentError(fmt::format(
          "shape mismatch in layer {}: weights {}x{}, bias {}, expected {}x{}", l,
          layer.weights.rows(), layer.weights.cols(), layer.bias.size(), out, in));
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw ArgumentError(fmt::format("layer {} has non-finite parameters", l));
    }
    in = out;
  }
}

MlpParams init_network(const MlpSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  MlpParams params;
  int in = spec.input_dim;
  for (std::size_t l = 0; l <= spec.widths.size(); ++l) {
    const int out = l < spec.widths.size() ? spec.widths[l] : 1;
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / in));
    DenseLayer layer;
    layer.weights.resize(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.weights(r, c) = normal(rng);
    }
    layer.bias = VectorXd::Zero(out);
    params.layers.push_back(std::move(layer));
    in = out;
  }
  return params;
}

double forward(const MlpParams& params, std::span<const double> x) {
  check_input(params, x);
  VectorXd h = as_vector(x);
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    h = (params.layers[l].weights * h + params.layers[l].bias).cwiseMax(0.0);
  }
  return (params.layers[last].weights * h + params.layers[last].bias)(0);
}

VectorXd forward_batch(const MlpParams& params, const MatrixXd& x) {
  MatrixXd h = x.transpose();
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    h = ((params.layers[l].weights * h).colwise() + params.layers[l].bias).cwiseMax(0.0);
  }
  MatrixXd out = (params.layers[last].weights * h).colwise() + params.layers[last].bias;
  return out.row(0).transpose();
}

double input_gradient(const MlpParams& params, std::span<const double> x,
                      std::span<double> grad) {
  check_input(params, x);
  if (grad.size() != x.size()) throw ArgumentError("gradient buffer has the wrong size");
  const std::size_t last = params.layers.size() - 1;
  std::vector<VectorXd> pre(last);
  VectorXd h = as_vector(x);
  for (std::size_t l = 0; l < last; ++l) {
    pre[l] = params.layers[l].weights * h + params.layers[l].bias;
    h = pre[l].cwiseMax(0.0);
  }
  const double value = (params.layers[last].weights * h + params.layers[last].bias)(0);
  VectorXd g = params.layers[last].weights.row(0).transpose();
  for (std::size_t l = last; l-- > 0;) {
    g = (pre[l].array() > 0.0).select(g, 0.0);
    g = params.layers[l].weights.transpose() * g;
  }
  std::copy(g.data(), g.data() + g.size(), grad.begin());
  return value;
}

void Dataset::validate() const {
  if (x.rows() != y.size()) {
    throw ArgumentError(fmt::format("dataset has {} rows but {} responses", x.rows(), y.size()));
  }
  if (x.rows() == 0 || x.cols() == 0) throw ArgumentError("dataset is empty");
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError("dataset has non-finite entries");
}

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learning rate must be positive");
  }
  if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
  if (epochs < 0) throw ArgumentError("epoch count must be >= 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ArgumentError("validation fraction must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ArgumentError("weight decay must be >= 0");
  }
}

double mean_squared_error(const VectorXd& pred, const VectorXd& y) {
  return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

double r_squared(const VectorXd& pred, const VectorXd& y) {
  const double mean = y.mean();
  const double total = (y.array() - mean).square().sum();
  const double resid = (pred - y).squaredNorm();
  return total > 0.0 ? 1.0 - resid / total : (resid == 0.0 ? 1.0 : 0.0);
}

TrainedNetwork train(const MlpSpec& spec, const TrainingConfig& config,
                     const Dataset& data) {
  spec.validate();
  config.validate();
  data.validate();
  if (data.x.cols() != spec.input_dim) {
    throw ArgumentError(fmt::format("dataset has {} features, network expects {}",
                                    data.x.cols(), spec.input_dim));
  }
  const auto n = static_cast<std::size_t>(data.x.rows());
  std::mt19937_64 rng(config.seed);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(n)));
  if (n_val >= n) throw ArgumentError("validation split leaves no training rows");

  auto gather = [&](std::size_t begin, std::size_t end, MatrixXd& xs, VectorXd& ys) {
    xs.resize(static_cast<Eigen::Index>(end - begin), data.x.cols());
    ys.resize(static_cast<Eigen::Index>(end - begin));
    for (std::size_t k = begin; k < end; ++k) {
      const auto row = static_cast<Eigen::Index>(k - begin);
      xs.row(row) = data.x.row(order[k]);
      ys(row) = data.y(order[k]);
    }
  };
  MatrixXd x_val, x_train;
  VectorXd y_val, y_train;
  gather(0, n_val, x_val, y_val);
  gather(n_val, n, x_train, y_train);
  if (n_val == 0) {
    x_val = x_train;
    y_val = y_train;
  }
  const MatrixXd xt_train = x_train.transpose();  // features x rows

  TrainedNetwork result;
  MlpParams& params = result.params;
  params = init_network(spec);
  TrainingReport& report = result.report;
  report.train_rows = static_cast<std::size_t>(x_train.rows());
  report.validation_rows = n_val;
  report.initial_train_loss = mean_squared_error(forward_batch(params, x_train), y_train);
  const double blowup = 1e6 * (report.initial_train_loss + 1.0);

  const std::size_t n_layers = params.layers.size();
  AdamState adam;
  for (const auto& layer : params.layers) {
    adam.mw.push_back(MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    adam.vw.push_back(MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    adam.mb.push_back(VectorXd::Zero(layer.bias.size()));
    adam.vb.push_back(VectorXd::Zero(layer.bias.size()));
  }

  std::vector<Eigen::Index> rows(static_cast<std::size_t>(x_train.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<MatrixXd> acts(n_layers);  // input to each layer
  std::vector<MatrixXd> pre(n_layers);
  std::vector<MatrixXd> grad_w(n_layers);
  std::vector<VectorXd> grad_b(n_layers);
  long step = 0;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const long total_steps = static_cast<long>(config.epochs) *
                           static_cast<long>((rows.size() + batch - 1) / batch);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t start = 0; start < rows.size(); start += batch) {
      const std::size_t end = std::min(rows.size(), start + batch);
      const auto b = static_cast<Eigen::Index>(end - start);
      MatrixXd xb(xt_train.rows(), b);
      VectorXd yb(b);
      for (Eigen::Index k = 0; k < b; ++k) {
        const auto r = rows[start + static_cast<std::size_t>(k)];
        xb.col(k) = xt_train.col(r);
        yb(k) = y_train(r);
      }
      acts[0] = std::move(xb);
      for (std::size_t l = 0; l < n_layers; ++l) {
        pre[l] = (params.layers[l].weights * acts[l]).colwise() + params.layers[l].bias;
        if (l + 1 < n_layers) acts[l + 1] = pre[l].cwiseMax(0.0);
      }
      const VectorXd resid = pre[n_layers - 1].row(0).transpose() - yb;
      const double batch_loss = resid.squaredNorm() / static_cast<double>(b);
      if (!std::isfinite(batch_loss) || batch_loss > blowup) {
        throw TrainingDiverged(fmt::format(
            "training diverged in epoch {}: batch loss {} (initial {})", epoch,
            batch_loss, report.initial_train_loss));
      }
      MatrixXd delta = (2.0 / static_cast<double>(b)) * resid.transpose();
      for (std::size_t l = n_layers; l-- > 0;) {
        grad_w[l] = delta * acts[l].transpose();
        grad_b[l] = delta.rowwise().sum();
        if (l > 0) {
          delta = (params.layers[l].weights.transpose() * delta)
                      .cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
      }
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      const double b1 = config.beta1, b2 = config.beta2;
      double lr = config.learning_rate;
      if (config.cosine_decay && total_steps > 0) {
        const double progress = static_cast<double>(step - 1) / static_cast<double>(total_steps);
        lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
      }
      const double shrink = 1.0 - lr * config.weight_decay;
      for (std::size_t l = 0; l < n_layers; ++l) {
        adam.mw[l] = b1 * adam.mw[l] + (1.0 - b1) * grad_w[l];
        adam.vw[l] = b2 * adam.vw[l] + (1.0 - b2) * grad_w[l].cwiseAbs2();
        adam.mb[l] = b1 * adam.mb[l] + (1.0 - b1) * grad_b[l];
        adam.vb[l] = b2 * adam.vb[l] + (1.0 - b2) * grad_b[l].cwiseAbs2();
        if (config.weight_decay > 0.0) params.layers[l].weights *= shrink;
        params.layers[l].weights.array() -=
            lr * (adam.mw[l].array() / c1) /
            ((adam.vw[l].array() / c2).sqrt() + config.epsilon);
        params.layers[l].bias.array() -=
            lr * (adam.mb[l].array() / c1) /
            ((adam.vb[l].array() / c2).sqrt() + config.epsilon);
      }
    }
    EpochLoss el;
    el.epoch = epoch;
    el.train_loss = mean_squared_error(forward_batch(params, x_train), y_train);
    el.validation_loss = mean_squared_error(forward_batch(params, x_val), y_val);
    if (!std::isfinite(el.train_loss) || el.train_loss > blowup) {
      throw TrainingDiverged(fmt::format("training diverged after epoch {}: loss {}",
                                         epoch, el.train_loss));
    }
    report.epochs.push_back(el);
  }
  report.final_train_loss = mean_squared_error(forward_batch(params, x_train), y_train);
  report.validation_r2 = r_squared(forward_batch(params, x_val), y_val);
  return result;
}

std::string network_to_json(const MlpSpec& spec, const MlpParams& params) {
  params.validate(spec);
  nlohmann::ordered_json j;
  j["spec"] = {{"input_dim", spec.input_dim},
               {"widths", spec.widths},
               {"seed", spec.seed}};
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& layer : params.layers) {
    nlohmann::ordered_json lj;
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(layer.weights.cols()));
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        row[static_cast<std::size_t>(c)] = layer.weights(r, c);
      }
      rows.push_back(row);
    }
    lj["weights"] = std::move(rows);
    lj["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    j["layers"].push_back(std::move(lj));
  }
  return j.dump(1);
}

std::pair<MlpSpec, MlpParams> network_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed network file: ") + e.what(), e.byte);
  }
  MlpSpec spec;
  MlpParams params;
  try {
    const auto& s = j.at("spec");
    spec.input_dim = s.at("input_dim").get<int>();
    spec.widths = s.at("widths").get<std::vector<int>>();
    spec.seed = s.value("seed", std::uint64_t{0});
    for (const auto& lj : j.at("layers")) {
      const auto rows = lj.at("weights").get<std::vector<std::vector<double>>>();
      const auto bias = lj.at("bias").get<std::vector<double>>();
      DenseLayer layer;
      const auto cols = rows.empty() ? std::size_t{0} : rows.front().size();
      layer.weights.resize(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(cols));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw ArgumentError("shape mismatch: ragged weight matrix");
        for (std::size_t c = 0; c < cols; ++c) {
          layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
      }
      layer.bias = Eigen::Map<const VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
      params.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed network file: ") + e.what(), 0);
  }
  params.validate(spec);
  return {std::move(spec), std::move(params)};
}

void save_network(const std::string& path, const MlpSpec& spec,
                  const MlpParams& params) {
  const std::string text = network_to_json(spec, params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write network file " + path);
  out << text << '\n';
  if (!out) throw IoError("failed writing network file " + path);
}

std::pair<MlpSpec, MlpParams> load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open network file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json(ss.str());
}

MlpModel::MlpModel(MlpSpec spec, MlpParams params, std::string name)
    : spec_(std::move(spec)), params_(std::move(params)), name_(std::move(name)) {
  params_.validate(spec_);
  for (int w : spec_.widths) hidden_units_ += static_cast<std::size_t>(w);
}

double MlpModel::evaluate(std::span<const double> x) const {
  check_point(*this, x);
  return forward(params_, x);
}

double MlpModel::gradient(std::span<const double> x, std::span<double> grad) const {
  check_point(*this, x);
  return input_gradient(params_, x, grad);
}

void MlpModel::switching_values(std::span<const double> x,
                                std::span<double> out) const {
  check_point(*this, x);
  VectorXd h = as_vector(x);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < params_.layers.size(); ++l) {
    const VectorXd z = params_.layers[l].weights * h + params_.layers[l].bias;
    std::copy(z.data(), z.data() + z.size(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += static_cast<std::size_t>(z.size());
    h = z.cwiseMax(0.0);
  }
}

}  // namespace attrikit
