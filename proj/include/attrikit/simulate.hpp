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

#ifndef ATTRIKIT_SIMULATE_HPP_
#define ATTRIKIT_SIMULATE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attrikit/attribution.hpp"
#include "attrikit/expr.hpp"
#include "attrikit/neural.hpp"

namespace attrikit {

struct FeatureLaw {
  double low = -1.0;
  double high = 2.0;
};

// Full simulation protocol. Sub-seeds for data, noise, network init,
// shuffling and evaluation points are derived from `seed`.
struct ExperimentConfig {
  // Builtin spec (e.g. "additive_eq2") or path to a model file.
  std::string target = "additive_eq2";
  int samples = 10000;
  double noise_variance = 0.25;
  FeatureLaw law;
  // Empty means the midpoint of the feature law in every coordinate.
  std::vector<double> reference;
  int eval_points = 100;
  QuadratureSpec quadrature;
  std::vector<int> widths{64, 64};
  TrainingConfig training;  // its seed is replaced by the derived one
  std::uint64_t seed = 20220701;
  int bins = 20;
  std::string output_dir = "results";

  void validate() const;
};

// TOML with [target] [data] [network] [training] [attribution] [output]
// sections; a manifest.json written by emit_results is accepted too.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_toml(std::string_view text);
std::string experiment_config_to_json(const ExperimentConfig& config, int indent = 2);
ExperimentConfig experiment_config_from_json(std::string_view text);

ModelDefinition resolve_target(const std::string& target);
std::vector<double> resolved_reference(const ExperimentConfig& config, int arity);

Dataset generate_dataset(const ExperimentConfig& config, const Model& target);
std::vector<std::vector<double>> sample_eval_points(const ExperimentConfig& config,
                                                    int arity);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

// Equal-width bins over [min, max]; a zero-width span gives a single bin.
Histogram make_histogram(std::span<const double> values, int bins);

struct FeatureDiffStats {
  std::vector<double> diffs;  // bshap - ig, one per evaluation point
  double mean = 0.0;
  double median = 0.0;
  double median_abs = 0.0;
  double max_abs = 0.0;
  Histogram histogram;
};

struct DiffSummary {
  std::vector<FeatureDiffStats> features;
};

// per_feature[i] holds the differences of feature i.
DiffSummary summarize_differences(const std::vector<std::vector<double>>& per_feature,
                                  int bins);

struct PointAttributions {
  std::vector<double> x_o;
  AttributionResult bshap_truth;
  AttributionResult ig_truth;
  AttributionResult bshap_fitted;
  AttributionResult ig_fitted;
};

struct ComparisonResult {
  ExperimentConfig config;
  ModelDefinition target;
  std::vector<double> reference;
  MlpSpec network_spec;
  MlpParams network;
  TrainingReport training;
  std::vector<PointAttributions> points;
  DiffSummary truth;
  DiffSummary fitted;
};

// Failures inside the data, training or attribution stage surface as
// PipelineError naming the stage.
ComparisonResult run_comparison(const ExperimentConfig& config, const Exec& exec = {});

// Writes attributions.csv, diffs.csv, histograms.csv, manifest.json and
// network.json into `directory`, creating it if needed.
void emit_results(const ComparisonResult& result, const std::filesystem::path& directory);

}  // namespace attrikit

#endif  // ATTRIKIT_SIMULATE_HPP_
