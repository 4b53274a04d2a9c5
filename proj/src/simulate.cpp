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

#include "attrikit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "attrikit/error.hpp"
#include "attrikit/output.hpp"
#include "attrikit/seeding.hpp"

#ifndef ATTRIKIT_VERSION
#define ATTRIKIT_VERSION "dev"
#endif

namespace attrikit {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Strict TOML reader: unknown sections or keys are rejected.
class TomlReader {
 public:
  explicit TomlReader(const toml::table& root) : root_(root) {
    static const std::map<std::string, std::set<std::string>> kAllowed = {
        {"target", {"name", "file"}},
        {"data", {"samples", "noise_variance", "low", "high", "seed"}},
        {"network", {"widths"}},
        {"training",
         {"learning_rate", "batch_size", "epochs", "validation_fraction", "beta1",
          "beta2", "epsilon", "weight_decay", "cosine_decay"}},
        {"attribution",
         {"eval_points", "reference", "rule", "steps", "split_at_kinks",
          "scan_points", "bins"}},
        {"output", {"directory"}},
    };
    for (const auto& [section, node] : root_) {
      const std::string name(section.str());
      const auto it = kAllowed.find(name);
      if (it == kAllowed.end() || !node.is_table()) {
        throw ArgumentError(fmt::format("unknown config section [{}]", name));
      }
      for (const auto& [key, value] : *node.as_table()) {
        if (!it->second.count(std::string(key.str()))) {
          throw ArgumentError(fmt::format("unknown key {}.{}", name, key.str()));
        }
      }
    }
  }

  const toml::node* find(std::string_view section, std::string_view key) const {
    const auto* table = root_.get_as<toml::table>(section);
    return table ? table->get(key) : nullptr;
  }

  void read(std::string_view section, std::string_view key, double& out) const {
    if (const auto* n = find(section, key)) {
      if (auto v = n->value<double>()) {
        out = *v;
      } else {
        throw ArgumentError(fmt::format("{}.{} must be a number", section, key));
      }
    }
  }

  void read(std::string_view section, std::string_view key, int& out) const {
    if (const auto* n = find(section, key)) {
      if (!n->is_integer()) {
        throw ArgumentError(fmt::format("{}.{} must be an integer", section, key));
      }
      out = static_cast<int>(*n->value<std::int64_t>());
    }
  }

  void read(std::string_view section, std::string_view key, std::uint64_t& out) const {
    if (const auto* n = find(section, key)) {
      if (!n->is_integer() || *n->value<std::int64_t>() < 0) {
        throw ArgumentError(fmt::format("{}.{} must be a nonnegative integer", section, key));
      }
      out = static_cast<std::uint64_t>(*n->value<std::int64_t>());
    }
  }

  void read(std::string_view section, std::string_view key, bool& out) const {
    if (const auto* n = find(section, key)) {
      if (!n->is_boolean()) {
        throw ArgumentError(fmt::format("{}.{} must be a boolean", section, key));
      }
      out = *n->value<bool>();
    }
  }

  void read(std::string_view section, std::string_view key, std::string& out) const {
    if (const auto* n = find(section, key)) {
      if (!n->is_string()) {
        throw ArgumentError(fmt::format("{}.{} must be a string", section, key));
      }
      out = *n->value<std::string>();
    }
  }

  template <typename T>
  void read_list(std::string_view section, std::string_view key, std::vector<T>& out) const {
    const auto* n = find(section, key);
    if (!n) return;
    out.clear();
    if (const auto* arr = n->as_array()) {
      for (const auto& el : *arr) {
        auto v = el.value<T>();
        if (!v || (std::is_integral_v<T> && !el.is_integer())) {
          throw ArgumentError(fmt::format("{}.{} has an invalid element", section, key));
        }
        out.push_back(*v);
      }
    } else if (auto v = n->value<T>()) {
      out.push_back(*v);
    } else {
      throw ArgumentError(fmt::format("{}.{} must be a list", section, key));
    }
  }

 private:
  const toml::table& root_;
};

ordered_json histogram_json(const Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (target.empty()) throw ArgumentError("experiment target is empty");
  if (samples < 1) throw ArgumentError("sample count must be >= 1");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw ArgumentError("noise variance must be >= 0");
  }
  if (!(law.low < law.high)) throw ArgumentError("feature law needs low < high");
  if (eval_points < 1) throw ArgumentError("evaluation point count must be >= 1");
  if (bins < 1) throw ArgumentError("histogram bin count must be >= 1");
  if (quadrature.steps < 1) throw ArgumentError("quadrature steps must be >= 1");
  MlpSpec{1, widths, 0}.validate();
  training.validate();
}

ModelDefinition resolve_target(const std::string& target) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(target, ec)) return load_model_file(target);
  return resolve_builtin(target);
}

std::vector<double> resolved_reference(const ExperimentConfig& config, int arity) {
  const auto p = static_cast<std::size_t>(arity);
  if (config.reference.empty()) {
    return std::vector<double>(p, 0.5 * (config.law.low + config.law.high));
  }
  if (config.reference.size() == 1) return std::vector<double>(p, config.reference[0]);
  if (config.reference.size() != p) {
    throw ArgumentError(fmt::format("reference has {} entries, target arity is {}",
                                    config.reference.size(), arity));
  }
  return config.reference;
}

ExperimentConfig parse_experiment_toml(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ParseError(std::string("malformed config: ") + std::string(e.description()),
                     e.source().begin.column);
  }
  const TomlReader r(root);
  ExperimentConfig c;
  std::string file;
  r.read("target", "name", c.target);
  r.read("target", "file", file);
  if (!file.empty()) c.target = file;
  r.read("data", "samples", c.samples);
  r.read("data", "noise_variance", c.noise_variance);
  r.read("data", "low", c.law.low);
  r.read("data", "high", c.law.high);
  r.read("data", "seed", c.seed);
  r.read_list("network", "widths", c.widths);
  r.read("training", "learning_rate", c.training.learning_rate);
  r.read("training", "batch_size", c.training.batch_size);
  r.read("training", "epochs", c.training.epochs);
  r.read("training", "validation_fraction", c.training.validation_fraction);
  r.read("training", "beta1", c.training.beta1);
  r.read("training", "beta2", c.training.beta2);
  r.read("training", "epsilon", c.training.epsilon);
  r.read("training", "weight_decay", c.training.weight_decay);
  r.read("training", "cosine_decay", c.training.cosine_decay);
  r.read("attribution", "eval_points", c.eval_points);
  r.read_list("attribution", "reference", c.reference);
  std::string rule = to_string(c.quadrature.rule);
  r.read("attribution", "rule", rule);
  c.quadrature.rule = parse_quadrature_rule(rule);
  r.read("attribution", "steps", c.quadrature.steps);
  r.read("attribution", "split_at_kinks", c.quadrature.split_at_kinks);
  r.read("attribution", "scan_points", c.quadrature.scan_points);
  r.read("attribution", "bins", c.bins);
  r.read("output", "directory", c.output_dir);
  c.validate();
  return c;
}

std::string experiment_config_to_json(const ExperimentConfig& c, int indent) {
  ordered_json j;
  j["target"] = c.target;
  j["samples"] = c.samples;
  j["noise_variance"] = c.noise_variance;
  j["low"] = c.law.low;
  j["high"] = c.law.high;
  j["reference"] = c.reference;
  j["eval_points"] = c.eval_points;
  j["quadrature"] = {{"rule", to_string(c.quadrature.rule)},
                     {"steps", c.quadrature.steps},
                     {"split_at_kinks", c.quadrature.split_at_kinks},
                     {"scan_points", c.quadrature.scan_points}};
  j["widths"] = c.widths;
  j["training"] = {{"learning_rate", c.training.learning_rate},
                   {"batch_size", c.training.batch_size},
                   {"epochs", c.training.epochs},
                   {"validation_fraction", c.training.validation_fraction},
                   {"beta1", c.training.beta1},
                   {"beta2", c.training.beta2},
                   {"epsilon", c.training.epsilon},
                   {"weight_decay", c.training.weight_decay},
                   {"cosine_decay", c.training.cosine_decay}};
  j["seed"] = c.seed;
  j["bins"] = c.bins;
  j["output_dir"] = c.output_dir;
  return j.dump(indent);
}

ExperimentConfig experiment_config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed config: ") + e.what(), e.byte);
  }
  if (j.contains("config")) j = j.at("config");  // a full manifest
  ExperimentConfig c;
  try {
    c.target = j.at("target").get<std::string>();
    c.samples = j.at("samples").get<int>();
    c.noise_variance = j.at("noise_variance").get<double>();
    c.law.low = j.at("low").get<double>();
    c.law.high = j.at("high").get<double>();
    c.reference = j.at("reference").get<std::vector<double>>();
    c.eval_points = j.at("eval_points").get<int>();
    const auto& q = j.at("quadrature");
    c.quadrature.rule = parse_quadrature_rule(q.at("rule").get<std::string>());
    c.quadrature.steps = q.at("steps").get<int>();
    c.quadrature.split_at_kinks = q.at("split_at_kinks").get<bool>();
    c.quadrature.scan_points = q.at("scan_points").get<int>();
    c.widths = j.at("widths").get<std::vector<int>>();
    const auto& t = j.at("training");
    c.training.learning_rate = t.at("learning_rate").get<double>();
    c.training.batch_size = t.at("batch_size").get<int>();
    c.training.epochs = t.at("epochs").get<int>();
    c.training.validation_fraction = t.at("validation_fraction").get<double>();
    c.training.beta1 = t.at("beta1").get<double>();
    c.training.beta2 = t.at("beta2").get<double>();
    c.training.epsilon = t.at("epsilon").get<double>();
    c.training.weight_decay = t.value("weight_decay", 0.0);
    c.training.cosine_decay = t.value("cosine_decay", false);
    c.seed = j.at("seed").get<std::uint64_t>();
    c.bins = j.at("bins").get<int>();
    c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what(), 0);
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const std::string text = read_file(path);
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".json") return experiment_config_from_json(text);
  return parse_experiment_toml(text);
}

Dataset generate_dataset(const ExperimentConfig& config, const Model& target) {
  config.validate();
  const int p = target.arity();
  Dataset d;
  d.model_name = target.name();
  d.noise_variance = config.noise_variance;
  d.seed = config.seed;
  d.x.resize(config.samples, p);
  d.y.resize(config.samples);
  std::mt19937_64 data_rng(derive_seed(config.seed, SeedStream::kData));
  std::mt19937_64 noise_rng(derive_seed(config.seed, SeedStream::kNoise));
  std::uniform_real_distribution<double> law(config.law.low, config.law.high);
  std::normal_distribution<double> noise(0.0, std::sqrt(config.noise_variance));
  std::vector<double> row(static_cast<std::size_t>(p));
  for (int n = 0; n < config.samples; ++n) {
    for (int i = 0; i < p; ++i) {
      row[static_cast<std::size_t>(i)] = law(data_rng);
      d.x(n, i) = row[static_cast<std::size_t>(i)];
    }
    const double eps = config.noise_variance > 0.0 ? noise(noise_rng) : 0.0;
    d.y(n) = target.evaluate(row) + eps;
  }
  return d;
}

std::vector<std::vector<double>> sample_eval_points(const ExperimentConfig& config,
                                                    int arity) {
  if (config.eval_points < 1) throw ArgumentError("evaluation point count must be >= 1");
  if (!(config.law.low < config.law.high)) throw ArgumentError("feature law needs low < high");
  std::mt19937_64 rng(derive_seed(config.seed, SeedStream::kEvalPoints));
  std::uniform_real_distribution<double> law(config.law.low, config.law.high);
  std::vector<std::vector<double>> points(static_cast<std::size_t>(config.eval_points));
  for (auto& x : points) {
    x.resize(static_cast<std::size_t>(arity));
    for (double& v : x) v = law(rng);
  }
  return points;
}

Histogram make_histogram(std::span<const double> values, int bins) {
  if (values.empty()) throw ArgumentError("cannot summarize an empty set of differences");
  if (bins < 1) throw ArgumentError("histogram bin count must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Histogram h;
  if (!(hi > lo)) {
    h.edges = {lo, hi};
    h.counts = {values.size()};
    return h;
  }
  const auto nb = static_cast<std::size_t>(bins);
  h.counts.assign(nb, 0);
  for (std::size_t b = 0; b <= nb; ++b) {
    h.edges.push_back(b == nb ? hi : lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(nb));
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(nb));
    h.counts[std::min(b, nb - 1)] += 1;
  }
  return h;
}

DiffSummary summarize_differences(const std::vector<std::vector<double>>& per_feature,
                                  int bins) {
  if (per_feature.empty()) throw ArgumentError("no features to summarize");
  DiffSummary s;
  for (const auto& diffs : per_feature) {
    if (diffs.empty()) throw ArgumentError("cannot summarize an empty set of differences");
    FeatureDiffStats f;
    f.diffs = diffs;
    double total = 0.0;
    std::vector<double> abs_values;
    for (double d : diffs) {
      total += d;
      abs_values.push_back(std::fabs(d));
      f.max_abs = std::max(f.max_abs, std::fabs(d));
    }
    f.mean = total / static_cast<double>(diffs.size());
    f.median = median_of(diffs);
    f.median_abs = median_of(abs_values);
    f.histogram = make_histogram(diffs, bins);
    s.features.push_back(std::move(f));
  }
  return s;
}

ComparisonResult run_comparison(const ExperimentConfig& config, const Exec& exec) {
  config.validate();
  ComparisonResult out;
  out.config = config;
  out.target = resolve_target(config.target);
  const ExprModel truth(out.target);
  const int p = truth.arity();
  out.reference = resolved_reference(config, p);

  Dataset data;
  try {
    data = generate_dataset(config, truth);
  } catch (const Error& e) {
    throw PipelineError("data", e.what());
  }
  out.network_spec = {p, config.widths, derive_seed(config.seed, SeedStream::kNetworkInit)};
  TrainingConfig training = config.training;
  training.seed = derive_seed(config.seed, SeedStream::kShuffle);
  try {
    auto trained = train(out.network_spec, training, data);
    out.network = std::move(trained.params);
    out.training = std::move(trained.report);
  } catch (const Error& e) {
    throw PipelineError("training", e.what());
  }
  const MlpModel fitted(out.network_spec, out.network, "fitted_" + out.target.name);

  const auto xs = sample_eval_points(config, p);
  out.points.resize(xs.size());
  const Exec inner{1};
  try {
    parallel_for(xs.size(), exec, [&](std::size_t k) {
      const BaselinePair pair{xs[k], out.reference};
      PointAttributions& pa = out.points[k];
      pa.x_o = xs[k];
      pa.bshap_truth = bshap_exact(truth, pair, {}, inner);
      pa.ig_truth = ig_quadrature(truth, pair, config.quadrature, inner);
      pa.bshap_fitted = bshap_exact(fitted, pair, {}, inner);
      pa.ig_fitted = ig_quadrature(fitted, pair, config.quadrature, inner);
    });
  } catch (const Error& e) {
    throw PipelineError("attribution", e.what());
  }

  std::vector<std::vector<double>> dt(static_cast<std::size_t>(p));
  std::vector<std::vector<double>> df(static_cast<std::size_t>(p));
  for (const auto& pa : out.points) {
    for (std::size_t i = 0; i < dt.size(); ++i) {
      dt[i].push_back(pa.bshap_truth.attributions[i] - pa.ig_truth.attributions[i]);
      df[i].push_back(pa.bshap_fitted.attributions[i] - pa.ig_fitted.attributions[i]);
    }
  }
  out.truth = summarize_differences(dt, config.bins);
  out.fitted = summarize_differences(df, config.bins);
  return out;
}

void emit_results(const ComparisonResult& result, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec || !std::filesystem::is_directory(directory)) {
    throw IoError(fmt::format("cannot create output directory {}: {}",
                              directory.string(), ec ? ec.message() : "not a directory"));
  }
  const auto names = feature_names(result.target.arity);

  std::string attributions = "point_id,branch,feature,method,value\n";
  std::string diffs = "point_id,feature,branch,diff\n";
  for (std::size_t k = 0; k < result.points.size(); ++k) {
    const auto& pa = result.points[k];
    for (std::size_t i = 0; i < names.size(); ++i) {
      attributions += fmt::format("{},truth,{},bshap,{}\n", k, names[i],
                                  format_double(pa.bshap_truth.attributions[i]));
      attributions += fmt::format("{},truth,{},ig,{}\n", k, names[i],
                                  format_double(pa.ig_truth.attributions[i]));
      attributions += fmt::format("{},fitted,{},bshap,{}\n", k, names[i],
                                  format_double(pa.bshap_fitted.attributions[i]));
      attributions += fmt::format("{},fitted,{},ig,{}\n", k, names[i],
                                  format_double(pa.ig_fitted.attributions[i]));
    }
  }
  for (std::size_t k = 0; k < result.points.size(); ++k) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      diffs += fmt::format("{},{},truth,{}\n", k, names[i],
                           format_double(result.truth.features[i].diffs[k]));
      diffs += fmt::format("{},{},fitted,{}\n", k, names[i],
                           format_double(result.fitted.features[i].diffs[k]));
    }
  }
  std::string histograms = "feature,branch,bin_lo,bin_hi,count\n";
  for (const auto& [branch, summary] :
       {std::pair{"truth", &result.truth}, std::pair{"fitted", &result.fitted}}) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto& h = summary->features[i].histogram;
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        histograms += fmt::format("{},{},{},{},{}\n", names[i], branch,
                                  format_double(h.edges[b]), format_double(h.edges[b + 1]),
                                  h.counts[b]);
      }
    }
  }

  ordered_json manifest;
  manifest["config"] = ordered_json::parse(experiment_config_to_json(result.config));
  manifest["target"] = {{"name", result.target.name},
                        {"arity", result.target.arity},
                        {"expression", to_string(result.target.body)}};
  manifest["reference"] = result.reference;
  const auto seed = result.config.seed;
  manifest["seeds"] = {{"master", seed},
                       {"data", derive_seed(seed, SeedStream::kData)},
                       {"noise", derive_seed(seed, SeedStream::kNoise)},
                       {"network_init", derive_seed(seed, SeedStream::kNetworkInit)},
                       {"shuffle", derive_seed(seed, SeedStream::kShuffle)},
                       {"eval_points", derive_seed(seed, SeedStream::kEvalPoints)}};
  manifest["versions"] = {{"attrikit", ATTRIKIT_VERSION},
                          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION,
                                                EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                          {"fmt", FMT_VERSION}};
  manifest["training"] = {{"initial_train_loss", result.training.initial_train_loss},
                          {"final_train_loss", result.training.final_train_loss},
                          {"validation_r2", result.training.validation_r2},
                          {"train_rows", result.training.train_rows},
                          {"validation_rows", result.training.validation_rows}};
  ordered_json summary;
  for (const auto& [branch, s] :
       {std::pair{"truth", &result.truth}, std::pair{"fitted", &result.fitted}}) {
    ordered_json features = ordered_json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto& f = s->features[i];
      features.push_back({{"feature", names[i]},
                          {"mean", f.mean},
                          {"median", f.median},
                          {"median_abs", f.median_abs},
                          {"max_abs", f.max_abs},
                          {"histogram", histogram_json(f.histogram)}});
    }
    summary[branch] = std::move(features);
  }
  manifest["summary"] = std::move(summary);

  write_file(directory / "attributions.csv", attributions);
  write_file(directory / "diffs.csv", diffs);
  write_file(directory / "histograms.csv", histograms);
  write_file(directory / "manifest.json", manifest.dump(2) + "\n");
  write_file(directory / "network.json",
             network_to_json(result.network_spec, result.network) + "\n");
}

}  // namespace attrikit
