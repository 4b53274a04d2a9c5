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

#include "attrikit/cli.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attrikit/attribution.hpp"
#include "attrikit/axioms.hpp"
#include "attrikit/error.hpp"
#include "attrikit/expr.hpp"
#include "attrikit/neural.hpp"
#include "attrikit/output.hpp"
#include "attrikit/seeding.hpp"
#include "attrikit/simulate.hpp"

namespace attrikit {
namespace {

using ordered_json = nlohmann::ordered_json;

// Thrown for bad input; mapped to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::vector<double> parse_doubles(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::string_view rest = text;
  for (;;) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty() && item.front() == '+') item.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() ||
        !std::isfinite(v)) {
      throw UsageError(fmt::format("{}: '{}' is not a number", flag, item));
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text, const char* flag) {
  std::vector<int> out;
  for (double v : parse_doubles(text, flag)) {
    if (v != std::floor(v)) throw UsageError(fmt::format("{}: expected integers", flag));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("ATTRIKIT_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::uint64_t v = 0;
  const std::string_view s(raw);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError("ATTRIKIT_SEED must be a nonnegative integer");
  }
  return v;
}

// Runs `fn`, turning library argument/parse/input errors into UsageError.
template <typename Fn>
auto as_usage(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const UsageError&) {
    throw;
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
}

// Files and builtins first; otherwise `source` is read as an inline expression
// over x1..x{inline_arity}.
std::unique_ptr<Model> load_model(const std::string& source, int inline_arity = 0) {
  return as_usage([&]() -> std::unique_ptr<Model> {
    std::error_code ec;
    if (std::filesystem::path(source).extension() == ".json" &&
        std::filesystem::is_regular_file(source, ec)) {
      auto [spec, params] = load_network(source);
      return std::make_unique<MlpModel>(std::move(spec), std::move(params),
                                        std::filesystem::path(source).stem().string());
    }
    try {
      return std::make_unique<ExprModel>(resolve_target(source));
    } catch (const ArgumentError&) {
      if (inline_arity < 1) throw;
      try {
        return std::make_unique<ExprModel>(
            ModelDefinition{"expr", inline_arity, parse_expression(source, inline_arity)});
      } catch (const ParseError& e) {
        throw UsageError(fmt::format(
            "model '{}' is not a file, a builtin or a valid expression ({})", source,
            e.what()));
      }
    }
  });
}

struct AttributeArgs {
  std::string model;
  std::string xo;
  std::string xr;
  std::string method = "bshap";
  std::string rule = "gauss_legendre";
  int steps = 64;
  bool no_split = false;
  int scan_points = 1024;
  int permutations = 1000;
  std::optional<std::uint64_t> seed;
  int max_arity = 20;
  std::string format = "json";
};

int cmd_attribute(const AttributeArgs& a, const Exec& exec, std::ostream& out) {
  BaselinePair pair{parse_doubles(a.xo, "--xo"), parse_doubles(a.xr, "--xr")};
  const auto model = load_model(a.model, static_cast<int>(pair.x_o.size()));
  if (pair.x_r.size() == 1) pair.x_r.assign(pair.x_o.size(), pair.x_r[0]);
  as_usage([&] { pair.validate(model->arity()); });
  QuadratureSpec quad;
  as_usage([&] { quad.rule = parse_quadrature_rule(a.rule); });
  quad.steps = a.steps;
  quad.split_at_kinks = !a.no_split;
  quad.scan_points = a.scan_points;
  if (a.steps < 1) throw UsageError("--steps must be >= 1");
  if (a.permutations < 1) throw UsageError("--permutations must be >= 1");

  AttributionResult result;
  if (a.method == "bshap" || a.method == "bshap_exact") {
    if (model->arity() > a.max_arity) {
      throw UsageError(fmt::format("arity {} exceeds --max-arity {}; use bshap_sampled",
                                   model->arity(), a.max_arity));
    }
    result = bshap_exact(*model, pair, {a.max_arity}, exec);
  } else if (a.method == "bshap_sampled" || a.method == "sampled") {
    const auto seed = a.seed ? a.seed : env_seed();
    result = bshap_sampled(*model, pair, {a.permutations, seed.value_or(0)}, exec);
  } else if (a.method == "ig") {
    result = ig_quadrature(*model, pair, quad, exec);
  } else {
    throw UsageError(fmt::format("unknown method '{}'", a.method));
  }
  if (a.format == "csv") {
    out << attribution_csv_header(model->arity()) << '\n'
        << attribution_csv_row(result) << '\n';
  } else {
    out << attribution_to_json(result) << '\n';
  }
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::string target = "additive_eq2";
  std::string out;
  int samples = 10000;
  double noise = 0.25;
  double low = -1.0;
  double high = 2.0;
  std::string widths = "64,64";
  int epochs = 200;
  double lr = 1e-3;
  int batch = 128;
  double validation = 0.2;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a, const CLI::App& app, std::ostream& out) {
  ExperimentConfig c;
  if (!a.config.empty()) {
    c = as_usage([&] { return load_experiment_config(a.config); });
  }
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--target") || a.config.empty()) c.target = a.target;
  if (given("--samples")) c.samples = a.samples;
  if (given("--noise")) c.noise_variance = a.noise;
  if (given("--low")) c.law.low = a.low;
  if (given("--high")) c.law.high = a.high;
  if (given("--widths") || a.config.empty()) c.widths = parse_ints(a.widths, "--widths");
  if (given("--epochs")) c.training.epochs = a.epochs;
  if (given("--lr")) c.training.learning_rate = a.lr;
  if (given("--batch")) c.training.batch_size = a.batch;
  if (given("--validation")) c.training.validation_fraction = a.validation;
  if (auto s = env_seed()) c.seed = *s;
  if (a.seed) c.seed = *a.seed;
  const auto target = as_usage([&] {
    c.validate();
    return resolve_target(c.target);
  });
  const ExprModel truth(target);
  const Dataset data = generate_dataset(c, truth);
  const MlpSpec spec{truth.arity(), c.widths, derive_seed(c.seed, SeedStream::kNetworkInit)};
  TrainingConfig tc = c.training;
  tc.seed = derive_seed(c.seed, SeedStream::kShuffle);
  const auto trained = train(spec, tc, data);
  save_network(a.out, spec, trained.params);

  ordered_json j;
  j["network"] = a.out;
  j["target"] = target.name;
  j["initial_train_loss"] = trained.report.initial_train_loss;
  j["final_train_loss"] = trained.report.final_train_loss;
  j["validation_r2"] = trained.report.validation_r2;
  auto epochs = ordered_json::array();
  for (const auto& e : trained.report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"validation_loss", e.validation_loss}});
  }
  j["epochs"] = std::move(epochs);
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const Exec& exec, std::ostream& out) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(config_path, ec)) {
    throw UsageError("config file not found: " + config_path);
  }
  ExperimentConfig c = as_usage([&] { return load_experiment_config(config_path); });
  if (auto s = env_seed()) c.seed = *s;
  if (!out_dir.empty()) c.output_dir = out_dir;
  as_usage([&] { c.validate(); });
  const auto result = run_comparison(c, exec);
  try {
    emit_results(result, c.output_dir);
  } catch (const Error& e) {
    throw PipelineError("output", e.what());
  }
  ordered_json j;
  j["target"] = result.target.name;
  j["output_dir"] = c.output_dir;
  j["features"] = feature_names(result.target.arity);
  auto medians = [](const DiffSummary& s, bool absolute) {
    std::vector<double> v;
    for (const auto& f : s.features) v.push_back(absolute ? f.median_abs : f.median);
    return v;
  };
  j["truth_median_diff"] = medians(result.truth, false);
  j["truth_median_abs_diff"] = medians(result.truth, true);
  j["fitted_median_diff"] = medians(result.fitted, false);
  j["fitted_median_abs_diff"] = medians(result.fitted, true);
  j["validation_r2"] = result.training.validation_r2;
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_axioms(const std::string& model_source, std::optional<std::uint64_t> seed,
               int trials, const Exec& exec, std::ostream& out) {
  if (trials < 1) throw UsageError("--trials must be >= 1");
  const auto def = as_usage([&] { return resolve_target(model_source); });
  AxiomOptions options;
  options.trials = trials;
  if (!seed) seed = env_seed();
  options.seed = seed.value_or(0);
  options.exec = exec;
  const auto report = run_axioms(def, options);
  out << axiom_report_to_json(report) << '\n';
  return report.all_passed() ? kExitOk : kExitFailure;
}

std::array<double, 4> parse_beta(const std::string& text) {
  const auto v = parse_doubles(text, "--beta");
  if (v.size() != 4) throw UsageError("--beta needs four coefficients b0,b1,b2,b12");
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Baseline Shapley and Integrated Gradients attributions", "attrikit"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = available parallelism)");

  AttributeArgs attr;
  auto* attribute = app.add_subcommand("attribute", "Attribute f(xo) - f(xr) to the inputs");
  attribute->add_option("--model", attr.model, "Builtin name, model file or network .json")
      ->required();
  attribute->add_option("--xo", attr.xo, "Point of interest, comma separated")->required();
  attribute->add_option("--xr", attr.xr, "Reference point, comma separated")->required();
  attribute->add_option("--method", attr.method, "bshap | bshap_sampled | ig")
      ->capture_default_str();
  attribute->add_option("--rule", attr.rule, "midpoint | trapezoid | gauss")
      ->capture_default_str();
  attribute->add_option("--steps", attr.steps, "Quadrature nodes per segment")
      ->capture_default_str();
  attribute->add_flag("--no-split", attr.no_split, "Do not split the path at kinks");
  attribute->add_option("--scan-points", attr.scan_points, "Kink scan resolution")
      ->capture_default_str();
  attribute->add_option("--permutations", attr.permutations, "Sampled orderings")
      ->capture_default_str();
  attribute->add_option("--seed", attr.seed, "Sampling seed");
  attribute->add_option("--max-arity", attr.max_arity, "Exact enumeration cap")
      ->capture_default_str();
  attribute->add_option("--format", attr.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Fit a ReLU network to simulated data");
  train_cmd->add_option("--config", tr.config, "Experiment config (TOML or manifest JSON)");
  train_cmd->add_option("--target", tr.target, "Target model")->capture_default_str();
  train_cmd->add_option("--out", tr.out, "Network file to write")->required();
  train_cmd->add_option("--samples", tr.samples)->capture_default_str();
  train_cmd->add_option("--noise", tr.noise, "Noise variance")->capture_default_str();
  train_cmd->add_option("--low", tr.low)->capture_default_str();
  train_cmd->add_option("--high", tr.high)->capture_default_str();
  train_cmd->add_option("--widths", tr.widths, "Hidden widths, comma separated")
      ->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->capture_default_str();
  train_cmd->add_option("--batch", tr.batch)->capture_default_str();
  train_cmd->add_option("--validation", tr.validation)->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Master seed");

  std::string sim_config;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Run the BShap vs IG simulation pipeline");
  simulate->add_option("--config", sim_config, "Experiment config (TOML or manifest JSON)")
      ->required();
  simulate->add_option("--out", sim_out, "Output directory (overrides the config)");

  std::string ax_model;
  std::optional<std::uint64_t> ax_seed;
  int ax_trials = 20;
  auto* axioms = app.add_subcommand("axioms", "Check the attribution axioms on a model");
  axioms->add_option("--model", ax_model, "Builtin name or model file")->required();
  axioms->add_option("--seed", ax_seed, "Sampling seed");
  axioms->add_option("--trials", ax_trials, "Random pairs per axiom")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "Independent reference computations");
  oracle->require_subcommand(1);
  std::string or_beta, or_xo, or_xr, or_model;
  auto* poly = oracle->add_subcommand("poly", "Closed forms for b0 + b1 x1 + b2 x2 + b12 x1 x2^2");
  poly->add_option("--beta", or_beta, "b0,b1,b2,b12")->required();
  poly->add_option("--xo", or_xo)->required();
  poly->add_option("--xr", or_xr)->required();
  auto* enumerate = oracle->add_subcommand("enumerate", "BShap by brute force over all orderings");
  enumerate->add_option("--model", or_model)->required();
  enumerate->add_option("--xo", or_xo)->required();
  enumerate->add_option("--xr", or_xr)->required();
  auto* decompose = oracle->add_subcommand("decompose", "Two-feature E11/E12 decomposition");
  decompose->add_option("--model", or_model)->required();
  decompose->add_option("--xo", or_xo)->required();
  decompose->add_option("--xr", or_xr)->required();

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Exec exec{threads};
  try {
    if (*attribute) return cmd_attribute(attr, exec, out);
    if (*train_cmd) return cmd_train(tr, *train_cmd, out);
    if (*simulate) return cmd_simulate(sim_config, sim_out, exec, out);
    if (*axioms) return cmd_axioms(ax_model, ax_seed, ax_trials, exec, out);
    if (*poly) {
      const auto beta = parse_beta(or_beta);
      const BaselinePair pair{parse_doubles(or_xo, "--xo"), parse_doubles(or_xr, "--xr")};
      as_usage([&] { pair.validate(2); });
      const auto cf = closed_form_poly_interaction(beta, pair);
      ordered_json j;
      j["bshap"] = cf.bshap.attributions;
      j["ig"] = cf.ig.attributions;
      j["bshap_gap"] = cf.bshap.gap;
      j["ig_gap"] = cf.ig.gap;
      out << j.dump() << '\n';
      return kExitOk;
    }
    if (*enumerate || *decompose) {
      const auto model = load_model(or_model);
      const BaselinePair pair{parse_doubles(or_xo, "--xo"), parse_doubles(or_xr, "--xr")};
      as_usage([&] { pair.validate(model->arity()); });
      ordered_json j;
      if (*enumerate) {
        j["attributions"] = as_usage([&] { return bshap_by_orderings(*model, pair); });
      } else {
        const auto d = as_usage([&] { return two_feature_decomposition(*model, pair); });
        j = {{"e11", d.e11}, {"e12", d.e12}, {"phi1", d.phi1}};
      }
      out << j.dump() << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "attrikit: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PipelineError& e) {
    err << "attrikit: simulate failed in " << e.stage() << " stage: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "attrikit: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace attrikit
