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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "attrikit/attribution.hpp"
#include "attrikit/error.hpp"
#include "attrikit/expr.hpp"
#include "attrikit/neural.hpp"
#include "attrikit/output.hpp"
#include "attrikit/simulate.hpp"

namespace py = pybind11;
using namespace attrikit;

namespace {

py::dict result_dict(const AttributionResult& r) {
  py::dict d;
  d["method"] = to_string(r.method);
  d["attributions"] = r.attributions;
  d["gap"] = r.gap;
  d["value_o"] = r.value_o;
  d["value_r"] = r.value_r;
  d["model_evals"] = r.model_evals;
  d["gradient_evals"] = r.gradient_evals;
  if (!r.standard_errors.empty()) d["standard_errors"] = r.standard_errors;
  if (r.segments) d["segments"] = *r.segments;
  return d;
}

QuadratureSpec quad_spec(const std::string& rule, int steps, bool split) {
  QuadratureSpec q;
  q.rule = parse_quadrature_rule(rule);
  q.steps = steps;
  q.split_at_kinks = split;
  return q;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Baseline Shapley and Integrated Gradients attributions";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ArgumentError> arg_error(m, "ArgumentError", base.ptr());
  static py::exception<DomainError> domain_error(m, "DomainError", base.ptr());
  static py::exception<ParseError> parse_error(m, "ParseError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ArgumentError& e) {
      arg_error(e.what());
    } catch (const DomainError& e) {
      domain_error(e.what());
    } catch (const ParseError& e) {
      parse_error(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  py::class_<Model, std::shared_ptr<Model>>(m, "Model")
      .def_property_readonly("arity", &Model::arity)
      .def_property_readonly("name", &Model::name)
      .def("evaluate", [](const Model& f, const std::vector<double>& x) {
        check_point(f, x);
        return f.evaluate(x);
      })
      .def("gradient", [](const Model& f, const std::vector<double>& x) {
        check_point(f, x);
        return f.gradient(x);
      });

  m.def("parse", [](const std::string& source, int arity) {
        return std::shared_ptr<Model>(
            std::make_shared<ExprModel>(ModelDefinition{"expr", arity,
                                                        parse_expression(source, arity)}));
      },
      py::arg("source"), py::arg("arity"));
  m.def("to_string", [](const std::string& source, int arity) {
        return to_string(parse_expression(source, arity));
      },
      py::arg("source"), py::arg("arity"));
  m.def("builtin", [](const std::string& spec) {
        return std::shared_ptr<Model>(std::make_shared<ExprModel>(resolve_builtin(spec)));
      },
      py::arg("spec"));
  m.def("builtin_names", &builtin_names);
  m.def("load_network", [](const std::string& path) {
        auto [spec, params] = load_network(path);
        return std::shared_ptr<Model>(
            std::make_shared<MlpModel>(std::move(spec), std::move(params)));
      },
      py::arg("path"));

  m.def("bshap_exact",
        [](const Model& f, std::vector<double> xo, std::vector<double> xr) {
          AttributionResult r;
          {
            py::gil_scoped_release release;
            r = bshap_exact(f, {std::move(xo), std::move(xr)});
          }
          return result_dict(r);
        },
        py::arg("model"), py::arg("x_o"), py::arg("x_r"));
  m.def("bshap_sampled",
        [](const Model& f, std::vector<double> xo, std::vector<double> xr, int permutations,
           std::uint64_t seed) {
          return result_dict(
              bshap_sampled(f, {std::move(xo), std::move(xr)}, {permutations, seed}));
        },
        py::arg("model"), py::arg("x_o"), py::arg("x_r"), py::arg("permutations") = 1000,
        py::arg("seed") = 0);
  m.def("ig",
        [](const Model& f, std::vector<double> xo, std::vector<double> xr,
           const std::string& rule, int steps, bool split) {
          return result_dict(
              ig_quadrature(f, {std::move(xo), std::move(xr)}, quad_spec(rule, steps, split)));
        },
        py::arg("model"), py::arg("x_o"), py::arg("x_r"), py::arg("rule") = "gauss_legendre",
        py::arg("steps") = 64, py::arg("split_at_kinks") = true);
  m.def("closed_form_poly",
        [](const std::array<double, 4>& beta, std::vector<double> xo, std::vector<double> xr) {
          const auto cf = closed_form_poly_interaction(beta, {std::move(xo), std::move(xr)});
          py::dict d;
          d["bshap"] = cf.bshap.attributions;
          d["ig"] = cf.ig.attributions;
          return d;
        },
        py::arg("beta"), py::arg("x_o"), py::arg("x_r"));

  m.def("run_comparison",
        [](const std::string& config_path, const std::string& output_dir) {
          auto config = load_experiment_config(config_path);
          if (!output_dir.empty()) config.output_dir = output_dir;
          const auto result = run_comparison(config);
          emit_results(result, config.output_dir);
          py::dict d;
          std::vector<double> truth, fitted;
          for (const auto& s : result.truth.features) truth.push_back(s.median_abs);
          for (const auto& s : result.fitted.features) fitted.push_back(s.median_abs);
          d["truth_median_abs_diff"] = truth;
          d["fitted_median_abs_diff"] = fitted;
          d["validation_r2"] = result.training.validation_r2;
          return d;
        },
        py::arg("config"), py::arg("output_dir") = "");

  m.attr("__version__") = ATTRIKIT_VERSION;
}
