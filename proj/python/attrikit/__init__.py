# Copyright 2026 The attrikit Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Baseline Shapley and Integrated Gradients attributions."""

from ._core import (
    ArgumentError,
    DomainError,
    Error,
    Model,
    ParseError,
    __version__,
    bshap_exact,
    bshap_sampled,
    builtin,
    builtin_names,
    closed_form_poly,
    ig,
    load_network,
    parse,
    run_comparison,
    to_string,
)

__all__ = [
    "ArgumentError",
    "DomainError",
    "Error",
    "Model",
    "ParseError",
    "bshap_exact",
    "bshap_sampled",
    "builtin",
    "builtin_names",
    "closed_form_poly",
    "ig",
    "load_network",
    "parse",
    "run_comparison",
    "to_string",
]
