# Copyright 2026 The PatchDP Authors
#
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
"""Patch-level privacy accounting for DP-SGD with random cropping."""

from ._core import (
    Mechanism,
    __version__,
    account,
    calibrate_sigma,
    delta_profile,
    enumerate_inclusion,
    hockey_stick_gaussian,
    hockey_stick_subsampled,
    inclusion,
    naive_amplified_epsilon,
    run_cli,
)

__all__ = [
    "Mechanism",
    "__version__",
    "account",
    "calibrate_sigma",
    "delta_profile",
    "enumerate_inclusion",
    "hockey_stick_gaussian",
    "hockey_stick_subsampled",
    "inclusion",
    "naive_amplified_epsilon",
    "run_cli",
]
