# Copyright 2026 The SoftAlign Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Differentiable stochastic duration model for monotonic alignment."""

from softalign._core import (  # noqa: F401
    PROB_EPS,
    align,
    align_grad,
    attention_probability,
    cumulative_duration,
    discretize_durations,
    duration_loss,
    expand,
    expected_durations,
    expected_upsample,
    feature_matching_loss,
    hard_attention,
    length_loss,
    length_probability,
    lsgan_discriminator_loss,
    lsgan_generator_loss,
    run_gradcheck_suite,
    run_oracle_suite,
    sample_durations,
    scale_durations,
    spectral_l1,
    total_generator_loss,
    train_toy,
)

__all__ = [
    "PROB_EPS",
    "align",
    "align_grad",
    "attention_probability",
    "cumulative_duration",
    "discretize_durations",
    "duration_loss",
    "expand",
    "expected_durations",
    "expected_upsample",
    "feature_matching_loss",
    "hard_attention",
    "length_loss",
    "length_probability",
    "lsgan_discriminator_loss",
    "lsgan_generator_loss",
    "run_gradcheck_suite",
    "run_oracle_suite",
    "sample_durations",
    "scale_durations",
    "spectral_l1",
    "total_generator_loss",
    "train_toy",
]

__version__ = "0.1.0"
