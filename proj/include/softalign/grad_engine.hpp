// Copyright 2026 The SoftAlign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Hand-derived reverse-mode gradients for the duration kernel. The
// computation graph is fixed and small, so each forward operation gets an
// explicit backward function instead of a general tape machine; this keeps
// the clamping and log-space subtleties auditable. Every backward here is
// checked against central finite differences in the test suite.

#ifndef SOFTALIGN_GRAD_ENGINE_HPP_
#define SOFTALIGN_GRAD_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "softalign/duration_kernel.hpp"
#include "softalign/matrix.hpp"

namespace softalign {

// Cotangent of the duration parameters given the cotangent of the length
// probabilities. Uses dl(i,m)/dp(i,m) = l(i,m)/p(i,m) and
// dl(i,m)/dp(i,k) = -l(i,m)/(1-p(i,k)) for k < m (the zero-duration column
// behaves like m = M+1). p at the clamp boundary is used as stored; the
// clamp itself is handled in backward_align.
Matrix backward_length_probability(const DurationParams& params,
                                   const LengthProbability& length,
                                   const Matrix& upstream_length);

// Cotangent of l given cotangents of every q entry (overflow column
// included). Reverses the convolution recurrence row by row, carrying the
// adjoint of each intermediate q row downward.
Matrix backward_cumulative(const LengthProbability& length,
                           const CumulativeDuration& cumulative,
                           const Matrix& upstream_cumulative);

struct AttentionBackward {
  Matrix length_grad;      // N x (M+1)
  Matrix cumulative_grad;  // N x (T+2); q is an *input* here, so this is the
                           // direct cotangent only — feed it through
                           // backward_cumulative to reach l.
};

// Cotangents of l and q given the cotangent of the attention matrix.
AttentionBackward backward_attention(const LengthProbability& length,
                                     const CumulativeDuration& cumulative,
                                     const AttentionMatrix& attention,
                                     const Matrix& upstream_attention);

struct AlignGradients {
  Matrix logits_grad;  // N x M
  Matrix hidden_grad;  // N x D
};

// Full chain rule through one recorded forward pass: cotangents of the
// expanded output (T x D) and of the expected durations (length N, may be
// empty for all-zero) are pushed back to the logits and the hidden states.
// The sigmoid jacobian is p * (1 - p) evaluated at the stored (clamped)
// values; entries that were clamped pass no gradient.
AlignGradients backward_align(const AlignResult& tape,
                              const Matrix& upstream_expanded,
                              const std::vector<double>& upstream_expected);

// Outcome of one finite-difference comparison.
struct GradCheckReport {
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;  // |a-n| / (max(|a|, |n|) + 1e-3) per coordinate
  double epsilon = 0.0;
  bool pass = false;
  int worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Central differences (f(x+eps) - f(x-eps)) / (2 eps) per coordinate of x0,
// compared against `analytic`. A non-finite forward value is reported as a
// failure, not thrown.
GradCheckReport finite_difference_check(
    const std::function<double(const std::vector<double>&)>& forward,
    const std::vector<double>& x0, const std::vector<double>& analytic,
    double epsilon = 1e-5, double tolerance = 1e-5);

// Batch gradient check over random instances (see run_oracle_suite for the
// instance-drawing conventions). Each instance verifies the analytic
// gradients through l, q, s, the expected upsample (w.r.t. both logits and
// hidden states) and the length loss. Deterministic for a given seed
// regardless of `jobs`.
struct GradCheckSuiteResult {
  bool pass = false;
  int instances = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int worst_instance = -1;
  std::string worst_check;
  GradCheckReport worst_report;
};

GradCheckSuiteResult run_gradcheck_suite(int n_instances, double epsilon,
                                         std::uint64_t seed, int jobs = 1,
                                         double tolerance = 1e-5);

}  // namespace softalign

#endif  // SOFTALIGN_GRAD_ENGINE_HPP_
