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
// Forward computations of the stochastic duration model. Token i carries a
// random duration w_i in {0, ..., M} induced by sequential Bernoulli trials
// with per-trial success probabilities p(i, m). Everything downstream —
// per-token duration distributions, the distribution of cumulative
// durations, the soft monotonic alignment, and the expected upsampled
// output — is an exact function of those probabilities, so the whole
// pipeline is differentiable (see grad_engine.hpp for the backward passes).

#ifndef SOFTALIGN_DURATION_KERNEL_HPP_
#define SOFTALIGN_DURATION_KERNEL_HPP_

#include <vector>

#include "softalign/matrix.hpp"
#include "softalign/rng.hpp"

namespace softalign {

// Probabilities are clamped into [kProbEps, 1 - kProbEps]; keeps log1p and
// the division by p / (1 - p) in the backward pass finite.
inline constexpr double kProbEps = 1e-7;

// Per-token Bernoulli parameters, N x M. Entry (i, m) is the success
// probability of trial m + 1 for token i.
struct DurationParams {
  Matrix p;

  int tokens() const { return p.rows(); }
  int max_duration() const { return p.cols(); }
};

// Per-token duration distribution, N x (M + 1). Column m is P(w_i = m);
// each row sums to one.
struct LengthProbability {
  Matrix l;

  int tokens() const { return l.rows(); }
  int max_duration() const { return l.cols() - 1; }
};

// Distribution of the total duration of the first i tokens, N x (T + 2).
// Column j <= T is P(w_1 + ... + w_i = j); the last column holds the
// overflow mass P(total > T) so each row stays a full distribution.
struct CumulativeDuration {
  Matrix q;

  int tokens() const { return q.rows(); }
  int num_frames() const { return q.cols() - 2; }
  int overflow_col() const { return q.cols() - 1; }
};

// Soft monotonic alignment, N x T. Entry (i, j) is the probability that
// output frame j + 1 belongs to token i + 1 (frames are 1-based in the
// math, 0-based in storage).
struct AttentionMatrix {
  Matrix s;

  int tokens() const { return s.rows(); }
  int num_frames() const { return s.cols(); }
};

// Everything one forward pass produces. Doubles as the gradient tape: the
// backward pass only needs these stored values (the noise draw is a
// constant with respect to differentiation).
struct AlignResult {
  DurationParams params;
  LengthProbability length;
  CumulativeDuration cumulative;
  AttentionMatrix attention;
  Matrix expanded;                          // T x D
  std::vector<double> expected_durations;   // N
  Matrix hidden;                            // N x D, kept for the backward
  double noise_std = 0.0;
};

// p = sigmoid(logits + noise_std * g), g i.i.d. standard normal, clamped
// into [kProbEps, 1 - kProbEps]. noise_std = 0 makes the map deterministic
// (rng is not touched). Throws std::invalid_argument on non-finite logits
// or negative noise_std.
DurationParams apply_noisy_sigmoid(const Matrix& logits, double noise_std,
                                   Rng& rng);

// l(i, m) = p(i, m) * prod_{k < m} (1 - p(i, k)) for m >= 1, and
// l(i, 0) = prod_{k} (1 - p(i, k)). The survival products are accumulated
// in log space (sum of log1p(-p)) and exponentiated per entry.
LengthProbability length_probability(const DurationParams& params);

// Row i is the distribution of w_1 + ... + w_i over {0, ..., T} plus the
// overflow cell. Row 1 is l's first row truncated to T; each later row is
// the discrete convolution of the previous row with that token's duration
// distribution. Throws if num_frames < 1.
CumulativeDuration cumulative_duration(const LengthProbability& length,
                                       int num_frames);

// s(1, j) = P(w_1 >= j); for i > 1,
// s(i, j) = sum_{m=0}^{j-1} q(i-1, m) * P(w_i >= j - m),
// i.e. frame j belongs to token i iff the first i-1 tokens end before j and
// token i's span reaches it. The reverse cumulative sums of l supply the
// tail probabilities. Monotonic by construction. Throws on shape mismatch
// between l and q.
AttentionMatrix attention_probability(const LengthProbability& length,
                                      const CumulativeDuration& cumulative);

// E[w_i] = sum_m m * l(i, m); each value lies in [0, M].
std::vector<double> expected_durations(const LengthProbability& length);

// Expected upsampled output, y(j, :) = sum_i s(i, j) * h(i, :). Frames with
// little coverage mass come out near zero; no renormalization is applied.
// Throws if the token counts of s and h differ.
Matrix expected_upsample(const AttentionMatrix& attention,
                         const Matrix& hidden);

// Full forward pass: noisy sigmoid -> length probability -> cumulative
// duration -> attention -> expected upsample + expected durations. All
// intermediates are returned for loss computation and for backward_align.
AlignResult align(const Matrix& logits, const Matrix& hidden, int num_frames,
                  double noise_std, Rng& rng);

}  // namespace softalign

#endif  // SOFTALIGN_DURATION_KERNEL_HPP_
