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

#include "softalign/duration_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softalign {

namespace {

double clamp_prob(double v) {
  return std::min(1.0 - kProbEps, std::max(kProbEps, v));
}

// Tail sums of one duration distribution: tail[k] = P(w >= k) for
// k = 0..M+1 (tail[0] = 1, tail[M+1] = 0). This is the reverse cumulative
// sum that attention_probability builds on.
std::vector<double> tail_probabilities(const double* l_row, int max_duration) {
  std::vector<double> tail(max_duration + 2, 0.0);
  for (int k = max_duration; k >= 0; --k) {
    tail[k] = tail[k + 1] + l_row[k];
  }
  return tail;
}

}  // namespace

DurationParams apply_noisy_sigmoid(const Matrix& logits, double noise_std,
                                   Rng& rng) {
  if (!all_finite(logits)) {
    throw std::invalid_argument("apply_noisy_sigmoid: non-finite logit");
  }
  if (logits.rows() < 1 || logits.cols() < 1) {
    throw std::invalid_argument("apply_noisy_sigmoid: empty logit matrix");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("apply_noisy_sigmoid: noise_std must be >= 0");
  }
  DurationParams params;
  params.p = Matrix(logits.rows(), logits.cols());
  for (int i = 0; i < logits.rows(); ++i) {
    for (int m = 0; m < logits.cols(); ++m) {
      double z = logits(i, m);
      if (noise_std > 0.0) z += noise_std * rng.normal();
      params.p(i, m) = clamp_prob(1.0 / (1.0 + std::exp(-z)));
    }
  }
  return params;
}

LengthProbability length_probability(const DurationParams& params) {
  const int n = params.tokens();
  const int max_dur = params.max_duration();
  LengthProbability length;
  length.l = Matrix(n, max_dur + 1);
  for (int i = 0; i < n; ++i) {
    // log_survival accumulates sum_k log(1 - p(i, k)); exponentiating per
    // entry keeps the product stable even when many trials are near one.
    double log_survival = 0.0;
    for (int m = 1; m <= max_dur; ++m) {
      const double p = params.p(i, m - 1);
      length.l(i, m) = p * std::exp(log_survival);
      log_survival += std::log1p(-p);
    }
    length.l(i, 0) = std::exp(log_survival);
  }
  return length;
}

CumulativeDuration cumulative_duration(const LengthProbability& length,
                                       int num_frames) {
  if (num_frames < 1) {
    throw std::invalid_argument("cumulative_duration: num_frames must be >= 1");
  }
  const int n = length.tokens();
  const int max_dur = length.max_duration();
  const int t_frames = num_frames;
  const int ovf = t_frames + 1;

  CumulativeDuration cumulative;
  cumulative.q = Matrix(n, t_frames + 2);
  Matrix& q = cumulative.q;

  // First token: its own duration distribution, excess mass past T in the
  // overflow cell.
  for (int j = 0; j <= std::min(max_dur, t_frames); ++j) {
    q(0, j) = length.l(0, j);
  }
  double overflow = 0.0;
  for (int m = t_frames + 1; m <= max_dur; ++m) overflow += length.l(0, m);
  q(0, ovf) = overflow;

  for (int i = 1; i < n; ++i) {
    const double* l_row = length.l.row(i);
    const std::vector<double> tail = tail_probabilities(l_row, max_dur);
    for (int j = 0; j <= t_frames; ++j) {
      double acc = 0.0;
      const int m_lo = std::max(0, j - max_dur);
      for (int m = m_lo; m <= j; ++m) {
        acc += q(i - 1, m) * l_row[j - m];
      }
      q(i, j) = acc;
    }
    // Total already past T stays past T; otherwise token i pushes it past T
    // whenever its duration exceeds the remaining budget.
    double acc = q(i - 1, ovf);
    for (int m = 0; m <= t_frames; ++m) {
      const int k = t_frames + 1 - m;  // k >= 1
      if (k <= max_dur) acc += q(i - 1, m) * tail[k];
    }
    q(i, ovf) = acc;
  }
  return cumulative;
}

AttentionMatrix attention_probability(const LengthProbability& length,
                                      const CumulativeDuration& cumulative) {
  if (length.tokens() != cumulative.tokens()) {
    throw std::invalid_argument(
        "attention_probability: token count mismatch between l and q");
  }
  const int n = length.tokens();
  const int max_dur = length.max_duration();
  const int t_frames = cumulative.num_frames();

  AttentionMatrix attention;
  attention.s = Matrix(n, t_frames);
  Matrix& s = attention.s;

  {
    const std::vector<double> tail =
        tail_probabilities(length.l.row(0), max_dur);
    for (int j = 1; j <= t_frames; ++j) {
      s(0, j - 1) = j <= max_dur ? tail[j] : 0.0;
    }
  }
  for (int i = 1; i < n; ++i) {
    const std::vector<double> tail =
        tail_probabilities(length.l.row(i), max_dur);
    for (int j = 1; j <= t_frames; ++j) {
      double acc = 0.0;
      const int m_lo = std::max(0, j - max_dur);
      for (int m = m_lo; m <= j - 1; ++m) {
        acc += cumulative.q(i - 1, m) * tail[j - m];
      }
      s(i, j - 1) = acc;
    }
  }
  return attention;
}

std::vector<double> expected_durations(const LengthProbability& length) {
  const int n = length.tokens();
  const int max_dur = length.max_duration();
  std::vector<double> expected(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int m = 1; m <= max_dur; ++m) {
      acc += m * length.l(i, m);
    }
    expected[i] = acc;
  }
  return expected;
}

Matrix expected_upsample(const AttentionMatrix& attention,
                         const Matrix& hidden) {
  if (attention.tokens() != hidden.rows()) {
    throw std::invalid_argument(
        "expected_upsample: token count mismatch between s and h");
  }
  const int n = attention.tokens();
  const int t_frames = attention.num_frames();
  const int dim = hidden.cols();
  Matrix expanded(t_frames, dim, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* h_row = hidden.row(i);
    for (int j = 0; j < t_frames; ++j) {
      const double w = attention.s(i, j);
      double* y_row = expanded.row(j);
      for (int d = 0; d < dim; ++d) {
        y_row[d] += w * h_row[d];
      }
    }
  }
  return expanded;
}

AlignResult align(const Matrix& logits, const Matrix& hidden, int num_frames,
                  double noise_std, Rng& rng) {
  if (logits.rows() != hidden.rows()) {
    throw std::invalid_argument(
        "align: logits and hidden must have one row per token");
  }
  if (!all_finite(hidden)) {
    throw std::invalid_argument("align: non-finite hidden state");
  }
  AlignResult result;
  result.params = apply_noisy_sigmoid(logits, noise_std, rng);
  result.length = length_probability(result.params);
  result.cumulative = cumulative_duration(result.length, num_frames);
  result.attention = attention_probability(result.length, result.cumulative);
  result.expanded = expected_upsample(result.attention, hidden);
  result.expected_durations = expected_durations(result.length);
  result.hidden = hidden;
  result.noise_std = noise_std;
  return result;
}

}  // namespace softalign
