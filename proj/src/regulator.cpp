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

#include "softalign/regulator.hpp"

#include <cfenv>
#include <cmath>
#include <stdexcept>

namespace softalign {

DurationVector sample_durations(const DurationParams& params, Rng& rng) {
  const int n = params.tokens();
  const int max_dur = params.max_duration();
  DurationVector out(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < max_dur; ++m) {
      if (rng.bernoulli(params.p(i, m))) {
        out[i] = m + 1;
        break;
      }
    }
  }
  return out;
}

DurationVector discretize_durations(const std::vector<double>& expected,
                                    int max_duration) {
  DurationVector out(expected.size(), 0);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!std::isfinite(expected[i])) {
      throw std::invalid_argument("discretize_durations: non-finite value");
    }
    // nearbyint rounds half to even under the default FE_TONEAREST mode.
    int d = static_cast<int>(std::nearbyint(expected[i]));
    if (d < 0) d = 0;
    if (max_duration >= 0 && d > max_duration) d = max_duration;
    out[i] = d;
  }
  return out;
}

DurationVector scale_durations(const std::vector<double>& values,
                               double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("scale_durations: factor must be positive");
  }
  std::vector<double> scaled(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    scaled[i] = values[i] * factor;
  }
  return discretize_durations(scaled);
}

DurationVector scale_durations(const DurationVector& durations, double factor) {
  if (factor == 1.0) return durations;
  std::vector<double> values(durations.begin(), durations.end());
  return scale_durations(values, factor);
}

Matrix expand(const Matrix& hidden, const DurationVector& durations) {
  if (hidden.rows() != static_cast<int>(durations.size())) {
    throw std::invalid_argument("expand: token count mismatch");
  }
  long total = 0;
  for (int d : durations) {
    if (d < 0) throw std::invalid_argument("expand: negative duration");
    total += d;
  }
  Matrix out(static_cast<int>(total), hidden.cols());
  int j = 0;
  for (int i = 0; i < hidden.rows(); ++i) {
    const double* src = hidden.row(i);
    for (int r = 0; r < durations[i]; ++r, ++j) {
      double* dst = out.row(j);
      for (int d = 0; d < hidden.cols(); ++d) dst[d] = src[d];
    }
  }
  return out;
}

AttentionMatrix hard_attention(const DurationVector& durations,
                               int num_frames) {
  if (num_frames < 0) {
    throw std::invalid_argument("hard_attention: negative frame count");
  }
  const int n = static_cast<int>(durations.size());
  AttentionMatrix out;
  out.s = Matrix(n, num_frames, 0.0);
  long start = 0;
  for (int i = 0; i < n; ++i) {
    if (durations[i] < 0) {
      throw std::invalid_argument("hard_attention: negative duration");
    }
    const long end = start + durations[i];
    for (long j = start; j < end && j < num_frames; ++j) {
      out.s(i, static_cast<int>(j)) = 1.0;
    }
    start = end;
  }
  return out;
}

}  // namespace softalign
