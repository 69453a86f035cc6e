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
// Hard-alignment path used at inference: sampled or discretized integer
// durations, hidden-state expansion by repetition, duration scaling, and
// the binary attention matrix for soft/hard consistency checks.

#ifndef SOFTALIGN_REGULATOR_HPP_
#define SOFTALIGN_REGULATOR_HPP_

#include <vector>

#include "softalign/duration_kernel.hpp"
#include "softalign/matrix.hpp"
#include "softalign/rng.hpp"

namespace softalign {

// Frames per token; every entry is a non-negative integer.
using DurationVector = std::vector<int>;

// Draw one duration per token: Bernoulli trials with probabilities
// p(i, 0), p(i, 1), ... stop at the first success (duration = trial index,
// 1-based); no success within M trials gives duration 0.
DurationVector sample_durations(const DurationParams& params, Rng& rng);

// Round each expected duration to the nearest integer frame count,
// half-to-even, with a lower clamp at 0. max_duration >= 0 additionally
// caps each entry; pass -1 for no cap. Throws on non-finite input.
DurationVector discretize_durations(const std::vector<double>& expected,
                                    int max_duration = -1);

// Entrywise multiply by factor > 0, then discretize (no upper cap; scaling
// may exceed the training-time maximum on purpose). factor 1.0 returns the
// input durations unchanged.
DurationVector scale_durations(const std::vector<double>& values,
                               double factor);
DurationVector scale_durations(const DurationVector& durations, double factor);

// Repeat row i of h exactly d[i] times, in token order. Output has
// sum(d) rows (possibly zero). Throws on length mismatch or negative
// durations.
Matrix expand(const Matrix& hidden, const DurationVector& durations);

// Binary alignment: s(i, j) = 1 iff frame j + 1 falls inside token i's
// block [sum_{k<i} d_k, sum_{k<=i} d_k). Columns past the total duration
// are all zero. Throws on negative T or negative durations.
AttentionMatrix hard_attention(const DurationVector& durations,
                               int num_frames);

}  // namespace softalign

#endif  // SOFTALIGN_REGULATOR_HPP_
