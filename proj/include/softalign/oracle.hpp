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
// Brute-force reference implementation. Durations of different tokens are
// independent, so every quantity the duration kernel computes can also be
// obtained by enumerating all (M+1)^N joint duration assignments and summing
// outcome probabilities directly. Deliberately has no code in common with
// the kernel's recurrences; it is the ground truth the fast path is tested
// against.

#ifndef SOFTALIGN_ORACLE_HPP_
#define SOFTALIGN_ORACLE_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "softalign/duration_kernel.hpp"
#include "softalign/matrix.hpp"

namespace softalign {

// One joint duration assignment and its probability prod_i l(i, d_i).
struct JointOutcome {
  std::vector<int> durations;
  double probability = 0.0;
};

// Largest admissible (M+1)^N; larger instances are refused.
inline constexpr std::int64_t kMaxOutcomes = 10000000;

// Number of outcomes, or a throw if it exceeds kMaxOutcomes.
std::int64_t outcome_count(const LengthProbability& length);

// Visits every joint assignment exactly once.
void for_each_outcome(const LengthProbability& length,
                      const std::function<void(const JointOutcome&)>& visit);

// Materialized enumeration; prefer for_each_outcome for large instances.
std::vector<JointOutcome> enumerate_outcomes(const LengthProbability& length);

// q(i, j) = P(w_1 + ... + w_{i+1} = j) summed over outcomes, with the
// overflow column holding P(total > T). Same layout as cumulative_duration.
Matrix oracle_cumulative(const LengthProbability& length, int num_frames);

// s(i, j) = total probability of outcomes in which frame j + 1 falls inside
// token i + 1's block. Same layout as attention_probability.
Matrix oracle_attention(const LengthProbability& length, int num_frames);

// E[w_i] summed over outcomes.
std::vector<double> oracle_expected_durations(const LengthProbability& length);

// coverage[j - 1] = P(w_1 + ... + w_N >= j) for j = 1..T; the attention
// column sums must match this.
std::vector<double> oracle_coverage(const LengthProbability& length,
                                    int num_frames);

// Result of comparing the duration kernel against the oracle on a batch of
// random instances.
struct OracleSuiteResult {
  bool pass = false;
  int instances = 0;
  double max_abs_error = 0.0;
  int worst_instance = -1;
  std::string worst_quantity;  // "l", "q", "s", "expected" or "coverage"
};

// Draws `n_instances` random instances (tokens <= max_tokens, per-token max
// duration <= max_duration, frames <= max_frames, logits ~ Normal(0, 2^2))
// and checks l, q, s, E[w] and the coverage identity against the oracle.
// Deterministic for a given seed regardless of `jobs`.
OracleSuiteResult run_oracle_suite(int n_instances, int max_tokens,
                                   int max_duration, int max_frames,
                                   std::uint64_t seed, int jobs = 1,
                                   double tolerance = 1e-9);

}  // namespace softalign

#endif  // SOFTALIGN_ORACLE_HPP_
