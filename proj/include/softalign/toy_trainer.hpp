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
// Desk-scale demonstration that gradient descent on the soft alignment
// recovers hard monotonic alignments. A synthetic task fixes token
// embeddings and ground-truth integer durations; the trainer fits duration
// logits so that the expected upsampled sequence matches the expanded
// target. The adversarial and spectral terms of the full system are
// replaced by a plain L2 reconstruction, which is enough to exercise the
// duration mechanism end to end.

#ifndef SOFTALIGN_TOY_TRAINER_HPP_
#define SOFTALIGN_TOY_TRAINER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "softalign/losses.hpp"
#include "softalign/matrix.hpp"
#include "softalign/regulator.hpp"

namespace softalign {

struct SyntheticTask {
  Matrix hidden;                  // N x D token embeddings
  DurationVector true_durations;  // N, entries in [1, max_duration]
  Matrix target;                  // (sum of durations) x D
  int max_duration = 0;

  int tokens() const { return hidden.rows(); }
  int num_frames() const { return target.rows(); }
};

enum class Optimizer { kAdam, kGradientDescent };

// "adam" or "gd"; throws std::invalid_argument otherwise.
Optimizer optimizer_from_string(const std::string& name);
std::string optimizer_to_string(Optimizer optimizer);

struct TrainConfig {
  int steps = 2000;
  double learning_rate = 2e-2;
  Optimizer optimizer = Optimizer::kAdam;
  double adam_beta1 = 0.8;
  double adam_beta2 = 0.99;
  double adam_epsilon = 1e-8;
  // Pre-sigmoid noise std decays linearly from noise_std_init to zero over
  // the first noise_decay_fraction of the steps, then stays zero.
  double noise_std_init = 1.0;
  double noise_decay_fraction = 0.8;
  LossWeights weights;
  std::uint64_t seed = 0;
};

struct TrainReport {
  // One entry per executed step, recorded at the parameters seen by that
  // step's update (before applying it). Shorter than config.steps only
  // after a divergence stop.
  std::vector<double> total_loss;
  std::vector<double> recon_loss;
  std::vector<double> length_loss;
  std::vector<double> noise_std;
  std::vector<double> discreteness;  // measured without noise

  int steps_run = 0;
  bool diverged = false;

  // Final state, evaluated without noise (equals the initial state when
  // steps = 0).
  Matrix final_logits;
  std::vector<double> final_expected_durations;
  double final_total_loss = 0.0;
  double final_recon_loss = 0.0;
  double final_length_loss = 0.0;
  double duration_mae = 0.0;
  double discreteness_final = 0.0;
  double hard_match_rate = 0.0;
  double wall_time_seconds = 0.0;
};

struct AlignmentEval {
  double duration_mae = 0.0;
  double discreteness = 0.0;
  double hard_match_rate = 0.0;
};

// Reproducible task: durations uniform over [1, max_duration], embeddings
// standard normal, target = expand(hidden, durations) with optional
// additive Gaussian noise of std target_noise_std.
SyntheticTask make_task(int n_tokens, int max_duration, int embed_dim,
                        std::uint64_t seed, double target_noise_std = 0.0);

// Fits duration logits (zero-initialized) by first-order steps on
// lambda_length * length_loss + sum((expected_upsample - target)^2).
// Deterministic for a given config.seed. A non-finite loss stops training
// early with report.diverged set.
TrainReport train(const SyntheticTask& task, const TrainConfig& config);

// Duration MAE and exact-match rate of discretize(expected durations)
// against the task's ground truth, plus the discreteness statistic
// mean_i(1 - max_m l(i, m)); all evaluated without noise.
AlignmentEval evaluate_alignment(const Matrix& logits,
                                 const SyntheticTask& task);

}  // namespace softalign

#endif  // SOFTALIGN_TOY_TRAINER_HPP_
