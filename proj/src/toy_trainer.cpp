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

#include "softalign/toy_trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "softalign/duration_kernel.hpp"
#include "softalign/grad_engine.hpp"

namespace softalign {

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "gd") return Optimizer::kGradientDescent;
  throw std::invalid_argument("unknown optimizer: " + name);
}

std::string optimizer_to_string(Optimizer optimizer) {
  return optimizer == Optimizer::kAdam ? "adam" : "gd";
}

namespace {

// Mean over tokens of 1 - max_m l(i, m), from a noiseless forward pass.
double noiseless_discreteness(const Matrix& logits) {
  Rng unused(0);
  const DurationParams params = apply_noisy_sigmoid(logits, 0.0, unused);
  const LengthProbability length = length_probability(params);
  double acc = 0.0;
  for (int i = 0; i < length.tokens(); ++i) {
    double best = 0.0;
    for (int m = 0; m <= length.max_duration(); ++m) {
      best = std::max(best, length.l(i, m));
    }
    acc += 1.0 - best;
  }
  return acc / static_cast<double>(length.tokens());
}

double sum_squared_diff(const Matrix& a, const Matrix& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a.data()[k] - b.data()[k];
    acc += d * d;
  }
  return acc;
}

void validate(const SyntheticTask& task, const TrainConfig& config) {
  if (task.tokens() < 1 || task.max_duration < 1) {
    throw std::invalid_argument("train: empty task");
  }
  if (task.num_frames() < 1) {
    throw std::invalid_argument("train: task has no target frames");
  }
  if (config.steps < 0) {
    throw std::invalid_argument("train: steps must be >= 0");
  }
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("train: learning rate must be > 0");
  }
  if (config.noise_std_init < 0.0) {
    throw std::invalid_argument("train: noise std must be >= 0");
  }
  if (config.noise_decay_fraction < 0.0 || config.noise_decay_fraction > 1.0) {
    throw std::invalid_argument("train: noise decay fraction outside [0, 1]");
  }
}

}  // namespace

SyntheticTask make_task(int n_tokens, int max_duration, int embed_dim,
                        std::uint64_t seed, double target_noise_std) {
  if (n_tokens < 1 || max_duration < 1 || embed_dim < 1) {
    throw std::invalid_argument("make_task: dimensions must be >= 1");
  }
  if (target_noise_std < 0.0) {
    throw std::invalid_argument("make_task: negative target noise");
  }
  Rng rng(seed);
  SyntheticTask task;
  task.max_duration = max_duration;
  task.true_durations.resize(n_tokens);
  for (int i = 0; i < n_tokens; ++i) {
    task.true_durations[i] = rng.uniform_int(1, max_duration);
  }
  task.hidden = Matrix(n_tokens, embed_dim);
  for (double& v : task.hidden.data()) v = rng.normal();
  task.target = expand(task.hidden, task.true_durations);
  if (target_noise_std > 0.0) {
    for (double& v : task.target.data()) v += target_noise_std * rng.normal();
  }
  return task;
}

TrainReport train(const SyntheticTask& task, const TrainConfig& config) {
  validate(task, config);
  const auto start_time = std::chrono::steady_clock::now();

  const int n = task.tokens();
  const int max_dur = task.max_duration;
  const int t_frames = task.num_frames();
  const double lambda_len = config.weights.lambda_length;

  Rng rng(config.seed);
  Matrix logits(n, max_dur, 0.0);
  Matrix adam_m(n, max_dur, 0.0);
  Matrix adam_v(n, max_dur, 0.0);

  TrainReport report;
  report.total_loss.reserve(config.steps);
  report.recon_loss.reserve(config.steps);
  report.length_loss.reserve(config.steps);
  report.noise_std.reserve(config.steps);
  report.discreteness.reserve(config.steps);

  const double decay_steps = config.noise_decay_fraction * config.steps;
  for (int step = 0; step < config.steps; ++step) {
    double noise = 0.0;
    if (config.noise_std_init > 0.0 && decay_steps > 0.0) {
      noise = config.noise_std_init *
              std::max(0.0, 1.0 - static_cast<double>(step) / decay_steps);
    }

    const AlignResult tape = align(logits, task.hidden, t_frames, noise, rng);
    const double recon = sum_squared_diff(tape.expanded, task.target);
    const double len = length_loss(tape.expected_durations, t_frames);
    const double total = lambda_len * len + recon;

    report.total_loss.push_back(total);
    report.recon_loss.push_back(recon);
    report.length_loss.push_back(len);
    report.noise_std.push_back(noise);
    report.discreteness.push_back(noiseless_discreteness(logits));
    report.steps_run = step + 1;

    if (!std::isfinite(total)) {
      report.diverged = true;
      break;
    }

    Matrix upstream_y = tape.expanded;
    for (std::size_t k = 0; k < upstream_y.size(); ++k) {
      upstream_y.data()[k] =
          2.0 * (upstream_y.data()[k] - task.target.data()[k]);
    }
    std::vector<double> upstream_expected =
        length_loss_grad(tape.expected_durations, t_frames);
    for (double& g : upstream_expected) g *= lambda_len;
    const AlignGradients grads =
        backward_align(tape, upstream_y, upstream_expected);

    if (config.optimizer == Optimizer::kGradientDescent) {
      for (std::size_t k = 0; k < logits.size(); ++k) {
        logits.data()[k] -=
            config.learning_rate * grads.logits_grad.data()[k];
      }
    } else {
      const double b1 = config.adam_beta1;
      const double b2 = config.adam_beta2;
      const double bias1 = 1.0 - std::pow(b1, step + 1);
      const double bias2 = 1.0 - std::pow(b2, step + 1);
      for (std::size_t k = 0; k < logits.size(); ++k) {
        const double g = grads.logits_grad.data()[k];
        adam_m.data()[k] = b1 * adam_m.data()[k] + (1.0 - b1) * g;
        adam_v.data()[k] = b2 * adam_v.data()[k] + (1.0 - b2) * g * g;
        const double m_hat = adam_m.data()[k] / bias1;
        const double v_hat = adam_v.data()[k] / bias2;
        logits.data()[k] -= config.learning_rate * m_hat /
                            (std::sqrt(v_hat) + config.adam_epsilon);
      }
    }
  }

  Rng unused(0);
  const AlignResult final_tape =
      align(logits, task.hidden, t_frames, 0.0, unused);
  report.final_logits = logits;
  report.final_expected_durations = final_tape.expected_durations;
  report.final_recon_loss = sum_squared_diff(final_tape.expanded, task.target);
  report.final_length_loss =
      length_loss(final_tape.expected_durations, t_frames);
  report.final_total_loss =
      lambda_len * report.final_length_loss + report.final_recon_loss;

  const AlignmentEval eval = evaluate_alignment(logits, task);
  report.duration_mae = eval.duration_mae;
  report.discreteness_final = eval.discreteness;
  report.hard_match_rate = eval.hard_match_rate;

  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    start_time)
          .count();
  return report;
}

AlignmentEval evaluate_alignment(const Matrix& logits,
                                 const SyntheticTask& task) {
  if (logits.rows() != task.tokens() || logits.cols() != task.max_duration) {
    throw std::invalid_argument("evaluate_alignment: logits shape mismatch");
  }
  Rng unused(0);
  const DurationParams params = apply_noisy_sigmoid(logits, 0.0, unused);
  const LengthProbability length = length_probability(params);
  const std::vector<double> expected = expected_durations(length);
  const DurationVector rounded =
      discretize_durations(expected, task.max_duration);

  AlignmentEval eval;
  const int n = task.tokens();
  int matches = 0;
  double abs_err = 0.0;
  for (int i = 0; i < n; ++i) {
    abs_err += std::abs(rounded[i] - task.true_durations[i]);
    if (rounded[i] == task.true_durations[i]) ++matches;
  }
  eval.duration_mae = abs_err / static_cast<double>(n);
  eval.hard_match_rate = static_cast<double>(matches) / static_cast<double>(n);
  eval.discreteness = noiseless_discreteness(logits);
  return eval;
}

}  // namespace softalign
