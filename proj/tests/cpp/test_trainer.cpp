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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "softalign/matrix.hpp"
#include "softalign/regulator.hpp"

using namespace softalign;

namespace {

double window_mean(const std::vector<double>& series, std::size_t begin,
                   std::size_t end) {
  double acc = 0.0;
  for (std::size_t k = begin; k < end; ++k) acc += series[k];
  return acc / static_cast<double>(end - begin);
}

}  // namespace

TEST_CASE("tasks are reproducible and respect requested shapes") {
  const SyntheticTask a = make_task(5, 4, 3, 321);
  const SyntheticTask b = make_task(5, 4, 3, 321);
  CHECK(a.hidden == b.hidden);
  CHECK(a.true_durations == b.true_durations);
  CHECK(a.target == b.target);

  const SyntheticTask c = make_task(5, 4, 3, 322);
  const bool differs =
      !(a.true_durations == c.true_durations) || !(a.hidden == c.hidden);
  CHECK(differs);

  CHECK(a.hidden.rows() == 5);
  CHECK(a.hidden.cols() == 3);
  CHECK(a.max_duration == 4);
  int total = 0;
  for (int d : a.true_durations) {
    CHECK(d >= 1);
    CHECK(d <= 4);
    total += d;
  }
  CHECK(a.target.rows() == total);
  CHECK(a.target.cols() == 3);
}

TEST_CASE("single-token task target is the repeated embedding") {
  const SyntheticTask task = make_task(1, 5, 2, 17);
  REQUIRE(task.target.rows() == task.true_durations[0]);
  for (int j = 0; j < task.target.rows(); ++j) {
    CHECK(task.target(j, 0) == task.hidden(0, 0));
    CHECK(task.target(j, 1) == task.hidden(0, 1));
  }
}

TEST_CASE("zero training steps reports the initial state") {
  const SyntheticTask task = make_task(3, 3, 2, 5);
  TrainConfig config;
  config.steps = 0;
  const TrainReport report = train(task, config);
  CHECK(report.steps_run == 0);
  CHECK(report.total_loss.empty());
  CHECK_FALSE(report.diverged);
  // Zero logits cannot already match an expanded target of nonzero rows.
  CHECK(report.final_total_loss > 0.0);
  CHECK(report.final_logits == Matrix(3, 3, 0.0));
}

TEST_CASE("single-token convex case converges quickly") {
  SyntheticTask task;
  task.hidden = Matrix::from_rows({{1.0}});
  task.true_durations = {2};
  task.max_duration = 3;
  task.target = expand(task.hidden, task.true_durations);

  TrainConfig config;
  config.steps = 500;
  config.noise_std_init = 0.0;
  config.seed = 3;
  const TrainReport report = train(task, config);
  REQUIRE(report.final_expected_durations.size() == 1);
  CHECK(report.final_expected_durations[0] >= 1.9);
  CHECK(report.final_expected_durations[0] <= 2.1);
  CHECK(report.duration_mae == 0.0);
  CHECK(report.hard_match_rate == 1.0);
}

TEST_CASE("noiseless convex training loss is non-increasing by window") {
  SyntheticTask task;
  task.hidden = Matrix::from_rows({{1.0, -0.5}});
  task.true_durations = {3};
  task.max_duration = 4;
  task.target = expand(task.hidden, task.true_durations);

  TrainConfig config;
  config.steps = 400;
  config.noise_std_init = 0.0;
  config.seed = 11;
  const TrainReport report = train(task, config);
  REQUIRE(report.steps_run == 400);
  for (std::size_t begin = 50; begin + 50 <= report.total_loss.size();
       begin += 50) {
    const double prev = window_mean(report.total_loss, begin - 50, begin);
    const double cur = window_mean(report.total_loss, begin, begin + 50);
    CHECK(cur <= prev + 1e-9);
  }
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  const SyntheticTask task = make_task(4, 4, 2, 8);
  TrainConfig config;
  config.steps = 120;
  config.seed = 21;
  const TrainReport a = train(task, config);
  const TrainReport b = train(task, config);
  CHECK(a.final_logits == b.final_logits);
  CHECK(a.total_loss == b.total_loss);
  CHECK(a.final_total_loss == b.final_total_loss);

  TrainConfig other = config;
  other.seed = 22;
  const TrainReport c = train(task, other);
  CHECK_FALSE(a.final_logits == c.final_logits);
}

TEST_CASE("discreteness decreases through the noise schedule") {
  const SyntheticTask task = make_task(6, 6, 4, 2);
  TrainConfig config;
  config.steps = 1500;
  config.seed = 2;
  const TrainReport report = train(task, config);
  REQUIRE(report.steps_run == config.steps);

  // Trailing-window averages of the noiseless discreteness statistic.
  const std::size_t window = 150;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t begin = 0; begin + window <= report.discreteness.size();
       begin += window) {
    const double cur = window_mean(report.discreteness, begin, begin + window);
    CHECK(cur <= prev + 0.01);
    prev = cur;
  }
  CHECK(report.discreteness.front() > report.discreteness.back());
}

TEST_CASE("non-finite targets stop training with a flag") {
  SyntheticTask task = make_task(2, 3, 2, 4);
  task.target(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig config;
  config.steps = 50;
  const TrainReport report = train(task, config);
  CHECK(report.diverged);
  CHECK(report.steps_run == 1);
  CHECK(report.total_loss.size() == 1);
}

TEST_CASE("gradient descent optimizer also trains the convex case") {
  SyntheticTask task;
  task.hidden = Matrix::from_rows({{2.0}});
  task.true_durations = {1};
  task.max_duration = 2;
  task.target = expand(task.hidden, task.true_durations);

  TrainConfig config;
  config.steps = 800;
  config.optimizer = Optimizer::kGradientDescent;
  config.learning_rate = 5e-3;
  config.noise_std_init = 0.0;
  const TrainReport report = train(task, config);
  CHECK(report.duration_mae == 0.0);
}

TEST_CASE("optimizer names round-trip") {
  CHECK(optimizer_from_string("adam") == Optimizer::kAdam);
  CHECK(optimizer_from_string("gd") == Optimizer::kGradientDescent);
  CHECK(optimizer_to_string(Optimizer::kAdam) == "adam");
  CHECK(optimizer_to_string(Optimizer::kGradientDescent) == "gd");
  CHECK_THROWS_AS(optimizer_from_string("sgd"), std::invalid_argument);
}

TEST_CASE("alignment evaluation on pinned and uniform logits") {
  SyntheticTask task;
  task.hidden = Matrix::from_rows({{1.0}, {2.0}});
  task.true_durations = {2, 1};
  task.max_duration = 3;
  task.target = expand(task.hidden, task.true_durations);

  // Logits pinned to the true durations: success spike at the right trial.
  Matrix sharp(2, 3, -40.0);
  sharp(0, 1) = 40.0;
  sharp(1, 0) = 40.0;
  const AlignmentEval perfect = evaluate_alignment(sharp, task);
  CHECK(perfect.duration_mae == 0.0);
  CHECK(perfect.hard_match_rate == 1.0);
  CHECK(perfect.discreteness <= 1e-4);

  // All-zero logits mean p = 0.5 everywhere: E[w] = 2 - 5/8 = 1.375 for
  // M = 3, discretized to 1 frame for every token.
  const AlignmentEval uniform = evaluate_alignment(Matrix(2, 3, 0.0), task);
  CHECK(uniform.duration_mae == doctest::Approx(0.5));
  CHECK(uniform.hard_match_rate == doctest::Approx(0.5));
  CHECK(uniform.discreteness > 0.4);

  CHECK_THROWS_AS(evaluate_alignment(Matrix(1, 3, 0.0), task),
                  std::invalid_argument);
}

TEST_CASE("invalid configs are rejected") {
  const SyntheticTask task = make_task(2, 2, 1, 1);
  TrainConfig config;
  config.learning_rate = 0.0;
  CHECK_THROWS_AS(train(task, config), std::invalid_argument);
  config = TrainConfig{};
  config.noise_decay_fraction = 1.5;
  CHECK_THROWS_AS(train(task, config), std::invalid_argument);
  config = TrainConfig{};
  config.noise_std_init = -1.0;
  CHECK_THROWS_AS(train(task, config), std::invalid_argument);
  CHECK_THROWS_AS(make_task(0, 2, 1, 1), std::invalid_argument);
}
