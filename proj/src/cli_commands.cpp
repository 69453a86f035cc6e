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

#include "softalign/cli_commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "softalign/duration_kernel.hpp"
#include "softalign/grad_engine.hpp"
#include "softalign/io.hpp"
#include "softalign/oracle.hpp"
#include "softalign/regulator.hpp"
#include "softalign/toy_trainer.hpp"

namespace softalign {

namespace {

std::filesystem::path prepare_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) {
    throw std::invalid_argument("output directory not given");
  }
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory: " + out_dir +
                             ": " + ec.message());
  }
  return dir;
}

Matrix column_vector(const std::vector<double>& values) {
  Matrix m(static_cast<int>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<int>(i), 0) = values[i];
  return m;
}

}  // namespace

int run_align(const AlignCmdOptions& options) {
  if (options.num_frames < 1) {
    throw std::invalid_argument("--frames must be >= 1");
  }
  if (options.noise_std < 0.0) {
    throw std::invalid_argument("--noise-std must be >= 0");
  }
  const Matrix logits = read_csv(options.logits_path);
  const Matrix hidden = read_csv(options.hidden_path);
  if (logits.rows() != hidden.rows()) {
    throw std::invalid_argument("logits and hidden token counts differ");
  }
  if (logits.rows() < 1 || logits.cols() < 1) {
    throw std::invalid_argument("logits matrix is empty");
  }
  const auto dir = prepare_out_dir(options.out_dir);

  Rng rng(options.seed);
  const AlignResult result =
      align(logits, hidden, options.num_frames, options.noise_std, rng);

  write_csv((dir / "l.csv").string(), result.length.l);
  write_csv((dir / "q.csv").string(), result.cumulative.q);
  write_csv((dir / "s.csv").string(), result.attention.s);
  write_csv((dir / "expanded.csv").string(), result.expanded);
  write_csv((dir / "expected_durations.csv").string(),
            column_vector(result.expected_durations));
  write_pgm((dir / "s.pgm").string(), result.attention.s);

  std::printf("align: %d tokens, max duration %d, %d frames -> %s\n",
              result.params.tokens(), result.params.max_duration(),
              options.num_frames, options.out_dir.c_str());
  std::printf("wrote l.csv q.csv s.csv expanded.csv expected_durations.csv s.pgm\n");
  return kExitSuccess;
}

int run_sample(const SampleCmdOptions& options) {
  if (options.n_samples < 1) {
    throw std::invalid_argument("--n-samples must be >= 1");
  }
  const Matrix logits = read_csv(options.logits_path);
  if (logits.rows() < 1 || logits.cols() < 1) {
    throw std::invalid_argument("logits matrix is empty");
  }
  const auto dir = prepare_out_dir(options.out_dir);

  Rng rng(options.seed);
  const DurationParams params = apply_noisy_sigmoid(logits, 0.0, rng);
  const int n = params.tokens();
  const int max_dur = params.max_duration();

  Matrix samples(options.n_samples, n);
  Matrix histogram(n, max_dur + 1, 0.0);
  for (int k = 0; k < options.n_samples; ++k) {
    const DurationVector d = sample_durations(params, rng);
    for (int i = 0; i < n; ++i) {
      samples(k, i) = static_cast<double>(d[i]);
      histogram(i, d[i]) += 1.0;
    }
  }
  for (double& v : histogram.data()) {
    v /= static_cast<double>(options.n_samples);
  }

  write_csv((dir / "durations.csv").string(), samples);
  write_csv((dir / "histogram.csv").string(), histogram);
  std::printf("sample: %d draws over %d tokens -> %s\n", options.n_samples, n,
              options.out_dir.c_str());
  std::printf("wrote durations.csv histogram.csv\n");
  return kExitSuccess;
}

int run_oracle_check(const OracleCmdOptions& options) {
  if (options.n_instances < 1) {
    throw std::invalid_argument("--n-instances must be >= 1");
  }
  if (options.max_tokens < 1 || options.max_duration < 1 ||
      options.max_frames < 1) {
    throw std::invalid_argument("instance bounds must be >= 1");
  }
  if (options.jobs < 1) {
    throw std::invalid_argument("--jobs must be >= 1");
  }
  const OracleSuiteResult result = run_oracle_suite(
      options.n_instances, options.max_tokens, options.max_duration,
      options.max_frames, options.seed, options.jobs, options.tolerance);
  std::printf("oracle-check: %d instances (N<=%d, M<=%d, T<=%d), seed %llu\n",
              result.instances, options.max_tokens, options.max_duration,
              options.max_frames,
              static_cast<unsigned long long>(options.seed));
  std::printf("max abs error %.3e (tolerance %.1e)\n", result.max_abs_error,
              options.tolerance);
  if (!result.pass) {
    std::printf("worst instance %d, quantity %s\n", result.worst_instance,
                result.worst_quantity.c_str());
  }
  std::printf("%s\n", result.pass ? "PASS" : "FAIL");
  return result.pass ? kExitSuccess : kExitCheckFailure;
}

int run_gradcheck(const GradcheckCmdOptions& options) {
  if (options.n_instances < 1) {
    throw std::invalid_argument("--n-instances must be >= 1");
  }
  if (!(options.epsilon > 0.0)) {
    throw std::invalid_argument("--eps must be > 0");
  }
  if (options.jobs < 1) {
    throw std::invalid_argument("--jobs must be >= 1");
  }
  const GradCheckSuiteResult result =
      run_gradcheck_suite(options.n_instances, options.epsilon, options.seed,
                          options.jobs, options.tolerance);
  std::printf("gradcheck: %d instances, eps %.1e, seed %llu\n",
              result.instances, options.epsilon,
              static_cast<unsigned long long>(options.seed));
  std::printf("max rel error %.3e (tolerance %.1e), max abs error %.3e\n",
              result.max_rel_error, options.tolerance, result.max_abs_error);
  if (result.worst_instance >= 0 && !result.worst_check.empty()) {
    std::printf(
        "worst: instance %d, check %s, coordinate %d (analytic %.9e, "
        "numeric %.9e)\n",
        result.worst_instance, result.worst_check.c_str(),
        result.worst_report.worst_index, result.worst_report.worst_analytic,
        result.worst_report.worst_numeric);
  }
  std::printf("%s\n", result.pass ? "PASS" : "FAIL");
  return result.pass ? kExitSuccess : kExitCheckFailure;
}

int run_train_toy(const TrainToyCmdOptions& options) {
  const Config config = load_config(options.config_path);
  const auto dir = prepare_out_dir(options.out_dir);

  const SyntheticTask task =
      make_task(config.trainer.n_tokens, config.kernel.max_duration,
                config.trainer.embed_dim, config.trainer.task_seed);
  const TrainReport report = train(task, config.trainer.train);

  // losses.csv: one row per executed step.
  Matrix series(report.steps_run, 6);
  for (int k = 0; k < report.steps_run; ++k) {
    series(k, 0) = static_cast<double>(k);
    series(k, 1) = report.total_loss[k];
    series(k, 2) = report.recon_loss[k];
    series(k, 3) = report.length_loss[k];
    series(k, 4) = report.noise_std[k];
    series(k, 5) = report.discreteness[k];
  }
  write_csv((dir / "losses.csv").string(), series);

  Rng unused(0);
  const AlignResult final_state =
      align(report.final_logits, task.hidden, task.num_frames(), 0.0, unused);
  write_pgm((dir / "s.pgm").string(), final_state.attention.s);

  nlohmann::json j;
  j["config"] = nlohmann::json::parse(serialize_config(config));
  j["steps_run"] = report.steps_run;
  j["diverged"] = report.diverged;
  j["final_total_loss"] = report.final_total_loss;
  j["final_recon_loss"] = report.final_recon_loss;
  j["final_length_loss"] = report.final_length_loss;
  j["final_expected_durations"] = report.final_expected_durations;
  j["true_durations"] = task.true_durations;
  j["duration_mae"] = report.duration_mae;
  j["discreteness"] = report.discreteness_final;
  j["hard_match_rate"] = report.hard_match_rate;
  // Wall time goes to stdout only; the report file must be byte-identical
  // across runs with the same config.
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot open for writing: " +
                               (dir / "report.json").string());
    }
    out << j.dump(2) << "\n";
  }

  std::printf(
      "train-toy: %d steps in %.2f s, final loss %.6f, duration MAE %.3f, "
      "match rate %.2f, discreteness %.4f\n",
      report.steps_run, report.wall_time_seconds, report.final_total_loss,
      report.duration_mae, report.hard_match_rate, report.discreteness_final);
  std::printf("wrote report.json losses.csv s.pgm\n");
  if (report.diverged) {
    std::printf("training diverged (non-finite loss); stopped early\n");
    return kExitCheckFailure;
  }
  return kExitSuccess;
}

}  // namespace softalign
