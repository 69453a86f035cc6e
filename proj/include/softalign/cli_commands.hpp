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
// Command implementations behind the CLI entry point. Each run_* function
// returns the process exit code: 0 success, 1 check failure. Input errors
// (bad files, bad arguments) are thrown and mapped to exit code 2 by the
// caller.

#ifndef SOFTALIGN_CLI_COMMANDS_HPP_
#define SOFTALIGN_CLI_COMMANDS_HPP_

#include <cstdint>
#include <string>

namespace softalign {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitInputError = 2;

struct AlignCmdOptions {
  std::string logits_path;
  std::string hidden_path;
  std::string out_dir;
  int num_frames = 0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

// Writes l.csv, q.csv, s.csv, expanded.csv, expected_durations.csv and the
// s.pgm heatmap into out_dir.
int run_align(const AlignCmdOptions& options);

struct SampleCmdOptions {
  std::string logits_path;
  std::string out_dir;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

// Writes durations.csv (one sample per row) and histogram.csv (empirical
// duration frequencies per token, same shape as the length probability
// matrix) into out_dir.
int run_sample(const SampleCmdOptions& options);

struct OracleCmdOptions {
  int n_instances = 200;
  int max_tokens = 4;
  int max_duration = 5;
  int max_frames = 12;
  std::uint64_t seed = 0;
  int jobs = 1;
  double tolerance = 1e-9;
};

// Compares the closed-form kernel against brute-force enumeration; prints a
// report and returns 1 when any instance exceeds the tolerance.
int run_oracle_check(const OracleCmdOptions& options);

struct GradcheckCmdOptions {
  int n_instances = 100;
  double epsilon = 1e-5;
  double tolerance = 1e-5;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Verifies analytic gradients against central finite differences; prints a
// report including the worst coordinate and returns 1 on failure.
int run_gradcheck(const GradcheckCmdOptions& options);

struct TrainToyCmdOptions {
  std::string config_path;
  std::string out_dir;
};

// Runs the toy trainer per the JSON config; writes report.json, losses.csv
// and the final soft attention as s.pgm into out_dir. Returns 1 when
// training diverged.
int run_train_toy(const TrainToyCmdOptions& options);

}  // namespace softalign

#endif  // SOFTALIGN_CLI_COMMANDS_HPP_
