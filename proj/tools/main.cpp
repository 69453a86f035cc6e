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
// softalign command-line tool. Subcommands: align, sample, oracle-check,
// gradcheck, train-toy. All randomness flows from --seed (default 0,
// overridable via the SOFTALIGN_SEED environment variable).

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "softalign/cli_commands.hpp"

namespace {

// SOFTALIGN_SEED supplies the default for every --seed flag; an explicit
// flag still wins. A malformed value is an input error.
std::uint64_t seed_from_env() {
  const char* raw = std::getenv("SOFTALIGN_SEED");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  errno = 0;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (errno != 0 || end == raw || *end != '\0' || std::strchr(raw, '-')) {
    throw std::invalid_argument(
        std::string("SOFTALIGN_SEED is not a non-negative integer: ") + raw);
  }
  return static_cast<std::uint64_t>(value);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace softalign;

  CLI::App app{"stochastic duration model: soft monotonic alignment kernels"};
  app.require_subcommand(1);

  int exit_code = kExitSuccess;
  std::uint64_t default_seed = 0;
  try {
    default_seed = seed_from_env();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  }

  AlignCmdOptions align_opts;
  align_opts.seed = default_seed;
  CLI::App* align_cmd = app.add_subcommand(
      "align", "soft alignment and expected upsampling from duration logits");
  align_cmd->add_option("--logits", align_opts.logits_path,
                        "CSV of duration logits, tokens x max duration")
      ->required();
  align_cmd->add_option("--hidden", align_opts.hidden_path,
                        "CSV of hidden states, tokens x embed dim")
      ->required();
  align_cmd->add_option("--frames", align_opts.num_frames,
                        "number of output frames T")
      ->required();
  align_cmd->add_option("--noise-std", align_opts.noise_std,
                        "pre-sigmoid Gaussian noise std (default 0)");
  align_cmd->add_option("--seed", align_opts.seed, "RNG seed");
  align_cmd->add_option("--out-dir", align_opts.out_dir, "output directory")
      ->required();
  align_cmd->callback([&]() { exit_code = run_align(align_opts); });

  SampleCmdOptions sample_opts;
  sample_opts.seed = default_seed;
  CLI::App* sample_cmd = app.add_subcommand(
      "sample", "draw integer durations from the logits' distribution");
  sample_cmd->add_option("--logits", sample_opts.logits_path,
                         "CSV of duration logits")
      ->required();
  sample_cmd->add_option("--n-samples", sample_opts.n_samples,
                         "number of samples to draw")
      ->required();
  sample_cmd->add_option("--seed", sample_opts.seed, "RNG seed");
  sample_cmd->add_option("--out-dir", sample_opts.out_dir, "output directory")
      ->required();
  sample_cmd->callback([&]() { exit_code = run_sample(sample_opts); });

  OracleCmdOptions oracle_opts;
  oracle_opts.seed = default_seed;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check",
      "compare closed-form probabilities against brute-force enumeration");
  oracle_cmd->add_option("--n-instances", oracle_opts.n_instances,
                         "random instances to check (default 200)");
  oracle_cmd->add_option("--max-n", oracle_opts.max_tokens,
                         "max token count (default 4)");
  oracle_cmd->add_option("--max-m", oracle_opts.max_duration,
                         "max duration bound (default 5)");
  oracle_cmd->add_option("--max-t", oracle_opts.max_frames,
                         "max frame count (default 12)");
  oracle_cmd->add_option("--tolerance", oracle_opts.tolerance,
                         "max abs error allowed (default 1e-9)");
  oracle_cmd->add_option("--seed", oracle_opts.seed, "RNG seed");
  oracle_cmd->add_option("--jobs", oracle_opts.jobs,
                         "worker threads (results are order-deterministic)");
  oracle_cmd->callback([&]() { exit_code = run_oracle_check(oracle_opts); });

  GradcheckCmdOptions grad_opts;
  grad_opts.seed = default_seed;
  CLI::App* grad_cmd = app.add_subcommand(
      "gradcheck",
      "verify analytic gradients against central finite differences");
  grad_cmd->add_option("--n-instances", grad_opts.n_instances,
                       "random instances to check (default 100)");
  grad_cmd->add_option("--eps", grad_opts.epsilon,
                       "finite-difference step (default 1e-5)");
  grad_cmd->add_option("--tolerance", grad_opts.tolerance,
                       "max relative error allowed (default 1e-5)");
  grad_cmd->add_option("--seed", grad_opts.seed, "RNG seed");
  grad_cmd->add_option("--jobs", grad_opts.jobs,
                       "worker threads (results are order-deterministic)");
  grad_cmd->callback([&]() { exit_code = run_gradcheck(grad_opts); });

  TrainToyCmdOptions train_opts;
  CLI::App* train_cmd = app.add_subcommand(
      "train-toy",
      "fit duration logits on a synthetic alignment task");
  train_cmd->add_option("--config", train_opts.config_path,
                        "JSON config file")
      ->required();
  train_cmd->add_option("--out-dir", train_opts.out_dir, "output directory")
      ->required();
  train_cmd->callback([&]() { exit_code = run_train_toy(train_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  }
  return exit_code;
}
