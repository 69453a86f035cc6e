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

#include "softalign/oracle.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace softalign {

std::int64_t outcome_count(const LengthProbability& length) {
  const int n = length.tokens();
  const int base = length.max_duration() + 1;
  std::int64_t count = 1;
  for (int i = 0; i < n; ++i) {
    count *= base;
    if (count > kMaxOutcomes) {
      throw std::invalid_argument(
          "oracle: instance too large, (M+1)^N exceeds the enumeration bound "
          "of 10^7 outcomes");
    }
  }
  return count;
}

void for_each_outcome(const LengthProbability& length,
                      const std::function<void(const JointOutcome&)>& visit) {
  outcome_count(length);  // size guard
  const int n = length.tokens();
  const int max_dur = length.max_duration();

  JointOutcome outcome;
  outcome.durations.assign(n, 0);
  // Odometer over {0..M}^N; prefix probabilities avoid recomputing the
  // whole product per outcome.
  std::vector<double> prefix(n + 1, 1.0);
  int level = 0;
  while (true) {
    if (level == n) {
      outcome.probability = prefix[n];
      visit(outcome);
      --level;
      while (level >= 0 && outcome.durations[level] == max_dur) {
        outcome.durations[level] = 0;
        --level;
      }
      if (level < 0) break;
      ++outcome.durations[level];
    }
    prefix[level + 1] = prefix[level] * length.l(level, outcome.durations[level]);
    ++level;
  }
}

std::vector<JointOutcome> enumerate_outcomes(const LengthProbability& length) {
  std::vector<JointOutcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(outcome_count(length)));
  for_each_outcome(length, [&outcomes](const JointOutcome& o) {
    outcomes.push_back(o);
  });
  return outcomes;
}

Matrix oracle_cumulative(const LengthProbability& length, int num_frames) {
  if (num_frames < 1) {
    throw std::invalid_argument("oracle_cumulative: num_frames must be >= 1");
  }
  const int n = length.tokens();
  Matrix q(n, num_frames + 2, 0.0);
  for_each_outcome(length, [&](const JointOutcome& o) {
    int total = 0;
    for (int i = 0; i < n; ++i) {
      total += o.durations[i];
      if (total <= num_frames) {
        q(i, total) += o.probability;
      } else {
        q(i, num_frames + 1) += o.probability;
      }
    }
  });
  return q;
}

Matrix oracle_attention(const LengthProbability& length, int num_frames) {
  if (num_frames < 1) {
    throw std::invalid_argument("oracle_attention: num_frames must be >= 1");
  }
  const int n = length.tokens();
  Matrix s(n, num_frames, 0.0);
  for_each_outcome(length, [&](const JointOutcome& o) {
    int end_before = 0;  // total duration of tokens before i
    for (int i = 0; i < n; ++i) {
      const int end = end_before + o.durations[i];
      // frames end_before+1 .. end belong to token i
      for (int j = end_before + 1; j <= std::min(end, num_frames); ++j) {
        s(i, j - 1) += o.probability;
      }
      end_before = end;
    }
  });
  return s;
}

std::vector<double> oracle_expected_durations(const LengthProbability& length) {
  const int n = length.tokens();
  std::vector<double> expected(n, 0.0);
  for_each_outcome(length, [&](const JointOutcome& o) {
    for (int i = 0; i < n; ++i) {
      expected[i] += o.probability * o.durations[i];
    }
  });
  return expected;
}

std::vector<double> oracle_coverage(const LengthProbability& length,
                                    int num_frames) {
  const int n = length.tokens();
  std::vector<double> coverage(num_frames, 0.0);
  for_each_outcome(length, [&](const JointOutcome& o) {
    int total = 0;
    for (int i = 0; i < n; ++i) total += o.durations[i];
    for (int j = 1; j <= std::min(total, num_frames); ++j) {
      coverage[j - 1] += o.probability;
    }
  });
  return coverage;
}

namespace {

struct InstanceError {
  double value = 0.0;
  const char* quantity = "";
};

double vec_max_abs_diff(const std::vector<double>& a,
                        const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return worst;
}

// One random instance: kernel vs oracle on every quantity.
InstanceError check_instance(int max_tokens, int max_duration, int max_frames,
                             std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::for_instance(seed, index);
  const int n = rng.uniform_int(1, max_tokens);
  const int max_dur = rng.uniform_int(1, max_duration);
  const int t_frames = rng.uniform_int(1, max_frames);

  Matrix logits(n, max_dur);
  for (double& v : logits.data()) v = 2.0 * rng.normal();
  const DurationParams params = apply_noisy_sigmoid(logits, 0.0, rng);
  const LengthProbability length = length_probability(params);

  InstanceError err;
  auto note = [&err](double e, const char* what) {
    if (e > err.value) {
      err.value = e;
      err.quantity = what;
    }
  };

  // l itself: oracle marginal per token must reproduce each row.
  {
    Matrix l_ref(n, max_dur + 1, 0.0);
    for_each_outcome(length, [&](const JointOutcome& o) {
      for (int i = 0; i < n; ++i) l_ref(i, o.durations[i]) += o.probability;
    });
    note(max_abs_diff(l_ref, length.l), "l");
  }

  const CumulativeDuration cumulative = cumulative_duration(length, t_frames);
  note(max_abs_diff(oracle_cumulative(length, t_frames), cumulative.q), "q");

  const AttentionMatrix attention =
      attention_probability(length, cumulative);
  note(max_abs_diff(oracle_attention(length, t_frames), attention.s), "s");

  note(vec_max_abs_diff(oracle_expected_durations(length),
                        expected_durations(length)),
       "expected");

  // Coverage identity: column sums of s equal P(total >= j).
  const std::vector<double> coverage = oracle_coverage(length, t_frames);
  for (int j = 0; j < t_frames; ++j) {
    double col = 0.0;
    for (int i = 0; i < n; ++i) col += attention.s(i, j);
    note(std::abs(col - coverage[j]), "coverage");
  }
  return err;
}

}  // namespace

OracleSuiteResult run_oracle_suite(int n_instances, int max_tokens,
                                   int max_duration, int max_frames,
                                   std::uint64_t seed, int jobs,
                                   double tolerance) {
  if (n_instances < 1) {
    throw std::invalid_argument("run_oracle_suite: n_instances must be >= 1");
  }
  if (max_tokens < 1 || max_duration < 1 || max_frames < 1) {
    throw std::invalid_argument("run_oracle_suite: bounds must be >= 1");
  }
  std::vector<InstanceError> errors(n_instances);
  const int workers = std::max(1, jobs);
  if (workers == 1) {
    for (int k = 0; k < n_instances; ++k) {
      errors[k] = check_instance(max_tokens, max_duration, max_frames, seed,
                                 static_cast<std::uint64_t>(k));
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int k = next.fetch_add(1); k < n_instances;
             k = next.fetch_add(1)) {
          errors[k] = check_instance(max_tokens, max_duration, max_frames,
                                     seed, static_cast<std::uint64_t>(k));
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  // Aggregate in instance order so the report is job-count independent.
  OracleSuiteResult result;
  result.instances = n_instances;
  for (int k = 0; k < n_instances; ++k) {
    if (errors[k].value > result.max_abs_error) {
      result.max_abs_error = errors[k].value;
      result.worst_instance = k;
      result.worst_quantity = errors[k].quantity;
    }
  }
  result.pass = result.max_abs_error <= tolerance;
  return result;
}

}  // namespace softalign
