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

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "softalign/duration_kernel.hpp"
#include "softalign/matrix.hpp"

using namespace softalign;

namespace {

LengthProbability length_from(const Matrix& p) {
  DurationParams params;
  params.p = p;
  return length_probability(params);
}

}  // namespace

TEST_CASE("outcome enumeration covers every joint assignment once") {
  const auto length =
      length_from(Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
  CHECK(outcome_count(length) == 9);

  const auto outcomes = enumerate_outcomes(length);
  REQUIRE(outcomes.size() == 9);
  std::set<std::vector<int>> seen;
  double total = 0.0;
  for (const auto& outcome : outcomes) {
    REQUIRE(outcome.durations.size() == 2);
    for (int d : outcome.durations) {
      CHECK(d >= 0);
      CHECK(d <= 2);
    }
    seen.insert(outcome.durations);
    total += outcome.probability;
  }
  CHECK(seen.size() == 9);
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("outcome probabilities are the product of row probabilities") {
  const auto length =
      length_from(Matrix::from_rows({{0.7, 0.2}, {0.3, 0.9}}));
  for (const auto& outcome : enumerate_outcomes(length)) {
    const double expected = length.l(0, outcome.durations[0]) *
                            length.l(1, outcome.durations[1]);
    CHECK(outcome.probability == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("oversize instances are refused") {
  // (M+1)^N = 11^8 > 1e7.
  const auto length = length_from(Matrix(8, 10, 0.5));
  CHECK_THROWS_AS(outcome_count(length), std::invalid_argument);
}

TEST_CASE("oracle attention matches the hand-computed single-token case") {
  const auto length = length_from(Matrix::from_rows({{0.5, 0.5}}));
  const Matrix s = oracle_attention(length, 2);
  REQUIRE(s.rows() == 1);
  REQUIRE(s.cols() == 2);
  CHECK(s(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(s(0, 1) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("oracle agrees with the kernel on fixed small instances") {
  const auto length =
      length_from(Matrix::from_rows({{0.7, 0.2, 0.5}, {0.3, 0.9, 0.4}}));
  const int t_frames = 4;

  const auto cumulative = cumulative_duration(length, t_frames);
  const auto attention = attention_probability(length, cumulative);

  CHECK(max_abs_diff(oracle_cumulative(length, t_frames), cumulative.q) <=
        1e-12);
  CHECK(max_abs_diff(oracle_attention(length, t_frames), attention.s) <=
        1e-12);

  const auto expected = expected_durations(length);
  const auto oracle_expected = oracle_expected_durations(length);
  REQUIRE(expected.size() == oracle_expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(std::abs(expected[i] - oracle_expected[i]) <= 1e-12);
  }

  const auto coverage = oracle_coverage(length, t_frames);
  for (int j = 1; j <= t_frames; ++j) {
    double col = 0.0;
    for (int i = 0; i < attention.s.rows(); ++i) col += attention.s(i, j - 1);
    CHECK(std::abs(col - coverage[j - 1]) <= 1e-12);
  }
}

TEST_CASE("oracle suite passes and is job-count independent") {
  const OracleSuiteResult serial = run_oracle_suite(20, 4, 5, 12, 123, 1);
  CHECK(serial.pass);
  CHECK(serial.instances == 20);
  CHECK(serial.max_abs_error <= 1e-9);

  const OracleSuiteResult parallel = run_oracle_suite(20, 4, 5, 12, 123, 4);
  CHECK(parallel.pass);
  CHECK(parallel.max_abs_error == serial.max_abs_error);
  CHECK(parallel.worst_instance == serial.worst_instance);
}

TEST_CASE("oracle suite rejects bad arguments") {
  CHECK_THROWS_AS(run_oracle_suite(0, 4, 5, 12, 1), std::invalid_argument);
}
