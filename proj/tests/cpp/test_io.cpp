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

#include "softalign/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "softalign/matrix.hpp"
#include "softalign/rng.hpp"

using namespace softalign;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("csv round trip is bit exact") {
  Matrix m(3, 4);
  Rng rng(123);
  for (double& v : m.data()) v = rng.normal() * std::pow(10.0, rng.uniform_int(-12, 12));
  m(0, 0) = 1.0 / 3.0;
  m(0, 1) = -0.0;
  m(1, 2) = 1e-300;
  m(2, 3) = 6.02214076e23;

  for (const bool header : {true, false}) {
    const std::string text = serialize_csv(m, header);
    const Matrix back = parse_csv(text);
    REQUIRE(back.same_shape(m));
    for (std::size_t k = 0; k < m.size(); ++k) {
      // Bitwise equality, not numeric closeness.
      CHECK(std::memcmp(&back.data()[k], &m.data()[k], sizeof(double)) == 0);
    }
  }
}

TEST_CASE("csv header carries the shape") {
  const Matrix m(2, 3, 1.5);
  const std::string text = serialize_csv(m);
  CHECK(text.rfind("# rows=2 cols=3\n", 0) == 0);
  CHECK(parse_csv(text).same_shape(m));

  // Declared shape must match the data.
  CHECK_THROWS_WITH_AS(parse_csv("# rows=3 cols=2\n1,2\n"),
                       doctest::Contains("rows=3"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_csv("# rows=1 cols=3\n1,2\n"),
                       doctest::Contains("cols=3"), std::invalid_argument);
}

TEST_CASE("csv errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_csv("1,2\n3\n"), doctest::Contains("line 2"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_csv("1,2\n3,x\n"), doctest::Contains("line 2"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_csv("1,2\n\n3,4\n"), doctest::Contains("line 2"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_csv("1,2\n# comment\n"),
                       doctest::Contains("line 2"), std::invalid_argument);
}

TEST_CASE("csv file io") {
  const auto path = temp_file("softalign_io_test.csv");
  Matrix m(2, 2);
  m(0, 0) = 0.1;
  m(0, 1) = -2.5;
  m(1, 0) = 3.0;
  m(1, 1) = 1e-7;
  write_csv(path.string(), m);
  const Matrix back = read_csv(path.string());
  CHECK(back == m);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(read_csv("/nonexistent/softalign.csv"), std::runtime_error);
}

TEST_CASE("pgm heatmap layout") {
  Matrix m(2, 3, 0.0);
  m(0, 0) = 1.0;
  m(0, 1) = 0.5;
  m(1, 2) = 2.0;   // clipped to 1
  m(1, 0) = -0.5;  // clipped to 0
  const auto path = temp_file("softalign_io_test.pgm");
  write_pgm(path.string(), m);
  const std::string bytes = slurp(path);
  std::filesystem::remove(path);

  const std::string expected_header = "P5\n3 2\n255\n";
  REQUIRE(bytes.size() == expected_header.size() + 6);
  CHECK(bytes.compare(0, expected_header.size(), expected_header) == 0);
  const unsigned char* pix =
      reinterpret_cast<const unsigned char*>(bytes.data()) +
      expected_header.size();
  CHECK(pix[0] == 255);
  CHECK(pix[1] == 128);  // round(0.5 * 255)
  CHECK(pix[2] == 0);
  CHECK(pix[3] == 0);
  CHECK(pix[4] == 0);
  CHECK(pix[5] == 255);
}

TEST_CASE("config parsing applies defaults and validates") {
  const Config defaults = parse_config("{}");
  CHECK(defaults.kernel.max_duration == 4);
  CHECK(defaults.weights.lambda_mel == 45.0);
  CHECK(defaults.trainer.train.steps == 2000);
  CHECK(defaults.trainer.train.optimizer == Optimizer::kAdam);

  const Config parsed = parse_config(R"({
    "kernel": {"max_duration": 6, "num_frames": 20, "noise_std": 0.5, "seed": 9},
    "weights": {"lambda_length": 2.0, "feature_matching_mean": true},
    "trainer": {"steps": 10, "learning_rate": 0.1, "optimizer": "gd",
                "n_tokens": 3, "embed_dim": 2, "task_seed": 4, "seed": 5}
  })");
  CHECK(parsed.kernel.max_duration == 6);
  CHECK(parsed.kernel.num_frames == 20);
  CHECK(parsed.kernel.noise_std == 0.5);
  CHECK(parsed.weights.lambda_length == 2.0);
  CHECK(parsed.weights.feature_matching_mean);
  CHECK(parsed.trainer.train.steps == 10);
  CHECK(parsed.trainer.train.optimizer == Optimizer::kGradientDescent);
  CHECK(parsed.trainer.n_tokens == 3);
  CHECK(parsed.trainer.train.weights.lambda_length == 2.0);

  // Round trip through the serializer.
  const Config again = parse_config(serialize_config(parsed));
  CHECK(again.kernel.max_duration == parsed.kernel.max_duration);
  CHECK(again.trainer.train.learning_rate ==
        parsed.trainer.train.learning_rate);
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"kernels": {}})"),
                       doctest::Contains("unknown key 'kernels'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config(R"({"kernel": {"m": 3}})"),
                       doctest::Contains("unknown key 'm'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config(R"({"weights": {"lambda_len": 1}})"),
                       doctest::Contains("unknown key 'lambda_len'"),
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"kernel": {"max_duration": 0}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"kernel": {"noise_std": -1}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"trainer": {"learning_rate": 0}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"trainer": {"optimizer": "momentum"}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"trainer": {"seed": -3}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"trainer": {"noise_decay_fraction": 2}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"kernel": []})"), std::invalid_argument);
}
