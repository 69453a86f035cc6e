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

#include "softalign/losses.hpp"

#include <cmath>

#include "doctest.h"
#include "softalign/matrix.hpp"

using namespace softalign;

TEST_CASE("length loss values") {
  CHECK(length_loss({1.0, 1.0}, 2) == 0.0);
  CHECK(std::abs(length_loss({1.0}, 3) - 2.0) <= 1e-12);
  CHECK(std::abs(length_loss({2.0, 2.0}, 2) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(length_loss({}, 2), std::invalid_argument);
  CHECK_THROWS_AS(length_loss({1.0}, -1), std::invalid_argument);
}

TEST_CASE("length loss gradient signs") {
  // Target above the expected total pulls durations up (negative gradient).
  const auto up = length_loss_grad({1.0, 1.0}, 4);
  CHECK(up[0] == doctest::Approx(-0.5));
  CHECK(up[1] == doctest::Approx(-0.5));
  const auto down = length_loss_grad({3.0, 3.0}, 4);
  CHECK(down[0] == doctest::Approx(0.5));
  const auto at_kink = length_loss_grad({2.0, 2.0}, 4);
  CHECK(at_kink[0] == 0.0);
}

TEST_CASE("duration loss values and symmetry") {
  CHECK(duration_loss({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(std::abs(duration_loss({2.0, 3.0}, {1.0, 1.0}) - 1.5) <= 1e-12);
  CHECK(duration_loss({0.0}, {0.0}) == 0.0);
  CHECK(duration_loss({2.0, 3.0}, {1.0, 1.0}) ==
        duration_loss({1.0, 1.0}, {2.0, 3.0}));
  CHECK_THROWS_AS(duration_loss({1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(duration_loss({}, {}), std::invalid_argument);

  // Triangle inequality of the scaled L1 metric.
  const std::vector<double> a = {1.0, 5.0};
  const std::vector<double> b = {2.0, 2.0};
  const std::vector<double> c = {0.0, 4.0};
  CHECK(duration_loss(a, c) <=
        duration_loss(a, b) + duration_loss(b, c) + 1e-12);
}

TEST_CASE("lsgan losses") {
  CHECK(lsgan_discriminator_loss({1.0}, {0.0}) == 0.0);
  CHECK(std::abs(lsgan_discriminator_loss({0.0}, {1.0}) - 2.0) <= 1e-12);
  CHECK(std::abs(lsgan_discriminator_loss({0.5}, {0.5}) - 0.5) <= 1e-12);
  CHECK(lsgan_generator_loss({1.0}) == 0.0);
  CHECK(std::abs(lsgan_generator_loss({0.0}) - 1.0) <= 1e-12);
  CHECK(std::abs(lsgan_generator_loss({0.5}) - 0.25) <= 1e-12);
  CHECK_THROWS_AS(lsgan_generator_loss({}), std::invalid_argument);
  CHECK_THROWS_AS(lsgan_discriminator_loss({}, {1.0}), std::invalid_argument);

  // Mean over several samples.
  CHECK(std::abs(lsgan_generator_loss({0.0, 1.0}) - 0.5) <= 1e-12);
}

TEST_CASE("feature matching loss") {
  DiscriminatorOutputs fake, real;
  fake.feature_maps.push_back(Matrix::from_rows({{1.0, 2.0}}));
  real.feature_maps.push_back(Matrix::from_rows({{0.0, 0.0}}));
  CHECK(std::abs(feature_matching_loss(fake, real) - 3.0) <= 1e-12);

  DiscriminatorOutputs fake2 = fake, real2 = real;
  CHECK(feature_matching_loss(fake, fake2) == 0.0);

  // Two layers, each differing by 1 in a single entry.
  DiscriminatorOutputs f, r;
  f.feature_maps.push_back(Matrix::from_rows({{1.0, 0.0}}));
  r.feature_maps.push_back(Matrix::from_rows({{0.0, 0.0}}));
  f.feature_maps.push_back(Matrix::from_rows({{0.0}, {1.0}}));
  r.feature_maps.push_back(Matrix::from_rows({{0.0}, {0.0}}));
  CHECK(std::abs(feature_matching_loss(f, r) - 2.0) <= 1e-12);

  // Per-layer mean halves the first layer's two-entry sum.
  DiscriminatorOutputs fm, rm;
  fm.feature_maps.push_back(Matrix::from_rows({{1.0, 2.0}}));
  rm.feature_maps.push_back(Matrix::from_rows({{0.0, 0.0}}));
  CHECK(std::abs(feature_matching_loss(fm, rm, true) - 1.5) <= 1e-12);

  DiscriminatorOutputs wrong;
  wrong.feature_maps.push_back(Matrix::from_rows({{1.0}}));
  CHECK_THROWS_AS(feature_matching_loss(fake, wrong), std::invalid_argument);
  DiscriminatorOutputs none;
  CHECK_THROWS_AS(feature_matching_loss(none, none), std::invalid_argument);
}

TEST_CASE("spectral l1") {
  const Matrix a = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  CHECK(spectral_l1(a, a) == 0.0);

  Matrix b = a;
  for (double& v : b.data()) v += 0.5;
  CHECK(std::abs(spectral_l1(a, b) - 2.0) <= 1e-12);

  Matrix c = a;
  c(1, 0) += 3.0;
  CHECK(std::abs(spectral_l1(a, c) - 3.0) <= 1e-12);

  CHECK_THROWS_AS(spectral_l1(a, Matrix(1, 2, 0.0)), std::invalid_argument);
}

TEST_CASE("total generator loss") {
  LossWeights unit;
  unit.lambda_length = 1.0;
  unit.lambda_duration = 1.0;
  unit.lambda_recon = 1.0;
  CHECK(total_generator_loss(0.0, 0.0, 0.0, 0.0, unit) == 0.0);
  CHECK(std::abs(total_generator_loss(1.0, 1.0, 1.0, 1.0, unit) - 4.0) <=
        1e-12);

  LossWeights only_length;
  only_length.lambda_length = 2.0;
  only_length.lambda_duration = 0.0;
  only_length.lambda_recon = 0.0;
  const double adv = 0.7;
  CHECK(std::abs(total_generator_loss(adv, 3.0, 5.0, 9.0, only_length) -
                 (adv + 6.0)) <= 1e-12);

  // Linearity in each component.
  LossWeights w;
  w.lambda_length = 0.5;
  w.lambda_duration = 2.0;
  w.lambda_recon = 3.0;
  const double base = total_generator_loss(1.0, 2.0, 3.0, 4.0, w);
  CHECK(std::abs(total_generator_loss(1.0, 2.0 + 1.0, 3.0, 4.0, w) - base -
                 0.5) <= 1e-12);
  CHECK(std::abs(total_generator_loss(1.0, 2.0, 3.0 + 1.0, 4.0, w) - base -
                 2.0) <= 1e-12);
  CHECK(std::abs(total_generator_loss(1.0, 2.0, 3.0, 4.0 + 1.0, w) - base -
                 3.0) <= 1e-12);
}

TEST_CASE("reconstruction loss combines feature matching and mel terms") {
  DiscriminatorOutputs fake, real;
  fake.feature_maps.push_back(Matrix::from_rows({{1.0}}));
  real.feature_maps.push_back(Matrix::from_rows({{0.0}}));
  const Matrix mel_a = Matrix::from_rows({{0.0}});
  const Matrix mel_b = Matrix::from_rows({{1.0}});
  LossWeights w;
  w.lambda_mel = 45.0;
  CHECK(std::abs(reconstruction_loss(fake, real, mel_a, mel_b, w) -
                 (1.0 + 45.0)) <= 1e-12);
  CHECK(reconstruction_loss(fake, fake, mel_a, mel_a, w) == 0.0);
}
