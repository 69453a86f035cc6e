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
// Training objectives as pure functions. Inputs are plain values: the
// duration loss in particular takes detached numbers on both sides by
// design, so no gradient can leak from it into the aligner or the encoder.

#ifndef SOFTALIGN_LOSSES_HPP_
#define SOFTALIGN_LOSSES_HPP_

#include <vector>

#include "softalign/matrix.hpp"

namespace softalign {

struct LossWeights {
  double lambda_length = 1.0;
  double lambda_duration = 1.0;
  double lambda_recon = 1.0;
  double lambda_mel = 45.0;
  // When true, feature matching averages entries per layer instead of
  // summing them; keeps the term scale-free across layer sizes.
  bool feature_matching_mean = false;
};

// Per-sample discriminator outputs: final scores plus intermediate feature
// maps, one matrix per layer.
struct DiscriminatorOutputs {
  std::vector<double> scores;
  std::vector<Matrix> feature_maps;
};

// (1/N) * |total_frames - sum_i expected[i]|. Throws on empty input or
// negative total_frames.
double length_loss(const std::vector<double>& expected_durations,
                   int total_frames);

// Derivative of length_loss w.r.t. each expected duration: -sign(diff) / N,
// with the subgradient at the kink taken as 0.
std::vector<double> length_loss_grad(const std::vector<double>& expected_durations,
                                     int total_frames);

// (1/N) * sum_i |predicted[i] - expected[i]|. Both arguments are detached
// values; nothing propagates through this loss to either producer.
double duration_loss(const std::vector<double>& predicted,
                     const std::vector<double>& expected);

// mean((real - 1)^2) + mean(fake^2). Throws on empty score vectors.
double lsgan_discriminator_loss(const std::vector<double>& real_scores,
                                const std::vector<double>& fake_scores);

// mean((fake - 1)^2). Throws on an empty score vector.
double lsgan_generator_loss(const std::vector<double>& fake_scores);

// Sum over layers of the entrywise L1 distance between fake and real
// feature maps (mean per layer instead when per_layer_mean is set). Throws
// on layer count or per-layer shape mismatch, or when both lists are empty.
double feature_matching_loss(const DiscriminatorOutputs& fake,
                             const DiscriminatorOutputs& real,
                             bool per_layer_mean = false);

// Entrywise L1 distance between two log-mel matrices of equal shape.
double spectral_l1(const Matrix& fake_mel, const Matrix& real_mel);

// feature_matching + lambda_mel * spectral_l1, the combined reconstruction
// term fed into total_generator_loss (which then applies lambda_recon).
double reconstruction_loss(const DiscriminatorOutputs& fake,
                           const DiscriminatorOutputs& real,
                           const Matrix& fake_mel, const Matrix& real_mel,
                           const LossWeights& weights);

// adv_g + lambda_length * length_l + lambda_duration * duration_l +
// lambda_recon * recon_l.
double total_generator_loss(double adv_g, double length_l, double duration_l,
                            double recon_l, const LossWeights& weights);

}  // namespace softalign

#endif  // SOFTALIGN_LOSSES_HPP_
