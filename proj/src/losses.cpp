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
#include <stdexcept>

namespace softalign {

namespace {

double mean_squared_to(const std::vector<double>& scores, double target) {
  if (scores.empty()) {
    throw std::invalid_argument("lsgan loss: empty score vector");
  }
  double acc = 0.0;
  for (double s : scores) {
    const double d = s - target;
    acc += d * d;
  }
  return acc / static_cast<double>(scores.size());
}

}  // namespace

double length_loss(const std::vector<double>& expected_durations,
                   int total_frames) {
  if (expected_durations.empty()) {
    throw std::invalid_argument("length_loss: empty duration vector");
  }
  if (total_frames < 0) {
    throw std::invalid_argument("length_loss: negative total_frames");
  }
  double total = 0.0;
  for (double v : expected_durations) total += v;
  return std::abs(static_cast<double>(total_frames) - total) /
         static_cast<double>(expected_durations.size());
}

std::vector<double> length_loss_grad(
    const std::vector<double>& expected_durations, int total_frames) {
  if (expected_durations.empty()) {
    throw std::invalid_argument("length_loss_grad: empty duration vector");
  }
  if (total_frames < 0) {
    throw std::invalid_argument("length_loss_grad: negative total_frames");
  }
  double total = 0.0;
  for (double v : expected_durations) total += v;
  const double diff = static_cast<double>(total_frames) - total;
  double g = 0.0;
  if (diff > 0.0) g = -1.0;
  if (diff < 0.0) g = 1.0;
  g /= static_cast<double>(expected_durations.size());
  return std::vector<double>(expected_durations.size(), g);
}

double duration_loss(const std::vector<double>& predicted,
                     const std::vector<double>& expected) {
  if (predicted.size() != expected.size()) {
    throw std::invalid_argument("duration_loss: length mismatch");
  }
  if (predicted.empty()) {
    throw std::invalid_argument("duration_loss: empty vectors");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    acc += std::abs(predicted[i] - expected[i]);
  }
  return acc / static_cast<double>(predicted.size());
}

double lsgan_discriminator_loss(const std::vector<double>& real_scores,
                                const std::vector<double>& fake_scores) {
  return mean_squared_to(real_scores, 1.0) + mean_squared_to(fake_scores, 0.0);
}

double lsgan_generator_loss(const std::vector<double>& fake_scores) {
  return mean_squared_to(fake_scores, 1.0);
}

double feature_matching_loss(const DiscriminatorOutputs& fake,
                             const DiscriminatorOutputs& real,
                             bool per_layer_mean) {
  if (fake.feature_maps.size() != real.feature_maps.size()) {
    throw std::invalid_argument("feature_matching_loss: layer count mismatch");
  }
  if (fake.feature_maps.empty()) {
    throw std::invalid_argument("feature_matching_loss: no feature maps");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < fake.feature_maps.size(); ++t) {
    const Matrix& f = fake.feature_maps[t];
    const Matrix& r = real.feature_maps[t];
    if (!f.same_shape(r)) {
      throw std::invalid_argument("feature_matching_loss: layer shape mismatch");
    }
    double layer = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      layer += std::abs(f.data()[k] - r.data()[k]);
    }
    if (per_layer_mean && f.size() > 0) {
      layer /= static_cast<double>(f.size());
    }
    total += layer;
  }
  return total;
}

double spectral_l1(const Matrix& fake_mel, const Matrix& real_mel) {
  if (!fake_mel.same_shape(real_mel)) {
    throw std::invalid_argument("spectral_l1: shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < fake_mel.size(); ++k) {
    acc += std::abs(fake_mel.data()[k] - real_mel.data()[k]);
  }
  return acc;
}

double reconstruction_loss(const DiscriminatorOutputs& fake,
                           const DiscriminatorOutputs& real,
                           const Matrix& fake_mel, const Matrix& real_mel,
                           const LossWeights& weights) {
  return feature_matching_loss(fake, real, weights.feature_matching_mean) +
         weights.lambda_mel * spectral_l1(fake_mel, real_mel);
}

double total_generator_loss(double adv_g, double length_l, double duration_l,
                            double recon_l, const LossWeights& weights) {
  return adv_g + weights.lambda_length * length_l +
         weights.lambda_duration * duration_l + weights.lambda_recon * recon_l;
}

}  // namespace softalign
