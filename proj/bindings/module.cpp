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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "softalign/duration_kernel.hpp"
#include "softalign/grad_engine.hpp"
#include "softalign/losses.hpp"
#include "softalign/oracle.hpp"
#include "softalign/regulator.hpp"
#include "softalign/toy_trainer.hpp"

namespace py = pybind11;

namespace {

using softalign::Matrix;

using DoubleArray =
    py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DoubleArray& arr, const char* name) {
  if (arr.ndim() != 2) {
    throw std::invalid_argument(std::string(name) + " must be a 2-D array");
  }
  Matrix m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  if (m.size() > 0) {
    std::memcpy(m.data().data(), arr.data(), m.size() * sizeof(double));
  }
  return m;
}

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> arr({m.rows(), m.cols()});
  if (m.size() > 0) {
    std::memcpy(arr.mutable_data(), m.data().data(),
                m.size() * sizeof(double));
  }
  return arr;
}

softalign::DurationParams params_from_array(const DoubleArray& p) {
  softalign::DurationParams params;
  params.p = to_matrix(p, "p");
  for (double v : params.p.data()) {
    if (!(v > 0.0) || !(v < 1.0)) {
      throw std::invalid_argument("p entries must lie strictly in (0, 1)");
    }
  }
  return params;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "stochastic duration model: soft monotonic alignment, expected "
      "upsampling, losses, gradients and the hard inference path";

  m.def(
      "length_probability",
      [](const DoubleArray& p) {
        return to_array(
            softalign::length_probability(params_from_array(p)).l);
      },
      py::arg("p"),
      "Per-token duration distribution, rows (N x (M+1)) summing to one.");

  m.def(
      "cumulative_duration",
      [](const DoubleArray& p, int num_frames) {
        const auto length = softalign::length_probability(params_from_array(p));
        return to_array(
            softalign::cumulative_duration(length, num_frames).q);
      },
      py::arg("p"), py::arg("num_frames"),
      "Distributions of prefix duration sums, N x (T+2) with an overflow "
      "column.");

  m.def(
      "attention_probability",
      [](const DoubleArray& p, int num_frames) {
        const auto length = softalign::length_probability(params_from_array(p));
        const auto cumulative =
            softalign::cumulative_duration(length, num_frames);
        return to_array(
            softalign::attention_probability(length, cumulative).s);
      },
      py::arg("p"), py::arg("num_frames"),
      "Soft monotonic alignment matrix, N x T.");

  m.def(
      "expected_durations",
      [](const DoubleArray& p) {
        return softalign::expected_durations(
            softalign::length_probability(params_from_array(p)));
      },
      py::arg("p"), "E[w_i] per token.");

  m.def(
      "align",
      [](const DoubleArray& logits, const DoubleArray& hidden, int num_frames,
         double noise_std, std::uint64_t seed) {
        softalign::Rng rng(seed);
        const auto result =
            softalign::align(to_matrix(logits, "logits"),
                             to_matrix(hidden, "hidden"), num_frames,
                             noise_std, rng);
        py::dict out;
        out["p"] = to_array(result.params.p);
        out["l"] = to_array(result.length.l);
        out["q"] = to_array(result.cumulative.q);
        out["s"] = to_array(result.attention.s);
        out["expanded"] = to_array(result.expanded);
        out["expected_durations"] = result.expected_durations;
        return out;
      },
      py::arg("logits"), py::arg("hidden"), py::arg("num_frames"),
      py::arg("noise_std") = 0.0, py::arg("seed") = 0,
      "Full forward pass from duration logits; returns all intermediates.");

  m.def(
      "expected_upsample",
      [](const DoubleArray& s, const DoubleArray& hidden) {
        softalign::AttentionMatrix attention;
        attention.s = to_matrix(s, "s");
        return to_array(softalign::expected_upsample(
            attention, to_matrix(hidden, "hidden")));
      },
      py::arg("s"), py::arg("hidden"),
      "y = s^T h, the attention-weighted upsampled sequence (T x D).");

  m.def(
      "align_grad",
      [](const DoubleArray& logits, const DoubleArray& hidden, int num_frames,
         const DoubleArray& upstream_expanded,
         const std::vector<double>& upstream_expected) {
        softalign::Rng rng(0);
        const auto tape =
            softalign::align(to_matrix(logits, "logits"),
                             to_matrix(hidden, "hidden"), num_frames, 0.0,
                             rng);
        const auto grads = softalign::backward_align(
            tape, to_matrix(upstream_expanded, "upstream_expanded"),
            upstream_expected);
        py::dict out;
        out["logits_grad"] = to_array(grads.logits_grad);
        out["hidden_grad"] = to_array(grads.hidden_grad);
        return out;
      },
      py::arg("logits"), py::arg("hidden"), py::arg("num_frames"),
      py::arg("upstream_expanded"),
      py::arg("upstream_expected") = std::vector<double>{},
      "Noiseless forward then reverse mode: cotangents of the expanded "
      "output and the expected durations pushed back to logits and hidden.");

  m.def(
      "sample_durations",
      [](const DoubleArray& p, int n_samples, std::uint64_t seed) {
        const auto params = params_from_array(p);
        softalign::Rng rng(seed);
        py::array_t<int> out({n_samples, params.tokens()});
        auto view = out.mutable_unchecked<2>();
        for (int k = 0; k < n_samples; ++k) {
          const auto d = softalign::sample_durations(params, rng);
          for (int i = 0; i < params.tokens(); ++i) view(k, i) = d[i];
        }
        return out;
      },
      py::arg("p"), py::arg("n_samples") = 1, py::arg("seed") = 0,
      "Integer duration samples, one row per draw.");

  m.def("discretize_durations", &softalign::discretize_durations,
        py::arg("expected"), py::arg("max_duration") = -1,
        "Round half to even, clamp below at 0, optional upper cap.");

  m.def(
      "scale_durations",
      [](const std::vector<double>& values, double factor) {
        return softalign::scale_durations(values, factor);
      },
      py::arg("values"), py::arg("factor"),
      "Multiply by factor, then discretize.");

  m.def(
      "expand",
      [](const DoubleArray& hidden, const std::vector<int>& durations) {
        return to_array(
            softalign::expand(to_matrix(hidden, "hidden"), durations));
      },
      py::arg("hidden"), py::arg("durations"),
      "Repeat row i of hidden durations[i] times.");

  m.def(
      "hard_attention",
      [](const std::vector<int>& durations, int num_frames) {
        return to_array(softalign::hard_attention(durations, num_frames).s);
      },
      py::arg("durations"), py::arg("num_frames"),
      "Binary block-diagonal alignment matrix.");

  m.def("length_loss", &softalign::length_loss, py::arg("expected_durations"),
        py::arg("total_frames"));
  m.def("duration_loss", &softalign::duration_loss, py::arg("predicted"),
        py::arg("expected"));
  m.def("lsgan_discriminator_loss", &softalign::lsgan_discriminator_loss,
        py::arg("real_scores"), py::arg("fake_scores"));
  m.def("lsgan_generator_loss", &softalign::lsgan_generator_loss,
        py::arg("fake_scores"));
  m.def(
      "feature_matching_loss",
      [](const std::vector<DoubleArray>& fake,
         const std::vector<DoubleArray>& real, bool per_layer_mean) {
        softalign::DiscriminatorOutputs f, r;
        for (const auto& a : fake) f.feature_maps.push_back(to_matrix(a, "fake"));
        for (const auto& a : real) r.feature_maps.push_back(to_matrix(a, "real"));
        return softalign::feature_matching_loss(f, r, per_layer_mean);
      },
      py::arg("fake"), py::arg("real"), py::arg("per_layer_mean") = false);
  m.def(
      "spectral_l1",
      [](const DoubleArray& fake_mel, const DoubleArray& real_mel) {
        return softalign::spectral_l1(to_matrix(fake_mel, "fake_mel"),
                                      to_matrix(real_mel, "real_mel"));
      },
      py::arg("fake_mel"), py::arg("real_mel"));
  m.def(
      "total_generator_loss",
      [](double adv_g, double length_l, double duration_l, double recon_l,
         double lambda_length, double lambda_duration, double lambda_recon) {
        softalign::LossWeights w;
        w.lambda_length = lambda_length;
        w.lambda_duration = lambda_duration;
        w.lambda_recon = lambda_recon;
        return softalign::total_generator_loss(adv_g, length_l, duration_l,
                                               recon_l, w);
      },
      py::arg("adv_g"), py::arg("length_l"), py::arg("duration_l"),
      py::arg("recon_l"), py::arg("lambda_length") = 1.0,
      py::arg("lambda_duration") = 1.0, py::arg("lambda_recon") = 1.0);

  m.def(
      "run_oracle_suite",
      [](int n_instances, int max_tokens, int max_duration, int max_frames,
         std::uint64_t seed, int jobs, double tolerance) {
        const auto result =
            softalign::run_oracle_suite(n_instances, max_tokens, max_duration,
                                        max_frames, seed, jobs, tolerance);
        py::dict out;
        out["pass"] = result.pass;
        out["instances"] = result.instances;
        out["max_abs_error"] = result.max_abs_error;
        out["worst_instance"] = result.worst_instance;
        out["worst_quantity"] = result.worst_quantity;
        return out;
      },
      py::arg("n_instances") = 200, py::arg("max_tokens") = 4,
      py::arg("max_duration") = 5, py::arg("max_frames") = 12,
      py::arg("seed") = 0, py::arg("jobs") = 1, py::arg("tolerance") = 1e-9,
      "Check the kernel against brute-force enumeration.");

  m.def(
      "run_gradcheck_suite",
      [](int n_instances, double epsilon, std::uint64_t seed, int jobs,
         double tolerance) {
        const auto result = softalign::run_gradcheck_suite(
            n_instances, epsilon, seed, jobs, tolerance);
        py::dict out;
        out["pass"] = result.pass;
        out["instances"] = result.instances;
        out["max_rel_error"] = result.max_rel_error;
        out["max_abs_error"] = result.max_abs_error;
        out["worst_instance"] = result.worst_instance;
        out["worst_check"] = result.worst_check;
        return out;
      },
      py::arg("n_instances") = 100, py::arg("epsilon") = 1e-5,
      py::arg("seed") = 0, py::arg("jobs") = 1, py::arg("tolerance") = 1e-5,
      "Check analytic gradients against central finite differences.");

  m.def(
      "train_toy",
      [](int n_tokens, int max_duration, int embed_dim,
         std::uint64_t task_seed, int steps, double learning_rate,
         const std::string& optimizer, double noise_std_init,
         double noise_decay_fraction, double lambda_length,
         std::uint64_t seed) {
        const auto task = softalign::make_task(n_tokens, max_duration,
                                               embed_dim, task_seed);
        softalign::TrainConfig config;
        config.steps = steps;
        config.learning_rate = learning_rate;
        config.optimizer = softalign::optimizer_from_string(optimizer);
        config.noise_std_init = noise_std_init;
        config.noise_decay_fraction = noise_decay_fraction;
        config.weights.lambda_length = lambda_length;
        config.seed = seed;
        const auto report = softalign::train(task, config);
        py::dict out;
        out["steps_run"] = report.steps_run;
        out["diverged"] = report.diverged;
        out["total_loss"] = report.total_loss;
        out["final_total_loss"] = report.final_total_loss;
        out["final_expected_durations"] = report.final_expected_durations;
        out["true_durations"] = task.true_durations;
        out["duration_mae"] = report.duration_mae;
        out["discreteness"] = report.discreteness_final;
        out["hard_match_rate"] = report.hard_match_rate;
        out["wall_time_seconds"] = report.wall_time_seconds;
        return out;
      },
      py::arg("n_tokens") = 6, py::arg("max_duration") = 6,
      py::arg("embed_dim") = 4, py::arg("task_seed") = 0,
      py::arg("steps") = 2000, py::arg("learning_rate") = 2e-2,
      py::arg("optimizer") = "adam", py::arg("noise_std_init") = 1.0,
      py::arg("noise_decay_fraction") = 0.8, py::arg("lambda_length") = 1.0,
      py::arg("seed") = 0,
      "Fit duration logits on a synthetic task; returns the report.");

  m.attr("PROB_EPS") = softalign::kProbEps;
}
