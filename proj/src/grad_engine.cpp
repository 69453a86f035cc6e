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

#include "softalign/grad_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "softalign/losses.hpp"

namespace softalign {

namespace {

// Denominator floor of the finite-difference relative error. Equal to
// atol/rtol of the combined check |a - n| <= atol + rtol*max(|a|, |n|) at
// the default tolerance 1e-5, i.e. atol = 1e-8.
constexpr double kFdAbsFloor = 1e-3;

// tail[k] = sum_{d >= k} l(i, d), k = 0..M+1.
std::vector<double> tail_probabilities(const double* l_row, int max_duration) {
  std::vector<double> tail(max_duration + 2, 0.0);
  for (int k = max_duration; k >= 0; --k) {
    tail[k] = tail[k + 1] + l_row[k];
  }
  return tail;
}

bool was_clamped(double p) {
  return p <= kProbEps || p >= 1.0 - kProbEps;
}

}  // namespace

Matrix backward_length_probability(const DurationParams& params,
                                   const LengthProbability& length,
                                   const Matrix& upstream_length) {
  if (!upstream_length.same_shape(length.l)) {
    throw std::invalid_argument(
        "backward_length_probability: upstream shape mismatch");
  }
  const int n = params.tokens();
  const int max_dur = params.max_duration();
  Matrix grad(n, max_dur, 0.0);
  for (int i = 0; i < n; ++i) {
    // Trial k appears negatively (through the survival product) in every
    // l(i, m) with m > k and in l(i, 0); accumulate those terms as a
    // suffix sum while walking k downward.
    double suffix = upstream_length(i, 0) * length.l(i, 0);
    for (int k = max_dur; k >= 1; --k) {
      const double p = params.p(i, k - 1);
      const double weighted = upstream_length(i, k) * length.l(i, k);
      grad(i, k - 1) = weighted / p - suffix / (1.0 - p);
      suffix += weighted;
    }
  }
  return grad;
}

Matrix backward_cumulative(const LengthProbability& length,
                           const CumulativeDuration& cumulative,
                           const Matrix& upstream_cumulative) {
  if (!upstream_cumulative.same_shape(cumulative.q)) {
    throw std::invalid_argument("backward_cumulative: upstream shape mismatch");
  }
  if (length.tokens() != cumulative.tokens()) {
    throw std::invalid_argument("backward_cumulative: token count mismatch");
  }
  const int n = length.tokens();
  const int max_dur = length.max_duration();
  const int t_frames = cumulative.num_frames();
  const int ovf = t_frames + 1;
  const Matrix& q = cumulative.q;

  Matrix grad(n, max_dur + 1, 0.0);

  // Running adjoint of the current q row (columns 0..T) and its overflow
  // cell, starting from the last row and folding the recurrence backwards.
  std::vector<double> adj(t_frames + 1, 0.0);
  for (int m = 0; m <= t_frames; ++m) adj[m] = upstream_cumulative(n - 1, m);
  double adj_ovf = upstream_cumulative(n - 1, ovf);

  for (int i = n - 1; i >= 1; --i) {
    const double* l_row = length.l.row(i);
    const std::vector<double> tail = tail_probabilities(l_row, max_dur);
    std::vector<double> prev(t_frames + 1, 0.0);
    double prev_ovf = adj_ovf;  // overflow mass carries through unchanged

    for (int j = 0; j <= t_frames; ++j) {
      const double a = adj[j];
      if (a == 0.0) continue;
      const int m_lo = std::max(0, j - max_dur);
      for (int m = m_lo; m <= j; ++m) {
        prev[m] += a * l_row[j - m];
        grad(i, j - m) += a * q(i - 1, m);
      }
    }
    if (adj_ovf != 0.0) {
      // q(i, ovf) gained q(i-1, m) * tail(T+1-m); differentiate both ways.
      std::vector<double> suffix_q(t_frames + 2, 0.0);
      for (int m = t_frames; m >= 0; --m) {
        suffix_q[m] = suffix_q[m + 1] + q(i - 1, m);
      }
      for (int m = 0; m <= t_frames; ++m) {
        const int k = t_frames + 1 - m;
        if (k <= max_dur) prev[m] += adj_ovf * tail[k];
      }
      for (int d = 1; d <= max_dur; ++d) {
        const int m_lo = std::max(0, t_frames + 1 - d);
        grad(i, d) += adj_ovf * suffix_q[m_lo];
      }
    }
    for (int m = 0; m <= t_frames; ++m) {
      prev[m] += upstream_cumulative(i - 1, m);
    }
    prev_ovf += upstream_cumulative(i - 1, ovf);
    adj.swap(prev);
    adj_ovf = prev_ovf;
  }

  // First row: q(0, j) = l(0, j) truncated, overflow = tail mass past T.
  for (int j = 0; j <= std::min(max_dur, t_frames); ++j) {
    grad(0, j) += adj[j];
  }
  for (int d = t_frames + 1; d <= max_dur; ++d) {
    grad(0, d) += adj_ovf;
  }
  return grad;
}

AttentionBackward backward_attention(const LengthProbability& length,
                                     const CumulativeDuration& cumulative,
                                     const AttentionMatrix& attention,
                                     const Matrix& upstream_attention) {
  if (!upstream_attention.same_shape(attention.s)) {
    throw std::invalid_argument("backward_attention: upstream shape mismatch");
  }
  if (length.tokens() != cumulative.tokens() ||
      length.tokens() != attention.tokens() ||
      cumulative.num_frames() != attention.num_frames()) {
    throw std::invalid_argument("backward_attention: shape mismatch");
  }
  const int n = length.tokens();
  const int max_dur = length.max_duration();
  const int t_frames = attention.num_frames();
  const Matrix& q = cumulative.q;

  AttentionBackward out;
  out.length_grad = Matrix(n, max_dur + 1, 0.0);
  out.cumulative_grad = Matrix(n, t_frames + 2, 0.0);

  {
    // Row 1: s(1, j) = sum_{m >= j} l(1, m), so l(1, t) feeds frames 1..t.
    double prefix = 0.0;
    std::vector<double> prefix_upstream(t_frames + 1, 0.0);
    for (int j = 1; j <= t_frames; ++j) {
      prefix += upstream_attention(0, j - 1);
      prefix_upstream[j] = prefix;
    }
    for (int t = 1; t <= max_dur; ++t) {
      out.length_grad(0, t) = prefix_upstream[std::min(t, t_frames)];
    }
  }

  for (int i = 1; i < n; ++i) {
    const double* l_row = length.l.row(i);
    const std::vector<double> tail = tail_probabilities(l_row, max_dur);
    const double* u_row = upstream_attention.row(i);

    for (int j = 1; j <= t_frames; ++j) {
      const double a = u_row[j - 1];
      if (a == 0.0) continue;
      const int m_lo = std::max(0, j - max_dur);
      for (int m = m_lo; m <= j - 1; ++m) {
        out.cumulative_grad(i - 1, m) += a * tail[j - m];
      }
    }

    // prefix_q[x] = sum_{m=0}^{x-1} q(i-1, m); ds(i,j)/dl(i,t) is a window
    // sum of q(i-1, :) between j-t and j-1.
    std::vector<double> prefix_q(t_frames + 2, 0.0);
    for (int m = 0; m <= t_frames; ++m) {
      prefix_q[m + 1] = prefix_q[m] + q(i - 1, m);
    }
    for (int t = 1; t <= max_dur; ++t) {
      double acc = 0.0;
      for (int j = 1; j <= t_frames; ++j) {
        const double a = u_row[j - 1];
        if (a == 0.0) continue;
        const int lo = std::max(0, j - t);  // first m in the window
        acc += a * (prefix_q[j] - prefix_q[lo]);
      }
      out.length_grad(i, t) = acc;
    }
  }
  return out;
}

AlignGradients backward_align(const AlignResult& tape,
                              const Matrix& upstream_expanded,
                              const std::vector<double>& upstream_expected) {
  const int n = tape.params.tokens();
  const int max_dur = tape.params.max_duration();
  const int t_frames = tape.attention.num_frames();
  const int dim = tape.hidden.cols();

  const bool has_expanded = !upstream_expanded.empty();
  if (has_expanded && (upstream_expanded.rows() != t_frames ||
                       upstream_expanded.cols() != dim)) {
    throw std::invalid_argument("backward_align: expanded cotangent shape");
  }
  const bool has_expected = !upstream_expected.empty();
  if (has_expected && static_cast<int>(upstream_expected.size()) != n) {
    throw std::invalid_argument("backward_align: expected cotangent length");
  }

  AlignGradients grads;
  grads.hidden_grad = Matrix(n, dim, 0.0);

  Matrix upstream_s(n, t_frames, 0.0);
  if (has_expanded) {
    for (int i = 0; i < n; ++i) {
      const double* h_row = tape.hidden.row(i);
      for (int j = 0; j < t_frames; ++j) {
        const double* dy_row = upstream_expanded.row(j);
        double acc = 0.0;
        for (int d = 0; d < dim; ++d) acc += dy_row[d] * h_row[d];
        upstream_s(i, j) = acc;
      }
    }
    for (int i = 0; i < n; ++i) {
      double* dh_row = grads.hidden_grad.row(i);
      for (int j = 0; j < t_frames; ++j) {
        const double w = tape.attention.s(i, j);
        const double* dy_row = upstream_expanded.row(j);
        for (int d = 0; d < dim; ++d) dh_row[d] += w * dy_row[d];
      }
    }
  }

  const AttentionBackward att = backward_attention(
      tape.length, tape.cumulative, tape.attention, upstream_s);
  Matrix upstream_l =
      backward_cumulative(tape.length, tape.cumulative, att.cumulative_grad);
  for (std::size_t k = 0; k < upstream_l.size(); ++k) {
    upstream_l.data()[k] += att.length_grad.data()[k];
  }
  if (has_expected) {
    for (int i = 0; i < n; ++i) {
      for (int m = 1; m <= max_dur; ++m) {
        upstream_l(i, m) += m * upstream_expected[i];
      }
    }
  }

  const Matrix upstream_p =
      backward_length_probability(tape.params, tape.length, upstream_l);
  grads.logits_grad = Matrix(n, max_dur, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < max_dur; ++m) {
      const double p = tape.params.p(i, m);
      grads.logits_grad(i, m) =
          was_clamped(p) ? 0.0 : upstream_p(i, m) * p * (1.0 - p);
    }
  }
  return grads;
}

GradCheckReport finite_difference_check(
    const std::function<double(const std::vector<double>&)>& forward,
    const std::vector<double>& x0, const std::vector<double>& analytic,
    double epsilon, double tolerance) {
  if (x0.size() != analytic.size()) {
    throw std::invalid_argument(
        "finite_difference_check: analytic gradient length mismatch");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("finite_difference_check: epsilon must be > 0");
  }
  GradCheckReport report;
  report.epsilon = epsilon;
  std::vector<double> x = x0;
  for (std::size_t k = 0; k < x0.size(); ++k) {
    x[k] = x0[k] + epsilon;
    const double f_plus = forward(x);
    x[k] = x0[k] - epsilon;
    const double f_minus = forward(x);
    x[k] = x0[k];
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      report.max_abs_error = std::numeric_limits<double>::infinity();
      report.max_rel_error = std::numeric_limits<double>::infinity();
      report.worst_index = static_cast<int>(k);
      report.pass = false;
      return report;
    }
    const double numeric = (f_plus - f_minus) / (2.0 * epsilon);
    const double abs_err = std::abs(analytic[k] - numeric);
    // Combined tolerance: rel_err <= tol is |a - n| <= tol*(kFdAbsFloor +
    // max(|a|, |n|)). The floor keeps coordinates below the roundoff
    // resolution of central differences (~ulp(f)/eps) from dominating the
    // report while an absolute discrepancy above tol*kFdAbsFloor still fails.
    const double rel_err =
        abs_err /
        (std::max(std::abs(analytic[k]), std::abs(numeric)) + kFdAbsFloor);
    report.max_abs_error = std::max(report.max_abs_error, abs_err);
    if (rel_err > report.max_rel_error) {
      report.max_rel_error = rel_err;
      report.worst_index = static_cast<int>(k);
      report.worst_analytic = analytic[k];
      report.worst_numeric = numeric;
    }
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

namespace {

struct InstanceResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_check;
  GradCheckReport worst_report;
};

Matrix random_matrix(Rng& rng, int rows, int cols, double scale) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

Matrix to_logit_space(const DurationParams& params, const Matrix& grad_p) {
  Matrix grad(grad_p.rows(), grad_p.cols(), 0.0);
  for (int i = 0; i < grad_p.rows(); ++i) {
    for (int m = 0; m < grad_p.cols(); ++m) {
      const double p = params.p(i, m);
      if (!was_clamped(p)) grad(i, m) = grad_p(i, m) * p * (1.0 - p);
    }
  }
  return grad;
}

// All gradient checks for one random instance. Forward closures rebuild the
// pipeline from scratch at the perturbed point (noise is off; a fixed noise
// draw is just a shift of the logits, so this loses no generality).
InstanceResult check_instance(double epsilon, double tolerance,
                              std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::for_instance(seed, index);
  const int n = rng.uniform_int(1, 4);
  const int max_dur = rng.uniform_int(1, 5);
  const int t_frames = rng.uniform_int(1, 10);
  const int dim = rng.uniform_int(1, 3);

  const Matrix logits = random_matrix(rng, n, max_dur, 2.0);
  const Matrix hidden = random_matrix(rng, n, dim, 1.0);
  const Matrix weight_l = random_matrix(rng, n, max_dur + 1, 1.0);
  const Matrix weight_q = random_matrix(rng, n, t_frames + 2, 1.0);
  const Matrix weight_s = random_matrix(rng, n, t_frames, 1.0);

  Rng unused(0);
  const AlignResult tape = align(logits, hidden, t_frames, 0.0, unused);

  InstanceResult result;
  auto note = [&result](const GradCheckReport& report, const char* name) {
    result.max_abs_error = std::max(result.max_abs_error, report.max_abs_error);
    if (report.max_rel_error > result.max_rel_error) {
      result.max_rel_error = report.max_rel_error;
      result.worst_check = name;
      result.worst_report = report;
    }
  };

  auto forward_from = [&](const std::vector<double>& z, auto&& reduce) {
    Matrix z_mat(n, max_dur);
    z_mat.data() = z;
    Rng no_noise(0);
    return reduce(align(z_mat, hidden, t_frames, 0.0, no_noise));
  };

  const auto weighted_sum = [](const Matrix& values, const Matrix& weights) {
    double acc = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      acc += values.data()[k] * weights.data()[k];
    }
    return acc;
  };

  // d(sum w .* l)/d logits
  {
    const Matrix grad_p = backward_length_probability(
        tape.params, tape.length, weight_l);
    note(finite_difference_check(
             [&](const std::vector<double>& z) {
               return forward_from(z, [&](const AlignResult& r) {
                 return weighted_sum(r.length.l, weight_l);
               });
             },
             logits.data(), to_logit_space(tape.params, grad_p).data(),
             epsilon, tolerance),
         "length_probability");
  }

  // d(sum w .* q)/d logits
  {
    const Matrix grad_l =
        backward_cumulative(tape.length, tape.cumulative, weight_q);
    const Matrix grad_p =
        backward_length_probability(tape.params, tape.length, grad_l);
    note(finite_difference_check(
             [&](const std::vector<double>& z) {
               return forward_from(z, [&](const AlignResult& r) {
                 return weighted_sum(r.cumulative.q, weight_q);
               });
             },
             logits.data(), to_logit_space(tape.params, grad_p).data(),
             epsilon, tolerance),
         "cumulative_duration");
  }

  // d(sum w .* s)/d logits
  {
    const AttentionBackward att = backward_attention(
        tape.length, tape.cumulative, tape.attention, weight_s);
    Matrix grad_l =
        backward_cumulative(tape.length, tape.cumulative, att.cumulative_grad);
    for (std::size_t k = 0; k < grad_l.size(); ++k) {
      grad_l.data()[k] += att.length_grad.data()[k];
    }
    const Matrix grad_p =
        backward_length_probability(tape.params, tape.length, grad_l);
    note(finite_difference_check(
             [&](const std::vector<double>& z) {
               return forward_from(z, [&](const AlignResult& r) {
                 return weighted_sum(r.attention.s, weight_s);
               });
             },
             logits.data(), to_logit_space(tape.params, grad_p).data(),
             epsilon, tolerance),
         "attention_probability");
  }

  // d(sum y^2)/d logits and d(sum y^2)/d hidden through the whole pipeline
  {
    Matrix upstream_y = tape.expanded;
    for (double& v : upstream_y.data()) v *= 2.0;
    const AlignGradients grads = backward_align(tape, upstream_y, {});
    const auto sum_squares = [](const AlignResult& r) {
      double acc = 0.0;
      for (double v : r.expanded.data()) acc += v * v;
      return acc;
    };
    note(finite_difference_check(
             [&](const std::vector<double>& z) {
               return forward_from(z, sum_squares);
             },
             logits.data(), grads.logits_grad.data(), epsilon, tolerance),
         "expected_upsample/logits");
    note(finite_difference_check(
             [&](const std::vector<double>& h) {
               Matrix h_mat(n, dim);
               h_mat.data() = h;
               Rng no_noise(0);
               return sum_squares(align(logits, h_mat, t_frames, 0.0,
                                        no_noise));
             },
             hidden.data(), grads.hidden_grad.data(), epsilon, tolerance),
         "expected_upsample/hidden");
  }

  // d length_loss / d logits, both sides of the absolute value. The target
  // is placed at least two frames away from the current expected total so
  // the finite-difference probes stay on one branch of |.|.
  {
    double expected_total = 0.0;
    for (double v : tape.expected_durations) expected_total += v;
    std::vector<int> targets;
    targets.push_back(static_cast<int>(std::ceil(expected_total)) + 2);
    const int below = static_cast<int>(std::floor(expected_total)) - 2;
    if (below >= 0) targets.push_back(below);
    for (const int target : targets) {
      const std::vector<double> upstream_expected =
          length_loss_grad(tape.expected_durations, target);
      const AlignGradients grads =
          backward_align(tape, Matrix(), upstream_expected);
      note(finite_difference_check(
               [&](const std::vector<double>& z) {
                 return forward_from(z, [&](const AlignResult& r) {
                   return length_loss(r.expected_durations, target);
                 });
               },
               logits.data(), grads.logits_grad.data(), epsilon, tolerance),
           "length_loss");
    }
  }

  return result;
}

}  // namespace

GradCheckSuiteResult run_gradcheck_suite(int n_instances, double epsilon,
                                         std::uint64_t seed, int jobs,
                                         double tolerance) {
  if (n_instances < 1) {
    throw std::invalid_argument(
        "run_gradcheck_suite: n_instances must be >= 1");
  }
  std::vector<InstanceResult> results(n_instances);
  const int workers = std::max(1, jobs);
  if (workers == 1) {
    for (int k = 0; k < n_instances; ++k) {
      results[k] =
          check_instance(epsilon, tolerance, seed, static_cast<std::uint64_t>(k));
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int k = next.fetch_add(1); k < n_instances;
             k = next.fetch_add(1)) {
          results[k] = check_instance(epsilon, tolerance, seed,
                                      static_cast<std::uint64_t>(k));
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  GradCheckSuiteResult suite;
  suite.instances = n_instances;
  for (int k = 0; k < n_instances; ++k) {
    suite.max_abs_error = std::max(suite.max_abs_error, results[k].max_abs_error);
    if (results[k].max_rel_error > suite.max_rel_error) {
      suite.max_rel_error = results[k].max_rel_error;
      suite.worst_instance = k;
      suite.worst_check = results[k].worst_check;
      suite.worst_report = results[k].worst_report;
    }
  }
  suite.pass = suite.max_rel_error <= tolerance;
  return suite;
}

}  // namespace softalign
