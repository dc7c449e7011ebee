/*
 Copyright 2026 The ddlqr Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DDLQR_ROBUSTNESS_HPP
#define DDLQR_ROBUSTNESS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "ddlqr/common.hpp"
#include "ddlqr/deadbeat.hpp"
#include "ddlqr/linops.hpp"
#include "ddlqr/oracle.hpp"
#include "ddlqr/qlearn.hpp"
#include "ddlqr/qtheta.hpp"
#include "ddlqr/systems.hpp"

// Learning from state measurements chi_k = x_k + w_k corrupted by bounded
// noise, plus the computable conditions under which the noisy iteration
// still returns stabilizing gains.

namespace ddlqr {

enum class NoiseKind { kUniform, kGaussian };

/**
 * Measured samples together with the noise that produced them. The noise is
 * kept for instrumented runs only; the learner sees `measured()`.
 *
 * `w_z` holds the noise on the state part of each z_k and `w_next` the noise
 * on each successor measurement. When a successor is the state of the next
 * sample it is one physical measurement and carries the same noise.
 */
class NoisyData {
 public:
  NoisyData(LearningData measured, Matrix w_z, Matrix w_next, double w_max)
      : measured_(std::move(measured)), w_z_(std::move(w_z)), w_next_(std::move(w_next)), w_max_(w_max) {
    const Index n = measured_.n();
    const Index cols = measured_.z().cols();
    if (w_z_.rows() != n || w_z_.cols() != cols || w_next_.rows() != n || w_next_.cols() != cols) {
      throw InvalidArgument("NoisyData: noise dimensions do not match the samples");
    }
  }

  const LearningData& measured() const noexcept { return measured_; }
  const Matrix& w_z() const noexcept { return w_z_; }
  const Matrix& w_next() const noexcept { return w_next_; }
  double w_max() const noexcept { return w_max_; }

 private:
  LearningData measured_;
  Matrix w_z_;
  Matrix w_next_;
  double w_max_;
};

namespace detail {

template <class Rng>
Vector draw_noise(Index n, double w_max, NoiseKind kind, Rng& rng) {
  Vector w(n);
  if (kind == NoiseKind::kUniform) {
    std::uniform_real_distribution<double> dist(-w_max, w_max);
    for (Index i = 0; i < n; ++i) {
      w(i) = dist(rng);
    }
  } else {
    // Three-sigma normal, clipped so the componentwise bound still holds.
    std::normal_distribution<double> dist(0.0, w_max / 3.0);
    for (Index i = 0; i < n; ++i) {
      w(i) = std::clamp(dist(rng), -w_max, w_max);
    }
  }
  return w;
}

}  // namespace detail

/// Perturbs every state measurement with noise of max-norm at most w_max. Inputs are untouched.
inline NoisyData add_noise(const LearningData& clean, double w_max, Seed seed,
                           NoiseKind kind = NoiseKind::kUniform) {
  if (!(w_max >= 0.0) || !std::isfinite(w_max)) {
    throw InvalidArgument("add_noise: w_max must be finite and >= 0");
  }
  const Index n = clean.n();
  const Index cols = clean.z().cols();
  Matrix w_z = Matrix::Zero(n, cols);
  Matrix w_next = Matrix::Zero(n, cols);
  if (w_max == 0.0) {
    return NoisyData(clean, std::move(w_z), std::move(w_next), 0.0);
  }
  auto rng = make_rng(seed, 0x4e5au);
  for (Index k = 0; k < cols; ++k) {
    w_z.col(k) = detail::draw_noise(n, w_max, kind, rng);
  }
  for (Index k = 0; k < cols; ++k) {
    const bool continues = k + 1 < cols && clean.x_next().col(k) == clean.z().col(k + 1).head(n);
    w_next.col(k) = continues ? Vector(w_z.col(k + 1)) : detail::draw_noise(n, w_max, kind, rng);
  }
  Matrix z = clean.z();
  z.topRows(n) += w_z;
  Matrix x_next = clean.x_next() + w_next;
  return NoisyData(LearningData(n, clean.m(), std::move(z), std::move(x_next)), std::move(w_z),
                   std::move(w_next), w_max);
}

/// The noisy learner is the clean-data learner run on the measurements.
inline QLearningResult run_qlearning_noisy(const NoisyData& data, const Gain& K0, const CostWeights& w,
                                           const QLearningOptions& opts = {}) {
  return run_qlearning(data.measured(), K0, w, opts);
}

/// wbar_k = w_{k+1} - A w_k for k = 0 .. len-2 of a contiguous noise sequence.
inline std::vector<Vector> noise_increments(std::span<const Vector> w, const Matrix& A) {
  std::vector<Vector> out;
  if (w.size() < 2) {
    return out;
  }
  out.reserve(w.size() - 1);
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    if (w[k].size() != A.cols() || w[k + 1].size() != A.rows()) {
      throw InvalidArgument("noise_increments: noise dimension does not match A");
    }
    out.emplace_back(w[k + 1] - A * w[k]);
  }
  return out;
}

/// Column k is w_next_k - A w_z_k, the noise seen by equation k.
inline Matrix noise_increments(const NoisyData& data, const Matrix& A) {
  if (A.rows() != data.measured().n() || A.cols() != data.measured().n()) {
    throw InvalidArgument("noise_increments: A does not match the data");
  }
  return data.w_next() - A * data.w_z();
}

/// eps = wbar^T Kbar^T Theta Kbar wbar + 2 zhat^T S^T Kbar^T Theta Kbar wbar.
inline double epsilon_term(const QTheta& theta_hat, const Gain& K, const Vector& z_hat, const Vector& wbar,
                           const Matrix& S) {
  const Index n = K.n();
  if (theta_hat.n() != n || theta_hat.m() != K.m() || wbar.size() != n || S.rows() != n ||
      S.cols() != n + K.m() || z_hat.size() != n + K.m()) {
    throw InvalidArgument("epsilon_term: dimension mismatch");
  }
  const Matrix kbar = PhiMatrix::kbar(K);
  const Vector tw = theta_hat.matrix() * (kbar * wbar);
  const Vector kbar_s_z = kbar * (S * z_hat);
  return (kbar * wbar).dot(tw) + 2.0 * kbar_s_z.dot(tw);
}

/// Eta x eta matrix whose columns are quad_monomials(zhat_k), k < eta.
inline Matrix monomial_matrix(const LearningData& data) {
  const Index eta = data.eta();
  Matrix V(eta, eta);
  for (Index k = 0; k < eta; ++k) {
    quad_monomials_into(data.z().col(k), V.col(k));
  }
  return V;
}

/// Spectral norm of the inverse of the monomial matrix, 1 / sigma_min.
inline double monomial_inverse_norm(const LearningData& data) {
  const Vector sv = singular_values(monomial_matrix(data));
  const double smin = sv(sv.size() - 1);
  if (!(smin > rank_tolerance(Matrix(1, sv.size()), sv(0)))) {
    throw SingularRegressorError("monomial_inverse_norm: monomial matrix is singular", -1,
                                 std::numeric_limits<double>::infinity());
  }
  return 1.0 / smin;
}

/**
 * Valid 2-norm bound on wbar_k when only bounds are known. The componentwise
 * bound w_max gives |w_k|_2 <= sqrt(n) w_max.
 */
inline double conservative_wbar_bound(double a_norm_bound, double w_max, Index n) {
  return (1.0 + a_norm_bound) * std::sqrt(static_cast<double>(n)) * w_max;
}

struct MarginResult {
  double lhs = 0.0;
  bool ok = true;
};

namespace detail {

inline MarginResult margin_from_factor(const LearningData& data, double factor, double s_norm_bound,
                                       std::span<const double> wbar_bounds, const CostWeights& w) {
  const Index eta = data.eta();
  if (static_cast<Index>(wbar_bounds.size()) < eta) {
    throw InvalidArgument("stability_margin: need one wbar bound per equation (" + std::to_string(eta) + ")");
  }
  if (w.n() != data.n() || w.m() != data.m()) {
    throw InvalidArgument("stability_margin: weight dimensions do not match the data");
  }
  double sum = 0.0;
  for (Index k = 0; k < eta; ++k) {
    const double wb = wbar_bounds[static_cast<std::size_t>(k)];
    sum += factor * wb * wb + 2.0 * s_norm_bound * factor * data.z().col(k).norm() * wb;
  }
  MarginResult r;
  if (sum == 0.0) {
    r.lhs = 0.0;
  } else {
    r.lhs = std::sqrt(static_cast<double>(eta)) * monomial_inverse_norm(data) * sum;
  }
  r.ok = r.lhs < min_eigenvalue_symmetric(w.Qbar());
  return r;
}

}  // namespace detail

/**
 * Sufficient condition for K^{i+1} to stabilize the true plant:
 * sqrt(eta) |Vhat^{-1}| sum_k (|Theta| |Kbar|^2 |wbar_k|^2 + 2 |S| |Theta| |Kbar|^2 |zhat_k| |wbar_k|)
 * < lambda_min(Qbar), with Theta = Thetahat^{i+1} and Kbar = [I; -K^i].
 */
inline MarginResult stability_margin(const NoisyData& data, const QTheta& theta_hat, const Gain& K,
                                     double s_norm_bound, std::span<const double> wbar_bounds,
                                     const CostWeights& w) {
  const double kbar = spectral_norm(PhiMatrix::kbar(K));
  const double factor = spectral_norm(theta_hat.matrix()) * kbar * kbar;
  return detail::margin_from_factor(data.measured(), factor, s_norm_bound, wbar_bounds, w);
}

/// Gain-free variant using |Thetahat^1|_2^2; requires Qbar > I.
inline MarginResult stability_margin_refined(const NoisyData& data, const QTheta& theta_hat_1, double s_norm_bound,
                                             std::span<const double> wbar_bounds, const CostWeights& w) {
  if (!(min_eigenvalue_symmetric(w.Qbar()) > 1.0)) {
    throw PreconditionError("stability_margin_refined: requires lambda_min(Qbar) > 1");
  }
  const double t = spectral_norm(theta_hat_1.matrix());
  return detail::margin_from_factor(data.measured(), t * t, s_norm_bound, wbar_bounds, w);
}

struct NoisyExperimentOptions {
  Index n = 5;
  Index m = 2;
  double w_max = 1e-3;
  int trials = 100;
  int iterations = 10;
  Seed seed = 0;
  unsigned jobs = 1;
  NoiseKind kind = NoiseKind::kUniform;
  CollectionOptions collection{};
};

struct NoisyTrial {
  int trial = 0;
  Seed seed = 0;
  double error_norm = std::numeric_limits<double>::quiet_NaN();
  bool stabilizing = false;
  /// Largest margin lhs over the iterations, computed with the exact wbar.
  double margin_lhs = std::numeric_limits<double>::quiet_NaN();
  /// Margin condition held at every iteration.
  bool margin_ok = false;
  std::optional<std::string> failure;
};

struct NoisyStatistics {
  /// Over completed trials.
  double mean_error = std::numeric_limits<double>::quiet_NaN();
  double max_error = std::numeric_limits<double>::quiet_NaN();
  /// Over completed trials whose gain stabilizes the plant.
  double mean_error_stabilizing = std::numeric_limits<double>::quiet_NaN();
  int destabilized_count = 0;
  int failure_count = 0;
  std::vector<NoisyTrial> per_trial;
};

/// One trial of the noise study; failures are recorded, not thrown.
inline NoisyTrial noisy_trial(const NoisyExperimentOptions& opts, int trial) {
  NoisyTrial out;
  out.trial = trial;
  out.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(trial));
  try {
    const LinearSystem sys = random_controllable_system(opts.n, opts.m, out.seed);
    const CostWeights w = CostWeights::identity(opts.n, opts.m);
    const LqrSolution lqr = solve_lqr(sys, w);
    auto rng = make_rng(out.seed, 0x5830u);
    const Vector x0 = uniform_vector(opts.n, -1.0, 1.0, rng);
    const LearningData clean = collect_learning_data(sys, x0, out.seed, opts.collection);
    const NoisyData noisy = add_noise(clean, opts.w_max, derive_seed(out.seed, 0x4e5au), opts.kind);
    const Gain K0 = deadbeat_from_data(noisy.measured());

    QLearningOptions qopts;
    qopts.fixed_iterations = opts.iterations;
    const QLearningResult res = run_qlearning_noisy(noisy, K0, w, qopts);
    out.error_norm = gain_distance(lqr.K, res.gain);
    out.stabilizing = is_schur_stable(closed_loop(sys, res.gain.matrix()));

    const Matrix wbar = noise_increments(noisy, sys.A());
    std::vector<double> wbar_norms(static_cast<std::size_t>(wbar.cols()));
    for (Index k = 0; k < wbar.cols(); ++k) {
      wbar_norms[static_cast<std::size_t>(k)] = wbar.col(k).norm();
    }
    const double s_norm = spectral_norm(sys.S());
    out.margin_lhs = 0.0;
    out.margin_ok = true;
    Gain K = K0;
    for (const PolicyIterate& it : res.iterates) {
      const MarginResult mr = stability_margin(noisy, it.theta, K, s_norm, wbar_norms, w);
      out.margin_lhs = std::max(out.margin_lhs, mr.lhs);
      out.margin_ok = out.margin_ok && mr.ok;
      K = it.gain;
    }
  } catch (const std::exception& e) {
    spdlog::info("noisy trial {} failed: {}", trial, e.what());
    out.failure = e.what();
    out.stabilizing = false;
    out.margin_ok = false;
  }
  return out;
}

/// Noise study over `trials` fresh random systems; trial t uses seed derive_seed(seed, t).
inline NoisyStatistics noisy_experiment(const NoisyExperimentOptions& opts) {
  if (opts.n < 1 || opts.m < 1 || opts.trials < 1 || opts.iterations < 1 || !(opts.w_max >= 0.0)) {
    throw InvalidArgument("noisy_experiment: parameters must be positive");
  }
  NoisyStatistics stats;
  stats.per_trial.resize(static_cast<std::size_t>(opts.trials));
  parallel_for(stats.per_trial.size(), opts.jobs,
               [&](std::size_t t) { stats.per_trial[t] = noisy_trial(opts, static_cast<int>(t)); });

  double sum = 0.0;
  double sum_stab = 0.0;
  int completed = 0;
  int stabilizing = 0;
  double max_error = 0.0;
  for (const NoisyTrial& t : stats.per_trial) {
    if (t.failure) {
      ++stats.failure_count;
      continue;
    }
    ++completed;
    sum += t.error_norm;
    max_error = std::max(max_error, t.error_norm);
    if (t.stabilizing) {
      ++stabilizing;
      sum_stab += t.error_norm;
    } else {
      ++stats.destabilized_count;
    }
  }
  if (completed > 0) {
    stats.mean_error = sum / completed;
    stats.max_error = max_error;
  }
  if (stabilizing > 0) {
    stats.mean_error_stabilizing = sum_stab / stabilizing;
  }
  return stats;
}

}  // namespace ddlqr

#endif  // DDLQR_ROBUSTNESS_HPP
