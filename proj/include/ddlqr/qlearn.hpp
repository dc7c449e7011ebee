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
#ifndef DDLQR_QLEARN_HPP
#define DDLQR_QLEARN_HPP

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "ddlqr/common.hpp"
#include "ddlqr/excitation.hpp"
#include "ddlqr/linops.hpp"
#include "ddlqr/oracle.hpp"
#include "ddlqr/qtheta.hpp"
#include "ddlqr/systems.hpp"

namespace ddlqr {

/// Number of distinct entries of the (n+m) x (n+m) kernel, (n+m)(n+m+1)/2.
inline constexpr Index eta_for(Index n, Index m) noexcept { return triangular_number(n + m); }

/**
 * The learner's entire view of the plant: eta + 1 stacked samples
 * z_k = [x_k; u_k] together with the measured successors x_{k+1}.
 *
 * Equations use k = 0 .. eta-1; sample eta only closes the last successor
 * when the data is one contiguous experiment.
 */
class LearningData {
 public:
  LearningData(Index n, Index m, Matrix z, Matrix x_next)
      : n_(n), m_(m), z_(std::move(z)), x_next_(std::move(x_next)) {
    if (n_ < 1 || m_ < 1) {
      throw InvalidArgument("LearningData: n and m must be >= 1");
    }
    if (z_.rows() != n_ + m_ || x_next_.rows() != n_) {
      throw InvalidArgument("LearningData: sample dimensions do not match n and m");
    }
    if (z_.cols() != eta() + 1 || x_next_.cols() != z_.cols()) {
      throw InvalidArgument("LearningData: expected eta + 1 = " + std::to_string(eta() + 1) +
                            " samples with successors, got " + std::to_string(z_.cols()));
    }
  }

  /// First eta + 1 samples of a trajectory whose successor states are recorded.
  static LearningData from_trajectory(const Trajectory& traj) {
    const Index n = traj.n();
    const Index m = traj.m();
    const auto count = static_cast<std::size_t>(eta_for(n, m) + 1);
    if (traj.size() < count || traj.states().size() < count + 1) {
      throw InvalidArgument("LearningData: trajectory needs eta + 1 = " + std::to_string(count) +
                            " samples plus a successor state");
    }
    Matrix z(n + m, static_cast<Index>(count));
    z.topRows(n) = traj.state_matrix(0, count);
    z.bottomRows(m) = columns_of(traj.inputs(), 0, count);
    return LearningData(n, m, std::move(z), traj.state_matrix(1, count));
  }

  Index n() const noexcept { return n_; }
  Index m() const noexcept { return m_; }
  Index eta() const noexcept { return eta_for(n_, m_); }
  const Matrix& z() const noexcept { return z_; }
  const Matrix& x_next() const noexcept { return x_next_; }

  /// [X0; U0] over all eta + 1 samples; rank n + m is the excitation certificate.
  bool has_full_rank_samples() const { return numerical_rank_column_scaled(z_) == n_ + m_; }
  bool has_no_parallel_pairs() const { return no_parallel_pairs(z_); }

 private:
  Index n_;
  Index m_;
  Matrix z_;
  Matrix x_next_;
};

/**
 * How the excitation experiment is run.
 *
 * The operator restarts the plant from a fresh uniform [-1, 1] state whenever
 * the measured state exceeds `reset_threshold` in the max-norm. Open-loop
 * data from an unstable plant otherwise grows geometrically and the regressor
 * loses all accuracy long before overflow. Every recorded pair still
 * satisfies x_next = A x + B u. An infinite threshold records one contiguous
 * trajectory.
 */
struct CollectionOptions {
  double reset_threshold = 2.0;
};

inline constexpr int kMaxCollectionAttempts = 20;

/**
 * Runs the excitation experiment required by the Q-learning iteration:
 * a uniform input, persistently exciting of order n + 1, applied for eta + 1
 * steps. The samples are certified (rank [X0; U0] = n + m) and checked for
 * parallel pairs, which only produces a warning.
 */
inline LearningData collect_learning_data(const LinearSystem& sys, const Vector& x0, Seed seed,
                                          CollectionOptions opts = {}) {
  const Index n = sys.n();
  const Index m = sys.m();
  const Index eta = eta_for(n, m);
  const Index N = eta + 1;
  if (N < min_pe_length(m, n + 1)) {
    throw InvalidArgument("collect_learning_data: eta + 1 samples cannot be exciting of order n + 1");
  }
  if (x0.size() != n) {
    throw InvalidArgument("collect_learning_data: x0 has wrong dimension");
  }
  for (int attempt = 0; attempt < kMaxCollectionAttempts; ++attempt) {
    const Seed s = attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt));
    const std::vector<Vector> u = generate_pe_input(m, n + 1, N, s);
    auto reset_rng = make_rng(s, 0x5253u);

    Matrix z(n + m, N);
    Matrix x_next(n, N);
    Vector x = x0;
    for (Index k = 0; k < N; ++k) {
      if (x.cwiseAbs().maxCoeff() > opts.reset_threshold) {
        x = uniform_vector(n, -1.0, 1.0, reset_rng);
      }
      z.col(k) << x, u[static_cast<std::size_t>(k)];
      x = sys.A() * x + sys.B() * u[static_cast<std::size_t>(k)];
      x_next.col(k) = x;
    }
    if (!z.allFinite() || !x_next.allFinite()) {
      throw NumericalError("collect_learning_data: states overflowed; use a reset threshold");
    }
    LearningData data(n, m, std::move(z), std::move(x_next));
    if (!data.has_full_rank_samples()) {
      spdlog::debug("collect_learning_data: rank certificate failed on attempt {}", attempt);
      continue;
    }
    if (!data.has_no_parallel_pairs()) {
      spdlog::warn("collect_learning_data: two samples z_k are (nearly) parallel");
    }
    return data;
  }
  throw InternalError("collect_learning_data: excitation certificate failed within retry cap");
}

/// V (eta x eta) with columns z~_k - zeta~_{k+1}, and C_k = z_k^T Qbar z_k.
struct Regressor {
  Matrix V;
  Vector C;
};

inline Regressor build_regressor(const LearningData& data, const Gain& K, const CostWeights& w) {
  const Index n = data.n();
  const Index m = data.m();
  if (K.m() != m || K.n() != n || w.n() != n || w.m() != m) {
    throw InvalidArgument("build_regressor: dimension mismatch");
  }
  const Index eta = data.eta();
  Regressor reg{Matrix(eta, eta), Vector(eta)};
  Vector zeta(n + m);
  Vector zt(eta);
  for (Index k = 0; k < eta; ++k) {
    const auto zk = data.z().col(k);
    const auto xn = data.x_next().col(k);
    zeta << xn, -K.matrix() * xn;
    quad_monomials_into(zk, reg.V.col(k));
    quad_monomials_into(zeta, zt);
    reg.V.col(k) -= zt;
    reg.C(k) = zk.dot(w.Qbar() * zk);
  }
  return reg;
}

/// Regressor condition number above which the evaluation is refused.
inline constexpr double kMaxRegressorCondition = 1e12;

class SingularRegressorError : public NumericalError {
 public:
  SingularRegressorError(const std::string& what, int iteration, double condition)
      : NumericalError(what), iteration_(iteration), condition_(condition) {}
  /// Iteration at which the failure occurred, -1 outside run_qlearning.
  int iteration() const noexcept { return iteration_; }
  double condition() const noexcept { return condition_; }

 private:
  int iteration_;
  double condition_;
};

struct PolicyEvaluation {
  QTheta theta;
  /// 2-norm condition number of the row- and column-equilibrated V^T.
  double condition = 0.0;
  /// |V^T vec(Theta) - C| / |C|.
  double relative_residual = 0.0;
};

/**
 * Solves V^T vec(Theta) = C for the kernel of the Q-function of K.
 *
 * Each equation is homogeneous of degree two in the sample, so rows and then
 * columns are rescaled to unit max-norm. The condition test uses the singular
 * values of the equilibrated system; the solve is a partially pivoted LU with
 * one step of iterative refinement.
 */
inline PolicyEvaluation policy_evaluation(const LearningData& data, const Gain& K, const CostWeights& w) {
  const Regressor reg = build_regressor(data, K, w);
  const Index eta = data.eta();
  const double inf = std::numeric_limits<double>::infinity();

  Matrix M = reg.V.transpose();
  Vector rhs = reg.C;
  for (Index k = 0; k < eta; ++k) {
    const double s = M.row(k).cwiseAbs().maxCoeff();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw SingularRegressorError("policy_evaluation: regressor has a zero or non-finite row", -1, inf);
    }
    M.row(k) /= s;
    rhs(k) /= s;
  }
  Vector col_scale(eta);
  for (Index j = 0; j < eta; ++j) {
    const double s = M.col(j).cwiseAbs().maxCoeff();
    if (!(s > 0.0)) {
      throw SingularRegressorError("policy_evaluation: regressor has a zero column", -1, inf);
    }
    col_scale(j) = s;
    M.col(j) /= s;
  }

  const Vector sv = singular_values(M);
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? sv(0) / smin : inf;
  if (!(cond <= kMaxRegressorCondition)) {
    throw SingularRegressorError("policy_evaluation: regressor is numerically singular (condition " +
                                     std::to_string(cond) + ")",
                                 -1, cond);
  }
  Eigen::PartialPivLU<Matrix> lu(M);
  Vector y = lu.solve(rhs);
  y += lu.solve(Vector(rhs - M * y));
  const Vector theta = y.cwiseQuotient(col_scale);

  const double residual = (reg.V.transpose() * theta - reg.C).norm() / std::max(reg.C.norm(), 1e-300);
  Matrix Theta = unvec_sym(theta);
  Theta = 0.5 * (Theta + Theta.transpose());
  return {QTheta(std::move(Theta), data.n()), cond, residual};
}

/// Per-iteration observables of the Q-learning run.
struct IterationRecord {
  int iteration = 0;
  /// |K^{i+1} - K^i|_2.
  double gain_delta = 0.0;
  double cond_V = 0.0;
  double residual = 0.0;
  double min_eig_theta = 0.0;
  /// lambda_min(Theta^i - Theta^{i+1}); NaN at the first iteration.
  double monotone_gap = std::numeric_limits<double>::quiet_NaN();
  /// rho(A - B K^i) for the gain being evaluated; NaN without an audit system.
  double spectral_radius = std::numeric_limits<double>::quiet_NaN();
};

struct RunDiagnostics {
  std::vector<IterationRecord> records;
  /// Theta_uu of any iterate was not positive definite or Theta^{i+1} not PD.
  bool positive_definite_violation = false;
};

struct QLearningOptions {
  double eps = 1e-10;
  int max_iter = 50;
  /// Run exactly this many iterations regardless of eps.
  std::optional<int> fixed_iterations;
  /// True plant used only to fill IterationRecord::spectral_radius.
  std::optional<LinearSystem> audit;
};

struct QLearningResult {
  Gain gain;
  QTheta theta;
  RunDiagnostics diagnostics;
  /// (Theta^{i+1}, K^{i+1}) for every completed iteration.
  std::vector<PolicyIterate> iterates;
  int iterations = 0;
  bool converged = false;
  double wall_time_seconds = 0.0;
};

class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, QLearningResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const QLearningResult& partial() const noexcept { return partial_; }

 private:
  QLearningResult partial_;
};

/**
 * Off-policy Q-learning: alternate policy_evaluation and policy_improvement
 * on one fixed batch of data until |K^{i+1} - K^i|_2 <= eps. The plant is
 * never consulted except by the optional audit.
 */
inline QLearningResult run_qlearning(const LearningData& data, const Gain& K0, const CostWeights& w,
                                     const QLearningOptions& opts = {}) {
  if (K0.m() != data.m() || K0.n() != data.n()) {
    throw InvalidArgument("run_qlearning: K0 must be m x n");
  }
  const int limit = opts.fixed_iterations.value_or(opts.max_iter);
  if (limit < 1) {
    throw InvalidArgument("run_qlearning: iteration limit must be >= 1");
  }

  const auto start = std::chrono::steady_clock::now();
  QLearningResult result;
  Gain K = K0;
  std::optional<QTheta> previous;
  for (int i = 0; i < limit; ++i) {
    IterationRecord rec;
    rec.iteration = i + 1;
    if (opts.audit) {
      rec.spectral_radius = spectral_radius(closed_loop(*opts.audit, K.matrix()));
    }
    PolicyEvaluation eval;
    try {
      eval = policy_evaluation(data, K, w);
    } catch (const SingularRegressorError& e) {
      throw SingularRegressorError(std::string(e.what()) + " at iteration " + std::to_string(i + 1), i + 1,
                                   e.condition());
    }
    Gain next;
    try {
      next = policy_improvement(eval.theta);
    } catch (const ImprovementError& e) {
      throw ImprovementError(std::string(e.what()) + " at iteration " + std::to_string(i + 1));
    }
    rec.cond_V = eval.condition;
    rec.residual = eval.relative_residual;
    rec.min_eig_theta = eval.theta.min_eigenvalue();
    if (previous) {
      rec.monotone_gap = min_eigenvalue_symmetric(previous->matrix() - eval.theta.matrix());
    }
    if (rec.min_eig_theta <= 0.0) {
      result.diagnostics.positive_definite_violation = true;
    }
    rec.gain_delta = gain_distance(next, K);
    result.diagnostics.records.push_back(rec);
    result.iterates.push_back({eval.theta, next});
    previous = eval.theta;
    K = next;
    result.iterations = i + 1;
    if (!opts.fixed_iterations && rec.gain_delta <= opts.eps) {
      result.converged = true;
      break;
    }
  }
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.gain = K;
  result.theta = result.iterates.back().theta;
  if (opts.fixed_iterations) {
    result.converged = result.diagnostics.records.back().gain_delta <= opts.eps;
    return result;
  }
  if (!result.converged) {
    throw ConvergenceFailure("run_qlearning: no convergence within " + std::to_string(limit) + " iterations",
                             std::move(result));
  }
  return result;
}

}  // namespace ddlqr

#endif  // DDLQR_QLEARN_HPP
