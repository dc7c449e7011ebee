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
#ifndef DDLQR_ORACLE_HPP
#define DDLQR_ORACLE_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "ddlqr/common.hpp"
#include "ddlqr/qtheta.hpp"
#include "ddlqr/systems.hpp"

// Model-based ground truth. Nothing in here is reachable from the learners;
// tests and audits compare against it.

namespace ddlqr {

/// Stage cost x^T Q x + u^T R u with Q, R positive definite, and Qbar = diag(Q, R).
class CostWeights {
 public:
  CostWeights(Matrix Q, Matrix R) : Q_(std::move(Q)), R_(std::move(R)) {
    if (Q_.rows() < 1 || Q_.rows() != Q_.cols() || R_.rows() < 1 || R_.rows() != R_.cols()) {
      throw InvalidArgument("CostWeights: Q and R must be square and nonempty");
    }
    if (!is_symmetric(Q_, 1e-12) || !is_symmetric(R_, 1e-12)) {
      throw InvalidArgument("CostWeights: Q and R must be symmetric");
    }
    if (min_eigenvalue_symmetric(Q_) <= 0.0 || min_eigenvalue_symmetric(R_) <= 0.0) {
      throw InvalidArgument("CostWeights: Q and R must be positive definite");
    }
    Qbar_ = Matrix::Zero(n() + m(), n() + m());
    Qbar_.topLeftCorner(n(), n()) = Q_;
    Qbar_.bottomRightCorner(m(), m()) = R_;
  }

  static CostWeights identity(Index n, Index m) {
    return CostWeights(Matrix::Identity(n, n), Matrix::Identity(m, m));
  }

  const Matrix& Q() const noexcept { return Q_; }
  const Matrix& R() const noexcept { return R_; }
  const Matrix& Qbar() const noexcept { return Qbar_; }
  Index n() const noexcept { return Q_.rows(); }
  Index m() const noexcept { return R_.rows(); }

  /// Same weights multiplied by c > 0.
  CostWeights scaled(double c) const { return CostWeights(c * Q_, c * R_); }

 private:
  Matrix Q_;
  Matrix R_;
  Matrix Qbar_;
};

/**
 * Phi = [[A, B], [-KA, -KB]] = Kbar * S with Kbar = [I; -K] and S = [A B];
 * maps z_k to zeta_{k+1} = [x_{k+1}; -K x_{k+1}].
 */
class PhiMatrix {
 public:
  PhiMatrix(const LinearSystem& sys, const Gain& K) {
    if (K.m() != sys.m() || K.n() != sys.n()) {
      throw InvalidArgument("PhiMatrix: gain must be m x n");
    }
    matrix_ = kbar(K) * sys.S();
  }

  const Matrix& matrix() const noexcept { return matrix_; }

  static Matrix kbar(const Gain& K) {
    Matrix kb(K.n() + K.m(), K.n());
    kb << Matrix::Identity(K.n(), K.n()), -K.matrix();
    return kb;
  }

 private:
  Matrix matrix_;
};

/// Q + A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A.
inline Matrix riccati_map(const LinearSystem& sys, const CostWeights& w, const Matrix& P) {
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  const Matrix PA = P * A;
  const Matrix PB = P * B;
  const Matrix S = w.R() + B.transpose() * PB;
  const Matrix G = S.ldlt().solve(PB.transpose() * A);
  Matrix next = w.Q() + A.transpose() * PA - (A.transpose() * PB) * G;
  return 0.5 * (next + next.transpose());
}

/// Frobenius-norm DARE residual |Ric(P) - P| relative to max(1, |P|).
inline double dare_residual(const LinearSystem& sys, const CostWeights& w, const Matrix& P) {
  return (riccati_map(sys, w, P) - P).norm() / std::max(1.0, P.norm());
}

struct DareOptions {
  double tol = 1e-12;
  long max_iter = 1'000'000;
  /// Iterations without a new smallest step after which the recursion is
  /// considered stalled at its rounding floor.
  long stall_window = 2000;
  /// Return the stalled iterate (with a warning) instead of throwing.
  bool accept_stall = false;
};

/**
 * Stabilizing DARE solution by the fixed-point Riccati recursion P <- Ric(P)
 * from P_0 = Q.
 *
 * The recursion is carried out on a triangular factor P = U^T U: one QR of
 * [[R^{1/2}, 0], [U B, U A]] yields X with X^T X = A^T P A - A^T P B
 * (R + B^T P B)^{-1} B^T P A, and a second QR of [Q^{1/2}; X] gives the next
 * factor. Forming the subtraction explicitly loses monotonicity once |P|
 * grows past ~1e8, which happens for weakly controllable plants.
 *
 * The recursion converges linearly, so a small step alone does not bound the
 * distance to the fixed point. Iteration stops once both the step and the
 * geometric tail estimate step * q / (1 - q), with q the observed contraction
 * of consecutive steps, fall below tol * max(1, |P|); if the steps stop
 * shrinking at a rounding-level size the iterate is accepted as converged.
 */
inline Matrix solve_dare(const LinearSystem& sys, const CostWeights& w, DareOptions opts = {}) {
  if (w.n() != sys.n() || w.m() != sys.m()) {
    throw InvalidArgument("solve_dare: weight dimensions do not match the system");
  }
  const Index n = sys.n();
  const Index m = sys.m();
  const Matrix q_factor = w.Q().llt().matrixU();
  const Matrix r_factor = w.R().llt().matrixU();

  Matrix U = q_factor;
  Matrix P = w.Q();
  Matrix pre = Matrix::Zero(m + n, m + n);
  pre.topLeftCorner(m, m) = r_factor;
  Matrix stacked(2 * n, n);
  stacked.topRows(n) = q_factor;

  double prev_step = std::numeric_limits<double>::infinity();
  double best_step = std::numeric_limits<double>::infinity();
  long best_at = 0;
  constexpr double kFloor = 1e3 * std::numeric_limits<double>::epsilon();
  for (long it = 0; it < opts.max_iter; ++it) {
    pre.bottomLeftCorner(n, m) = U * sys.B();
    pre.bottomRightCorner(n, n) = U * sys.A();
    const Eigen::HouseholderQR<Matrix> qr(pre);
    stacked.bottomRows(n) = qr.matrixQR().bottomRightCorner(n, n).triangularView<Eigen::Upper>();
    const Eigen::HouseholderQR<Matrix> qr2(stacked);
    U = qr2.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Matrix next = U.transpose() * U;
    if (!next.allFinite()) {
      throw NumericalError("solve_dare: Riccati recursion diverged");
    }
    const double step = (next - P).norm() / std::max(1.0, next.norm());
    P = std::move(next);
    if (step <= opts.tol) {
      const double q = prev_step > 0.0 ? step / prev_step : 0.0;
      if (q < 1.0 && step * q / (1.0 - q) <= opts.tol) {
        return P;
      }
      if (q >= 1.0 && step <= kFloor) {
        return P;
      }
    }
    if (step < best_step) {
      best_step = step;
      best_at = it;
    } else if (it - best_at >= opts.stall_window) {
      if (opts.accept_stall) {
        spdlog::warn("solve_dare: recursion stalled at relative step {:.3e}, residual {:.3e}", best_step,
                     dare_residual(sys, w, P));
        return P;
      }
      throw NumericalError("solve_dare: recursion stalled at relative step " + std::to_string(best_step));
    }
    prev_step = step;
  }
  throw NumericalError("solve_dare: no convergence within " + std::to_string(opts.max_iter) + " iterations");
}

/// K* = (R + B^T P B)^{-1} B^T P A.
inline Gain lqr_gain(const LinearSystem& sys, const CostWeights& w, const Matrix& P) {
  const Matrix S = w.R() + sys.B().transpose() * P * sys.B();
  Eigen::FullPivLU<Matrix> lu(S);
  if (!lu.isInvertible()) {
    throw NumericalError("lqr_gain: R + B^T P B is singular");
  }
  return Gain(lu.solve(sys.B().transpose() * P * sys.A()));
}

/// Theta* = [[Q + A^T P A, A^T P B], [B^T P A, R + B^T P B]].
inline QTheta theta_star(const LinearSystem& sys, const CostWeights& w, const Matrix& P) {
  const Matrix S = sys.S();
  Matrix theta = w.Qbar() + S.transpose() * P * S;
  theta = 0.5 * (theta + theta.transpose());
  return QTheta(std::move(theta), sys.n());
}

/**
 * Unique solution of Theta = Qbar + Phi^T Theta Phi for Schur-stable Phi, by
 * solving (I - Phi^T (x) Phi^T) vec(Theta) = vec(Qbar) densely with one step of
 * iterative refinement.
 */
inline Matrix solve_dlyap(const Eigen::Ref<const Matrix>& Phi, const Eigen::Ref<const Matrix>& Qbar) {
  const Index d = Phi.rows();
  if (Phi.cols() != d || Qbar.rows() != d || Qbar.cols() != d) {
    throw InvalidArgument("solve_dlyap: dimension mismatch");
  }
  if (spectral_radius(Phi) >= 1.0) {
    throw PreconditionError("solve_dlyap: Phi is not Schur stable");
  }
  // Column-major vec: vec(Phi^T X Phi) = (Phi^T kron Phi^T) vec(X).
  const Matrix PhiT = Phi.transpose();
  Matrix L = Matrix::Identity(d * d, d * d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      L.block(i * d, j * d, d, d) -= PhiT(i, j) * PhiT;
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(Matrix(Qbar).data(), d * d);
  Eigen::PartialPivLU<Matrix> lu(L);
  Vector x = lu.solve(rhs);
  x += lu.solve(Vector(rhs - L * x));
  Matrix Theta = Eigen::Map<const Matrix>(x.data(), d, d);
  return 0.5 * (Theta + Theta.transpose());
}

inline QTheta solve_dlyap(const PhiMatrix& Phi, const CostWeights& w) {
  return QTheta(solve_dlyap(Phi.matrix(), w.Qbar()), w.n());
}

/// One policy-iteration step: Theta^{i+1} evaluates K^i, K^{i+1} improves on it.
struct PolicyIterate {
  QTheta theta;
  Gain gain;
};

/**
 * Model-based policy iteration: Theta^{i+1} = dlyap(Phi(K^i), Qbar), then
 * K^{i+1} = Theta_uu^{-1} Theta_ux. Entry j of the result holds
 * (Theta^{j+1}, K^{j+1}).
 */
inline std::vector<PolicyIterate> hewer_iteration(const LinearSystem& sys, const CostWeights& w, const Gain& K0,
                                                  int iters) {
  if (!is_schur_stable(closed_loop(sys, K0.matrix()))) {
    throw PreconditionError("hewer_iteration: K0 is not stabilizing");
  }
  std::vector<PolicyIterate> out;
  out.reserve(static_cast<std::size_t>(std::max(iters, 0)));
  Gain K = K0;
  for (int i = 0; i < iters; ++i) {
    QTheta theta = solve_dlyap(PhiMatrix(sys, K), w);
    K = policy_improvement(theta);
    out.push_back({std::move(theta), K});
  }
  return out;
}

/// Convenience bundle of the optimal quantities for one (sys, w) pair.
struct LqrSolution {
  Matrix P;
  Gain K;
  QTheta theta;
};

inline LqrSolution solve_lqr(const LinearSystem& sys, const CostWeights& w, DareOptions opts = {}) {
  Matrix P = solve_dare(sys, w, opts);
  Gain K = lqr_gain(sys, w, P);
  QTheta theta = theta_star(sys, w, P);
  return {std::move(P), std::move(K), std::move(theta)};
}

}  // namespace ddlqr

#endif  // DDLQR_ORACLE_HPP
