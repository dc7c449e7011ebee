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
#ifndef DDLQR_QTHETA_HPP
#define DDLQR_QTHETA_HPP

#include <string>
#include <utility>

#include "ddlqr/common.hpp"

namespace ddlqr {

/// State feedback gain K (m x n) for the law u = -K x.
class Gain {
 public:
  Gain() = default;
  explicit Gain(Matrix K) : K_(std::move(K)) {
    if (!K_.allFinite()) {
      throw InvalidArgument("Gain: entries must be finite");
    }
  }

  const Matrix& matrix() const noexcept { return K_; }
  Index m() const noexcept { return K_.rows(); }
  Index n() const noexcept { return K_.cols(); }

  static Gain zero(Index m, Index n) { return Gain(Matrix::Zero(m, n)); }

 private:
  Matrix K_;
};

/// Spectral norm of K1 - K2.
inline double gain_distance(const Gain& a, const Gain& b) { return spectral_norm(a.matrix() - b.matrix()); }

/// Thrown when Theta_uu cannot be inverted during policy improvement.
class ImprovementError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/**
 * Symmetric (n+m) x (n+m) kernel of the Q-function Q(x, u) = z^T Theta z,
 * z = [x; u], partitioned as [[Theta_xx, Theta_ux^T], [Theta_ux, Theta_uu]].
 */
class QTheta {
 public:
  QTheta() = default;

  QTheta(Matrix theta, Index n) : theta_(std::move(theta)), n_(n) {
    if (theta_.rows() != theta_.cols() || n_ < 1 || n_ >= theta_.rows()) {
      throw InvalidArgument("QTheta: kernel must be (n+m) x (n+m) with n, m >= 1");
    }
    if (!theta_.allFinite()) {
      throw NumericalError("QTheta: kernel has non-finite entries");
    }
    if (!is_symmetric(theta_, 1e-10)) {
      throw InvalidArgument("QTheta: kernel is not symmetric");
    }
  }

  const Matrix& matrix() const noexcept { return theta_; }
  Index n() const noexcept { return n_; }
  Index m() const noexcept { return theta_.rows() - n_; }

  auto theta_xx() const { return theta_.topLeftCorner(n_, n_); }
  auto theta_ux() const { return theta_.bottomLeftCorner(m(), n_); }
  auto theta_uu() const { return theta_.bottomRightCorner(m(), m()); }

  double min_eigenvalue() const { return min_eigenvalue_symmetric(theta_); }
  bool is_positive_definite() const { return min_eigenvalue() > 0.0; }

 private:
  Matrix theta_;
  Index n_ = 0;
};

/**
 * Minimizer of z^T Theta z over u: K = Theta_uu^{-1} Theta_ux, so that the
 * improved law is u = -K x.
 */
inline Gain policy_improvement(const QTheta& theta) {
  const Matrix uu = theta.theta_uu();
  Eigen::FullPivLU<Matrix> lu(uu);
  lu.setThreshold(1e-14);
  if (!lu.isInvertible()) {
    throw ImprovementError("policy_improvement: Theta_uu is singular");
  }
  Matrix K = lu.solve(Matrix(theta.theta_ux()));
  if (!K.allFinite()) {
    throw ImprovementError("policy_improvement: non-finite gain");
  }
  return Gain(std::move(K));
}

}  // namespace ddlqr

#endif  // DDLQR_QTHETA_HPP
