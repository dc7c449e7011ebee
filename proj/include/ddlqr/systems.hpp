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
#ifndef DDLQR_SYSTEMS_HPP
#define DDLQR_SYSTEMS_HPP

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddlqr/common.hpp"

namespace ddlqr {

/**
 * Discrete-time LTI plant x_{k+1} = A x_k + B u_k.
 *
 * Only the simulator and the model-based oracle look inside; the learners
 * receive trajectories.
 */
class LinearSystem {
 public:
  LinearSystem(Matrix A, Matrix B) : A_(std::move(A)), B_(std::move(B)) {
    if (A_.rows() < 1 || A_.rows() != A_.cols()) {
      throw InvalidArgument("LinearSystem: A must be square with n >= 1");
    }
    if (B_.rows() != A_.rows() || B_.cols() < 1) {
      throw InvalidArgument("LinearSystem: B must be n x m with m >= 1");
    }
  }

  const Matrix& A() const noexcept { return A_; }
  const Matrix& B() const noexcept { return B_; }
  Index n() const noexcept { return A_.rows(); }
  Index m() const noexcept { return B_.cols(); }

  /// S = [A B], the one-step map of the stacked vector z = [x; u].
  Matrix S() const {
    Matrix s(n(), n() + m());
    s << A_, B_;
    return s;
  }

 private:
  Matrix A_;
  Matrix B_;
};

/**
 * Paired input/state samples. `states` holds either as many entries as
 * `inputs` or one more (the successor of the last sample). An input-only
 * record has no states at all.
 */
class Trajectory {
 public:
  Trajectory() = default;

  Trajectory(std::vector<Vector> inputs, std::vector<Vector> states)
      : inputs_(std::move(inputs)), states_(std::move(states)) {
    if (!states_.empty() && states_.size() != inputs_.size() && states_.size() != inputs_.size() + 1) {
      throw InvalidArgument("Trajectory: states must have N or N+1 entries for N inputs");
    }
    if (!states_.empty()) {
      const Index nx = states_.front().size();
      for (const auto& x : states_) {
        if (x.size() != nx) {
          throw InvalidArgument("Trajectory: state vectors of unequal dimension");
        }
      }
    }
    if (!inputs_.empty()) {
      const Index nu = inputs_.front().size();
      for (const auto& u : inputs_) {
        if (u.size() != nu) {
          throw InvalidArgument("Trajectory: input vectors of unequal dimension");
        }
      }
    }
  }

  const std::vector<Vector>& inputs() const noexcept { return inputs_; }
  const std::vector<Vector>& states() const noexcept { return states_; }

  /// Number of input samples N.
  std::size_t size() const noexcept { return inputs_.size(); }
  /// True when the successor x_N of the last sample is recorded.
  bool has_successor() const noexcept { return states_.size() == inputs_.size() + 1; }

  Index n() const noexcept { return states_.empty() ? 0 : states_.front().size(); }
  Index m() const noexcept { return inputs_.empty() ? 0 : inputs_.front().size(); }

  /// Inputs as an m x N matrix.
  Matrix input_matrix() const { return columns_of(inputs_, 0, inputs_.size()); }
  /// States x_first .. x_{first+count-1} as an n x count matrix.
  Matrix state_matrix(std::size_t first, std::size_t count) const {
    return columns_of(states_, first, count);
  }

 private:
  std::vector<Vector> inputs_;
  std::vector<Vector> states_;
};

/// Runs the plant from x0 under the given inputs. The result carries N+1 states.
inline Trajectory simulate(const LinearSystem& sys, const Vector& x0, std::span<const Vector> inputs) {
  if (x0.size() != sys.n()) {
    throw InvalidArgument("simulate: x0 has dimension " + std::to_string(x0.size()) + ", expected " +
                          std::to_string(sys.n()));
  }
  std::vector<Vector> states;
  states.reserve(inputs.size() + 1);
  states.push_back(x0);
  for (const auto& u : inputs) {
    if (u.size() != sys.m()) {
      throw InvalidArgument("simulate: input has dimension " + std::to_string(u.size()) +
                            ", expected " + std::to_string(sys.m()));
    }
    states.push_back(sys.A() * states.back() + sys.B() * u);
  }
  return Trajectory(std::vector<Vector>(inputs.begin(), inputs.end()), std::move(states));
}

/// [B, AB, ..., A^{n-1}B].
inline Matrix controllability_matrix(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B) {
  const Index n = A.rows();
  const Index m = B.cols();
  Matrix C(n, n * m);
  Matrix block = B;
  for (Index k = 0; k < n; ++k) {
    C.middleCols(k * m, m) = block;
    block = A * block;
  }
  return C;
}

/**
 * Dimension of the reachable subspace of (A, B), i.e. the numerical rank of
 * [B, AB, ..., A^{n-1}B].
 *
 * Computed by an orthogonal staircase (block Arnoldi) sweep: each new block
 * A*Q_k is orthogonalized against the basis found so far and its numerical
 * rank decided by SVD. The explicit Krylov matrix spans tens of orders of
 * magnitude for unstable plants with n in the tens, so its singular values
 * cannot be trusted there.
 */
inline Index controllability_rank(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B) {
  const Index n = A.rows();
  Matrix AB(n, n + B.cols());
  AB << A, B;
  const double scale = std::max(spectral_norm(AB), std::numeric_limits<double>::min());
  const double tol = static_cast<double>(std::max(n, B.cols())) * std::numeric_limits<double>::epsilon() * scale;

  Matrix basis(n, 0);
  Matrix block = B;
  while (basis.cols() < n && block.cols() > 0) {
    for (int pass = 0; pass < 2; ++pass) {
      block -= basis * (basis.transpose() * block);
    }
    Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    const Index r = static_cast<Index>((sv.array() > tol).count());
    if (r == 0) {
      break;
    }
    Matrix fresh = svd.matrixU().leftCols(r);
    Matrix grown(n, basis.cols() + r);
    grown << basis, fresh;
    basis = std::move(grown);
    block = A * fresh;
  }
  return std::min(basis.cols(), n);
}

inline Index controllability_rank(const LinearSystem& sys) { return controllability_rank(sys.A(), sys.B()); }

/// Largest eigenvalue magnitude.
inline double spectral_radius(const Eigen::Ref<const Matrix>& M) {
  if (M.rows() != M.cols()) {
    throw InvalidArgument("spectral_radius: matrix must be square");
  }
  if (M.size() == 0) {
    return 0.0;
  }
  Eigen::EigenSolver<Matrix> es(M, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("spectral_radius: eigenvalue iteration did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool is_schur_stable(const Eigen::Ref<const Matrix>& M) { return spectral_radius(M) < 1.0; }

/// A - B K for the feedback law u = -K x.
inline Matrix closed_loop(const LinearSystem& sys, const Eigen::Ref<const Matrix>& K) {
  if (K.rows() != sys.m() || K.cols() != sys.n()) {
    throw InvalidArgument("closed_loop: gain must be m x n");
  }
  return sys.A() - sys.B() * K;
}

inline constexpr int kMaxSystemDraws = 100;

/// Entries of A and B uniform in [-1, 1], redrawn until (A, B) is controllable.
inline LinearSystem random_controllable_system(Index n, Index m, Seed seed) {
  if (n < 1 || m < 1) {
    throw InvalidArgument("random_controllable_system: n and m must be >= 1");
  }
  auto rng = make_rng(seed, 0x5359u);
  for (int attempt = 0; attempt < kMaxSystemDraws; ++attempt) {
    Matrix A = uniform_matrix(n, n, -1.0, 1.0, rng);
    Matrix B = uniform_matrix(n, m, -1.0, 1.0, rng);
    if (controllability_rank(A, B) == n) {
      return LinearSystem(std::move(A), std::move(B));
    }
  }
  throw InternalError("random_controllable_system: no controllable draw within retry cap");
}

}  // namespace ddlqr

#endif  // DDLQR_SYSTEMS_HPP
