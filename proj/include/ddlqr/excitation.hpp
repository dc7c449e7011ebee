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
#ifndef DDLQR_EXCITATION_HPP
#define DDLQR_EXCITATION_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ddlqr/common.hpp"
#include "ddlqr/linops.hpp"
#include "ddlqr/systems.hpp"

namespace ddlqr {

/// Shortest input sequence whose depth-L Hankel matrix can have full row rank mL.
inline constexpr Index min_pe_length(Index m, Index L) noexcept { return (m + 1) * L - 1; }

/// True iff H_L(inputs) has numerical rank mL.
inline bool is_persistently_exciting(std::span<const Vector> inputs, Index L) {
  if (L < 1) {
    throw InvalidArgument("is_persistently_exciting: order L must be >= 1");
  }
  const auto N = static_cast<Index>(inputs.size());
  if (N == 0) {
    return false;
  }
  const Index m = inputs.front().size();
  if (N < L || N < min_pe_length(m, L)) {
    return false;
  }
  return numerical_rank(hankel(inputs, L)) == m * L;
}

inline constexpr int kMaxExcitationDraws = 100;

/// Uniform [-1, 1] input of length N, redrawn until it is persistently exciting of order L.
inline std::vector<Vector> generate_pe_input(Index m, Index L, Index N, Seed seed) {
  if (m < 1 || L < 1) {
    throw InvalidArgument("generate_pe_input: m and L must be >= 1");
  }
  if (N < min_pe_length(m, L)) {
    throw InvalidArgument("generate_pe_input: N = " + std::to_string(N) + " is below (m+1)L-1 = " +
                          std::to_string(min_pe_length(m, L)));
  }
  auto rng = make_rng(seed, 0x5045u);
  for (int attempt = 0; attempt < kMaxExcitationDraws; ++attempt) {
    std::vector<Vector> u;
    u.reserve(static_cast<std::size_t>(N));
    for (Index k = 0; k < N; ++k) {
      u.push_back(uniform_vector(m, -1.0, 1.0, rng));
    }
    if (is_persistently_exciting(u, L)) {
      return u;
    }
  }
  throw InternalError("generate_pe_input: no persistently exciting draw within retry cap");
}

/**
 * Stacked data matrix [H_1(x); H_L(u)] with N - L + 1 columns, built from the
 * first N samples of the trajectory.
 */
inline Matrix willems_matrix(const Trajectory& traj, Index L) {
  const auto N = static_cast<Index>(traj.size());
  if (L < 1 || L > N) {
    throw InvalidArgument("willems_matrix: depth L must lie in [1, N]");
  }
  if (traj.states().size() < traj.size()) {
    throw InvalidArgument("willems_matrix: trajectory lacks states");
  }
  const Index cols = N - L + 1;
  const Matrix hx = traj.state_matrix(0, static_cast<std::size_t>(cols));
  const Matrix hu = hankel(traj.inputs(), L);
  Matrix stacked(hx.rows() + hu.rows(), cols);
  stacked << hx, hu;
  return stacked;
}

/// rank [H_1(x); H_L(u)] == Lm + n. Columns are normalized first so that
/// exponentially growing states do not swamp the input rows.
inline bool check_willems_rank(const Trajectory& traj, Index L) {
  const Matrix W = willems_matrix(traj, L);
  return numerical_rank_column_scaled(W) == L * traj.m() + traj.n();
}

struct TrajectoryFit {
  Vector alpha;
  double residual = 0.0;
  bool feasible = false;
};

/**
 * Least-squares alpha with [H_L(x); H_L(u)] alpha = [x_bar; u_bar]. The target
 * is a system trajectory iff the residual vanishes, which is decided against
 * 1e-8 * (1 + |target|).
 */
inline TrajectoryFit trajectory_from_data(const Trajectory& traj, Index L, std::span<const Vector> target_x,
                                          std::span<const Vector> target_u) {
  if (static_cast<Index>(target_x.size()) != L || static_cast<Index>(target_u.size()) != L) {
    throw InvalidArgument("trajectory_from_data: targets must have length L");
  }
  const auto N = static_cast<Index>(traj.size());
  if (L < 1 || L > N) {
    throw InvalidArgument("trajectory_from_data: depth L must lie in [1, N]");
  }
  const Index n = traj.n();
  const Index m = traj.m();
  for (std::size_t k = 0; k < target_x.size(); ++k) {
    if (target_x[k].size() != n || target_u[k].size() != m) {
      throw InvalidArgument("trajectory_from_data: target dimension mismatch");
    }
  }
  const std::span<const Vector> states(traj.states().data(), traj.size());
  const Matrix Hx = hankel(states, L);
  const Matrix Hu = hankel(traj.inputs(), L);
  Matrix H(Hx.rows() + Hu.rows(), Hx.cols());
  H << Hx, Hu;

  Vector target(H.rows());
  for (Index k = 0; k < L; ++k) {
    target.segment(k * n, n) = target_x[static_cast<std::size_t>(k)];
    target.segment(L * n + k * m, m) = target_u[static_cast<std::size_t>(k)];
  }

  TrajectoryFit fit;
  fit.alpha = H.completeOrthogonalDecomposition().solve(target);
  fit.residual = (H * fit.alpha - target).norm();
  fit.feasible = fit.residual <= 1e-8 * (1.0 + target.norm());
  return fit;
}

inline constexpr double kParallelAngleTolerance = 1e-8;

/// Smallest angle (radians, in [0, pi/2]) between the lines spanned by any two columns.
inline double min_pair_angle(const Eigen::Ref<const Matrix>& Z) {
  const Index count = Z.cols();
  double best = M_PI / 2;
  Matrix unit = Z;
  for (Index k = 0; k < count; ++k) {
    const double nrm = unit.col(k).norm();
    if (nrm == 0.0) {
      return 0.0;
    }
    unit.col(k) /= nrm;
  }
  for (Index a = 0; a < count; ++a) {
    for (Index b = a + 1; b < count; ++b) {
      const double c = std::abs(unit.col(a).dot(unit.col(b)));
      const double s = (unit.col(a) - (unit.col(a).dot(unit.col(b))) * unit.col(b)).norm();
      best = std::min(best, std::atan2(s, c));
    }
  }
  return best;
}

/// No z_k = [x_k; u_k] is a multiple of another (angles above 1e-8 rad).
inline bool no_parallel_pairs(const Eigen::Ref<const Matrix>& Z) {
  return min_pair_angle(Z) > kParallelAngleTolerance;
}

inline bool no_parallel_pairs(const Trajectory& traj) {
  const auto N = traj.size();
  const Matrix X = traj.state_matrix(0, N);
  const Matrix U = traj.input_matrix();
  Matrix Z(X.rows() + U.rows(), static_cast<Index>(N));
  Z << X, U;
  return no_parallel_pairs(Z);
}

}  // namespace ddlqr

#endif  // DDLQR_EXCITATION_HPP
