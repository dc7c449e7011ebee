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
#ifndef DDLQR_DEADBEAT_HPP
#define DDLQR_DEADBEAT_HPP

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "ddlqr/common.hpp"
#include "ddlqr/excitation.hpp"
#include "ddlqr/qlearn.hpp"
#include "ddlqr/qtheta.hpp"
#include "ddlqr/systems.hpp"

// Deadbeat state feedback designed from one batch of exciting data. The data
// define a fictitious pair (Abar, Bbar) whose feedback interconnection
// Abar - Bbar Hbar equals A - B K for the gain recovered from Hbar, so
// placing every eigenvalue of the fictitious loop at zero makes the real loop
// nilpotent without identifying A or B.

namespace ddlqr {

/// h0x = [x_0 .. x_{c-1}], h1x = [x_1 .. x_c], h0u = [u_0 .. u_{c-1}].
struct DataMatrices {
  Matrix h0x;
  Matrix h1x;
  Matrix h0u;
};

/// Samples needed by the deadbeat design: (m+1)(n+1) - 1.
inline constexpr Index min_deadbeat_samples(Index n, Index m) noexcept { return (m + 1) * (n + 1) - 1; }

inline DataMatrices data_matrices(const Trajectory& traj) {
  const Index n = traj.n();
  const Index m = traj.m();
  if (traj.states().size() < 2) {
    throw InvalidArgument("data_matrices: at least two states are required");
  }
  const std::size_t cols = traj.states().size() - 1;
  const auto samples = static_cast<Index>(cols + 1);
  if (samples < min_deadbeat_samples(n, m)) {
    throw InvalidArgument("data_matrices: N = " + std::to_string(samples) +
                          " samples, need N >= (m+1)(n+1)-1 = " + std::to_string(min_deadbeat_samples(n, m)));
  }
  return {traj.state_matrix(0, cols), traj.state_matrix(1, cols), columns_of(traj.inputs(), 0, cols)};
}

/// Pairwise form: every sample k contributes (x_k, u_k, x_next_k).
inline DataMatrices data_matrices(const LearningData& data) {
  return {data.z().topRows(data.n()), data.x_next(), data.z().bottomRows(data.m())};
}

/**
 * Scales column j of all three matrices by 1 / |[x_j; u_j]|. Every column
 * still satisfies x_next = A x + B u, and the design below only uses that
 * relation, so the gain stays valid while the pseudoinverse sees balanced
 * columns.
 */
inline DataMatrices normalize_columns(DataMatrices dm) {
  for (Index j = 0; j < dm.h0x.cols(); ++j) {
    const double s = std::hypot(dm.h0x.col(j).norm(), dm.h0u.col(j).norm());
    if (s > 0.0) {
      dm.h0x.col(j) /= s;
      dm.h1x.col(j) /= s;
      dm.h0u.col(j) /= s;
    }
  }
  return dm;
}

struct FictitiousSystem {
  Matrix Abar;  ///< n x n
  Matrix Bbar;  ///< n x g
  Matrix F;     ///< pseudoinverse of h0x
  Matrix G;     ///< orthonormal basis of ker h0x
};

inline FictitiousSystem fictitious_system(const Eigen::Ref<const Matrix>& h0x, const Eigen::Ref<const Matrix>& h1x) {
  if (h0x.rows() != h1x.rows() || h0x.cols() != h1x.cols()) {
    throw InvalidArgument("fictitious_system: h0x and h1x must have equal shape");
  }
  const Index n = h0x.rows();
  const Index c = h0x.cols();
  if (c < n) {
    throw RankError("fictitious_system: h0x has fewer columns than rows");
  }
  Eigen::BDCSVD<Matrix> svd(h0x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0 || sv(n - 1) <= rank_tolerance(h0x, sv(0))) {
    throw RankError("fictitious_system: h0x does not have full row rank (excitation failure)");
  }
  const Matrix& V = svd.matrixV();
  FictitiousSystem fs;
  fs.F = V.leftCols(n) * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  fs.G = V.rightCols(c - n);
  fs.Abar = h1x * fs.F;
  fs.Bbar = h1x * fs.G;
  return fs;
}

struct ColumnSelection {
  Matrix columns;
  std::vector<Index> kept;
};

inline constexpr double kColumnSelectionTolerance = 1e-9;

/**
 * Keeps, in natural column order, every column that raises the numerical
 * rank of the kept set, until rank(Bbar) columns are held. Rank decisions
 * compare the smallest singular value of the column-normalized candidate set
 * against `tol`. A nonnegative `max_rank` caps the target; on exact data
 * Bbar = B h0u G has rank at most m, and measurement noise only adds
 * spurious directions.
 */
inline ColumnSelection select_independent_columns(const Eigen::Ref<const Matrix>& Bbar,
                                                  double tol = kColumnSelectionTolerance, Index max_rank = -1) {
  ColumnSelection sel;
  sel.columns = Matrix(Bbar.rows(), 0);
  if (Bbar.cols() == 0 || Bbar.rows() == 0) {
    return sel;
  }
  Matrix normalized = Bbar;
  std::vector<bool> nonzero(static_cast<std::size_t>(Bbar.cols()), false);
  const double max_norm = Bbar.colwise().norm().maxCoeff();
  for (Index j = 0; j < Bbar.cols(); ++j) {
    const double nrm = Bbar.col(j).norm();
    if (nrm > tol * max_norm) {
      normalized.col(j) /= nrm;
      nonzero[static_cast<std::size_t>(j)] = true;
    }
  }
  const Vector sv = singular_values(Bbar);
  Index target = sv(0) == 0.0 ? 0 : static_cast<Index>((sv.array() > tol * sv(0)).count());
  if (max_rank >= 0) {
    target = std::min(target, max_rank);
  }

  Matrix candidate(Bbar.rows(), 0);
  for (Index j = 0; j < Bbar.cols() && static_cast<Index>(sel.kept.size()) < target; ++j) {
    if (!nonzero[static_cast<std::size_t>(j)]) {
      continue;
    }
    Matrix trial(Bbar.rows(), candidate.cols() + 1);
    trial << candidate, normalized.col(j);
    const Vector tsv = singular_values(trial);
    if (tsv(tsv.size() - 1) > tol) {
      candidate = std::move(trial);
      sel.kept.push_back(j);
    }
  }
  sel.columns = Matrix(Bbar.rows(), static_cast<Index>(sel.kept.size()));
  for (std::size_t i = 0; i < sel.kept.size(); ++i) {
    sel.columns.col(static_cast<Index>(i)) = Bbar.col(sel.kept[i]);
  }
  return sel;
}

/// Luenberger controller form: Ac = T Abar T^{-1}, Bc = T Bbar_F.
struct CanonicalForm {
  Matrix Ac;
  Matrix Bc;
  Matrix T;
  /// Controllability indices mu_i, one per input column; they sum to n.
  std::vector<Index> indices;
};

inline constexpr double kKrylovIndependenceTolerance = 1e-10;

/**
 * Controllability indices are found by scanning b_1..b_r, A b_1..A b_r, ...
 * and keeping every vector independent of those kept before. With
 * Cbar = [b_1 .. A^{mu_1-1} b_1, b_2 ..], q_i is row (mu_1 + .. + mu_i) of
 * Cbar^{-1} and T stacks q_i, q_i A, .., q_i A^{mu_i-1} for each i.
 */
inline CanonicalForm mimo_controllable_form(const Eigen::Ref<const Matrix>& Abar,
                                            const Eigen::Ref<const Matrix>& BbarF) {
  const Index n = Abar.rows();
  const Index r = BbarF.cols();
  if (Abar.cols() != n || BbarF.rows() != n) {
    throw InvalidArgument("mimo_controllable_form: dimension mismatch");
  }
  if (r == 0) {
    throw ControllabilityError("mimo_controllable_form: no input columns");
  }

  std::vector<Index> mu(static_cast<std::size_t>(r), 0);
  std::vector<bool> active(static_cast<std::size_t>(r), true);
  std::vector<Vector> power(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) {
    power[static_cast<std::size_t>(i)] = BbarF.col(i);
  }
  Matrix basis(n, 0);
  Index found = 0;
  for (Index k = 0; k < n && found < n; ++k) {
    for (Index i = 0; i < r && found < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!active[ui]) {
        continue;
      }
      const Vector& v = power[ui];
      Vector res = v;
      for (int pass = 0; pass < 2; ++pass) {
        res -= basis * (basis.transpose() * res);
      }
      if (res.norm() > kKrylovIndependenceTolerance * v.norm()) {
        Matrix grown(n, basis.cols() + 1);
        grown << basis, res.normalized();
        basis = std::move(grown);
        ++mu[ui];
        ++found;
      } else {
        active[ui] = false;
      }
    }
    for (Index i = 0; i < r; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (active[ui]) {
        power[ui] = Abar * power[ui];
      }
    }
  }
  if (found < n) {
    throw ControllabilityError("mimo_controllable_form: pair (Abar, Bbar_F) is not controllable");
  }

  Matrix Cbar(n, n);
  Index col = 0;
  for (Index i = 0; i < r; ++i) {
    Vector v = BbarF.col(i);
    for (Index j = 0; j < mu[static_cast<std::size_t>(i)]; ++j) {
      Cbar.col(col++) = v;
      v = Abar * v;
    }
  }
  Eigen::PartialPivLU<Matrix> clu(Cbar);
  const Matrix Cinv = clu.inverse();

  CanonicalForm cf;
  cf.T = Matrix(n, n);
  Index sigma = 0;
  Index row = 0;
  for (Index i = 0; i < r; ++i) {
    const Index mi = mu[static_cast<std::size_t>(i)];
    if (mi == 0) {
      continue;
    }
    sigma += mi;
    Eigen::RowVectorXd q = Cinv.row(sigma - 1);
    for (Index j = 0; j < mi; ++j) {
      cf.T.row(row++) = q;
      q = q * Abar;
    }
  }
  Eigen::PartialPivLU<Matrix> tlu(cf.T);
  cf.Ac = cf.T * Abar * tlu.inverse();
  cf.Bc = cf.T * BbarF;
  for (Index i = 0; i < r; ++i) {
    if (mu[static_cast<std::size_t>(i)] > 0) {
      cf.indices.push_back(mu[static_cast<std::size_t>(i)]);
    }
  }
  if (static_cast<Index>(cf.indices.size()) != r) {
    throw ControllabilityError("mimo_controllable_form: an input column has controllability index zero");
  }
  return cf;
}

inline constexpr double kCanonicalStructureTolerance = 1e-6;

/**
 * Deadbeat gain for a pair in controller form: the last row of every block is
 * cancelled, leaving Ac - Bc Hc = blockdiag(shift matrices), which is
 * nilpotent. Block ends are read from the nonzero rows of Bc.
 */
inline Matrix deadbeat_gain_canonical(const Eigen::Ref<const Matrix>& Ac, const Eigen::Ref<const Matrix>& Bc) {
  const Index n = Ac.rows();
  const Index r = Bc.cols();
  if (Ac.cols() != n || Bc.rows() != n || r < 1) {
    throw InvalidArgument("deadbeat_gain_canonical: dimension mismatch");
  }
  const double bscale = std::max(Bc.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double ascale = std::max(1.0, Ac.cwiseAbs().maxCoeff());
  std::vector<Index> ends;
  for (Index i = 0; i < n; ++i) {
    if (Bc.row(i).cwiseAbs().maxCoeff() > kCanonicalStructureTolerance * bscale) {
      ends.push_back(i);
    }
  }
  if (static_cast<Index>(ends.size()) != r || ends.back() != n - 1) {
    throw StructureError("deadbeat_gain_canonical: Bc does not have one nonzero row per input block");
  }
  Index start = 0;
  for (const Index end : ends) {
    for (Index i = start; i < end; ++i) {
      Eigen::RowVectorXd expected = Eigen::RowVectorXd::Zero(n);
      expected(i + 1) = 1.0;
      if ((Ac.row(i) - expected).cwiseAbs().maxCoeff() > kCanonicalStructureTolerance * ascale) {
        throw StructureError("deadbeat_gain_canonical: row " + std::to_string(i) + " of Ac is not a shift row");
      }
    }
    start = end + 1;
  }
  Matrix Bm(r, r);
  Matrix Am(r, n);
  for (Index i = 0; i < r; ++i) {
    Bm.row(i) = Bc.row(ends[static_cast<std::size_t>(i)]);
    Am.row(i) = Ac.row(ends[static_cast<std::size_t>(i)]);
  }
  Eigen::FullPivLU<Matrix> lu(Bm);
  if (!lu.isInvertible()) {
    throw StructureError("deadbeat_gain_canonical: block-end rows of Bc are singular");
  }
  return lu.solve(Am);
}

/// Every intermediate of the design, for inspection and tests.
struct DeadbeatDesign {
  DataMatrices data;
  FictitiousSystem fictitious;
  ColumnSelection selection;
  CanonicalForm canonical;
  Matrix Hc;
  Matrix HF;
  /// HF with zero rows inserted at the dropped columns of Bbar.
  Matrix Hbar;
  Gain gain;
};

namespace detail {

template <class Fn>
auto deadbeat_step(int step, const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const RankError& e) {
    throw RankError("deadbeat step " + std::to_string(step) + " (" + name + "): " + e.what());
  } catch (const ControllabilityError& e) {
    throw ControllabilityError("deadbeat step " + std::to_string(step) + " (" + name + "): " + e.what());
  } catch (const StructureError& e) {
    throw StructureError("deadbeat step " + std::to_string(step) + " (" + name + "): " + e.what());
  }
}

}  // namespace detail

/**
 * Full data-based deadbeat design on the given data matrices (used as
 * passed; deadbeat_from_data normalizes columns first).
 *
 * With u = -K x the returned gain is K = h0u (G Hbar - F), for which
 * A - B K = Abar - Bbar Hbar.
 */
inline DeadbeatDesign deadbeat_design(DataMatrices dm) {
  DeadbeatDesign d;
  d.fictitious = detail::deadbeat_step(3, "pseudoinverse and nullspace",
                                       [&] { return fictitious_system(dm.h0x, dm.h1x); });
  d.selection = select_independent_columns(d.fictitious.Bbar, kColumnSelectionTolerance, dm.h0u.rows());
  if (d.selection.kept.empty()) {
    throw UnsupportedInstance("deadbeat step 4: Bbar has rank zero; the data leave no input freedom");
  }
  d.canonical = detail::deadbeat_step(5, "controller canonical form", [&] {
    return mimo_controllable_form(d.fictitious.Abar, d.selection.columns);
  });
  d.Hc = detail::deadbeat_step(6, "canonical deadbeat gain",
                               [&] { return deadbeat_gain_canonical(d.canonical.Ac, d.canonical.Bc); });
  d.HF = d.Hc * d.canonical.T;
  d.Hbar = Matrix::Zero(d.fictitious.Bbar.cols(), d.HF.cols());
  for (std::size_t i = 0; i < d.selection.kept.size(); ++i) {
    d.Hbar.row(d.selection.kept[i]) = d.HF.row(static_cast<Index>(i));
  }
  d.gain = Gain(dm.h0u * (d.fictitious.G * d.Hbar - d.fictitious.F));
  d.data = std::move(dm);
  return d;
}

inline Gain deadbeat_from_data(const Trajectory& traj) { return deadbeat_design(normalize_columns(data_matrices(traj))).gain; }

inline Gain deadbeat_from_data(const LearningData& data) {
  return deadbeat_design(normalize_columns(data_matrices(data))).gain;
}

}  // namespace ddlqr

#endif  // DDLQR_DEADBEAT_HPP
