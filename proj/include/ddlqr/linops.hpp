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
#ifndef DDLQR_LINOPS_HPP
#define DDLQR_LINOPS_HPP

#include <cmath>
#include <span>
#include <string>
#include <utility>

#include "ddlqr/common.hpp"

namespace ddlqr {

/// d(d+1)/2.
inline constexpr Index triangular_number(Index d) noexcept { return d * (d + 1) / 2; }

/// Inverse of triangular_number; -1 when `len` is not triangular.
inline Index triangular_root(Index len) noexcept {
  if (len < 0) {
    return -1;
  }
  auto d = static_cast<Index>(std::floor((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0));
  while (triangular_number(d) < len) {
    ++d;
  }
  while (d > 0 && triangular_number(d) > len) {
    --d;
  }
  return triangular_number(d) == len ? d : -1;
}

/// Position of entry (i, j), i <= j, in the row-major upper-triangle ordering
/// (1,1),(1,2),...,(1,d),(2,2),...,(d,d).
inline constexpr Index sym_index(Index i, Index j, Index d) noexcept {
  return i * d - i * (i - 1) / 2 + (j - i);
}

/**
 * Distinct entries of a symmetric d x d matrix, row-major upper triangle.
 * The ordering is shared by vec_sym, quad_monomials and the Q-learning
 * regressor; x~ . vec(P) = x^T P x holds only because of that.
 */
class SymVec {
 public:
  SymVec() = default;

  explicit SymVec(Vector entries) : entries_(std::move(entries)), dim_(triangular_root(entries_.size())) {
    if (dim_ < 0) {
      throw InvalidArgument("SymVec: length " + std::to_string(entries_.size()) + " is not a triangular number");
    }
  }

  const Vector& entries() const noexcept { return entries_; }
  Index dim() const noexcept { return dim_; }
  Index size() const noexcept { return entries_.size(); }

 private:
  Vector entries_;
  Index dim_ = 0;
};

inline constexpr double kSymmetryTolerance = 1e-10;

inline SymVec vec_sym(const Eigen::Ref<const Matrix>& P) {
  if (P.rows() != P.cols()) {
    throw InvalidArgument("vec_sym: matrix must be square");
  }
  if (!is_symmetric(P, kSymmetryTolerance)) {
    throw InvalidArgument("vec_sym: matrix is not symmetric");
  }
  const Index d = P.rows();
  Vector v(triangular_number(d));
  Index k = 0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) {
      v(k++) = P(i, j);
    }
  }
  return SymVec(std::move(v));
}

inline Matrix unvec_sym(const SymVec& v) {
  const Index d = v.dim();
  Matrix P(d, d);
  Index k = 0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) {
      P(i, j) = v.entries()(k);
      P(j, i) = v.entries()(k);
      ++k;
    }
  }
  return P;
}

inline Matrix unvec_sym(const Vector& entries) { return unvec_sym(SymVec(entries)); }

/// Writes x~ = [x1^2, 2x1x2, ..., 2x1xd, x2^2, ..., xd^2] into `out`.
template <class Out>
void quad_monomials_into(const Eigen::Ref<const Vector>& x, Out&& out) {
  const Index d = x.size();
  Index k = 0;
  for (Index i = 0; i < d; ++i) {
    out(k++) = x(i) * x(i);
    for (Index j = i + 1; j < d; ++j) {
      out(k++) = 2.0 * x(i) * x(j);
    }
  }
}

inline Vector quad_monomials(const Eigen::Ref<const Vector>& x) {
  Vector out(triangular_number(x.size()));
  quad_monomials_into(x, out);
  return out;
}

/**
 * Block Hankel matrix of depth L: block (i, j) is seq[i + j], so the result is
 * dL x (N - L + 1).
 */
inline Matrix hankel(std::span<const Vector> seq, Index L) {
  const auto N = static_cast<Index>(seq.size());
  if (L < 1) {
    throw InvalidArgument("hankel: depth L must be >= 1");
  }
  if (L > N) {
    throw InvalidArgument("hankel: depth " + std::to_string(L) + " exceeds sequence length " + std::to_string(N));
  }
  const Index d = seq.front().size();
  const Index cols = N - L + 1;
  Matrix H(d * L, cols);
  for (Index i = 0; i < L; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const Vector& v = seq[static_cast<std::size_t>(i + j)];
      if (v.size() != d) {
        throw InvalidArgument("hankel: vectors of unequal dimension");
      }
      H.block(i * d, j, d, 1) = v;
    }
  }
  return H;
}

}  // namespace ddlqr

#endif  // DDLQR_LINOPS_HPP
