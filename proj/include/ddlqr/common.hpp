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
#ifndef DDLQR_COMMON_HPP
#define DDLQR_COMMON_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ddlqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Seed type for every randomized routine. Equal seeds give bitwise-equal output.
using Seed = std::uint64_t;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Bad dimensions, lengths or parameter values supplied by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition that the caller could not check cheaply was violated
/// (e.g. a non Schur-stable matrix handed to the Lyapunov solver).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A retry cap was exceeded in a routine that succeeds almost surely.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base for failures of a numerical kernel (eigen solver, factorization, iteration).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data matrix lacks the rank the algorithm needs; usually an excitation failure.
class RankError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ControllabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A canonical form did not have the expected sparsity pattern.
class StructureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The instance is outside what the algorithm defines (e.g. an empty input nullspace).
class UnsupportedInstance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small numerical helpers shared by all modules
// ---------------------------------------------------------------------------

/// Relative singular-value threshold used for every numerical rank decision.
inline double rank_tolerance(const Eigen::Ref<const Matrix>& M, double sigma_max) {
  const auto dim = static_cast<double>(std::max(M.rows(), M.cols()));
  return sigma_max * dim * std::numeric_limits<double>::epsilon();
}

inline Vector singular_values(const Eigen::Ref<const Matrix>& M) {
  if (M.size() == 0) {
    return Vector{};
  }
  if (std::min(M.rows(), M.cols()) <= 16) {
    return Eigen::JacobiSVD<Matrix>(M).singularValues();
  }
  return Eigen::BDCSVD<Matrix>(M).singularValues();
}

/// Numerical rank: number of singular values above sigma_max * max(rows, cols) * eps.
inline Index numerical_rank(const Eigen::Ref<const Matrix>& M) {
  const Vector sv = singular_values(M);
  if (sv.size() == 0 || sv(0) == 0.0) {
    return 0;
  }
  const double tol = rank_tolerance(M, sv(0));
  return static_cast<Index>((sv.array() > tol).count());
}

/// Numerical rank after scaling every nonzero column to unit norm.
inline Index numerical_rank_column_scaled(const Eigen::Ref<const Matrix>& M) {
  Matrix scaled = M;
  for (Index j = 0; j < scaled.cols(); ++j) {
    const double nrm = scaled.col(j).norm();
    if (nrm > 0.0) {
      scaled.col(j) /= nrm;
    }
  }
  return numerical_rank(scaled);
}

inline double spectral_norm(const Eigen::Ref<const Matrix>& M) {
  const Vector sv = singular_values(M);
  return sv.size() == 0 ? 0.0 : sv(0);
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue_symmetric(const Eigen::Ref<const Matrix>& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("symmetric eigenvalue iteration did not converge");
  }
  return es.eigenvalues()(0);
}

inline bool is_symmetric(const Eigen::Ref<const Matrix>& P, double rel_tol) {
  if (P.rows() != P.cols()) {
    return false;
  }
  const double scale = P.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    return true;
  }
  return (P - P.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

inline bool all_finite(const Eigen::Ref<const Matrix>& M) { return M.allFinite(); }

/// Independent RNG stream for (seed, stream). Streams do not depend on execution order.
inline std::mt19937_64 make_rng(Seed seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6464u};
  return std::mt19937_64(seq);
}

/// Derives the seed of sub-experiment `stream` from a parent seed.
inline Seed derive_seed(Seed seed, std::uint64_t stream) {
  auto rng = make_rng(seed, stream);
  return rng();
}

template <class Rng>
Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix M(rows, cols);
  // Column-major fill keeps the draw order identical across Eigen versions.
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      M(i, j) = dist(rng);
    }
  }
  return M;
}

template <class Rng>
Vector uniform_vector(Index size, double lo, double hi, Rng& rng) {
  return uniform_matrix(size, 1, lo, hi, rng);
}

/// Stacks a sequence of equally sized vectors as columns.
inline Matrix columns_of(const std::vector<Vector>& seq, std::size_t first, std::size_t count) {
  if (first + count > seq.size()) {
    throw InvalidArgument("columns_of: range exceeds sequence length");
  }
  const Index rows = count == 0 ? 0 : seq[first].size();
  Matrix M(rows, static_cast<Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    if (seq[first + j].size() != rows) {
      throw InvalidArgument("columns_of: vectors of unequal dimension");
    }
    M.col(static_cast<Index>(j)) = seq[first + j];
  }
  return M;
}

/**
 * Calls fn(i) for i in [0, count) on up to `jobs` threads. Work items must
 * not share mutable state; the first exception is rethrown after all
 * workers finish.
 */
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& w : workers) {
    w.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace ddlqr

#endif  // DDLQR_COMMON_HPP
