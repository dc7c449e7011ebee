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
#ifndef DDLQR_IO_HPP
#define DDLQR_IO_HPP

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ddlqr/common.hpp"
#include "ddlqr/oracle.hpp"
#include "ddlqr/systems.hpp"

// Plain-text formats shared by the command line tool:
//
//   system   "n m", n rows of A, n rows of B
//   weights  "n m", n rows of Q, m rows of R
//   data     "n m N", then N lines holding u_k followed by x_k (n may be 0)
//
// Blank lines and text after '#' are ignored.

namespace ddlqr {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed content; `line()` is 1-based, 0 when the file ended early.
class ParseError : public IoError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : IoError(source + (line > 0 ? ":" + std::to_string(line) : std::string(":eof")) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  /// Next non-blank line split into numbers.
  std::vector<double> numbers() {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      if (const auto hash = raw.find('#'); hash != std::string::npos) {
        raw.erase(hash);
      }
      std::istringstream ss(raw);
      std::vector<double> out;
      std::string tok;
      while (ss >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(tok, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != tok.size() || !std::isfinite(v)) {
          throw error("not a finite number: '" + tok + "'");
        }
        out.push_back(v);
      }
      if (!out.empty()) {
        return out;
      }
    }
    throw ParseError(source_, 0, "unexpected end of input");
  }

  std::vector<double> numbers(std::size_t expected, const std::string& what) {
    auto v = numbers();
    if (v.size() != expected) {
      throw error(what + ": expected " + std::to_string(expected) + " values, found " + std::to_string(v.size()));
    }
    return v;
  }

  Index count(double v, const std::string& what, Index min) const {
    if (v != std::floor(v) || v < static_cast<double>(min) || v > 1e9) {
      throw error(what + " must be an integer >= " + std::to_string(min));
    }
    return static_cast<Index>(v);
  }

  Matrix rows(Index r, Index c, const std::string& what) {
    Matrix M(r, c);
    for (Index i = 0; i < r; ++i) {
      const auto v = numbers(static_cast<std::size_t>(c), what + " row " + std::to_string(i + 1));
      for (Index j = 0; j < c; ++j) {
        M(i, j) = v[static_cast<std::size_t>(j)];
      }
    }
    return M;
  }

  void expect_end() {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      if (const auto hash = raw.find('#'); hash != std::string::npos) {
        raw.erase(hash);
      }
      if (raw.find_first_not_of(" \t\r") != std::string::npos) {
        throw error("unexpected trailing content");
      }
    }
  }

  ParseError error(const std::string& what) const { return ParseError(source_, line_, what); }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  return out;
}

}  // namespace detail

inline LinearSystem read_system(std::istream& in, const std::string& source = "<system>") {
  detail::LineReader r(in, source);
  const auto head = r.numbers(2, "header \"n m\"");
  const Index n = r.count(head[0], "n", 1);
  const Index m = r.count(head[1], "m", 1);
  Matrix A = r.rows(n, n, "A");
  Matrix B = r.rows(n, m, "B");
  r.expect_end();
  return LinearSystem(std::move(A), std::move(B));
}

inline CostWeights read_weights(std::istream& in, const std::string& source = "<weights>") {
  detail::LineReader r(in, source);
  const auto head = r.numbers(2, "header \"n m\"");
  const Index n = r.count(head[0], "n", 1);
  const Index m = r.count(head[1], "m", 1);
  Matrix Q = r.rows(n, n, "Q");
  Matrix R = r.rows(m, m, "R");
  r.expect_end();
  try {
    return CostWeights(std::move(Q), std::move(R));
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, e.what());
  }
}

/// Inputs u_0..u_{N-1} and, when n > 0, the states x_0..x_{N-1}.
inline Trajectory read_data(std::istream& in, const std::string& source = "<data>") {
  detail::LineReader r(in, source);
  const auto head = r.numbers(3, "header \"n m N\"");
  const Index n = r.count(head[0], "n", 0);
  const Index m = r.count(head[1], "m", 1);
  const Index N = r.count(head[2], "N", 1);
  std::vector<Vector> inputs;
  std::vector<Vector> states;
  inputs.reserve(static_cast<std::size_t>(N));
  if (n > 0) {
    states.reserve(static_cast<std::size_t>(N));
  }
  for (Index k = 0; k < N; ++k) {
    const auto v = r.numbers(static_cast<std::size_t>(m + n), "sample " + std::to_string(k));
    inputs.emplace_back(Eigen::Map<const Vector>(v.data(), m));
    if (n > 0) {
      states.emplace_back(Eigen::Map<const Vector>(v.data() + m, n));
    }
  }
  r.expect_end();
  return Trajectory(std::move(inputs), std::move(states));
}

inline LinearSystem read_system_file(const std::string& path) {
  auto in = detail::open_input(path);
  return read_system(in, path);
}

inline CostWeights read_weights_file(const std::string& path) {
  auto in = detail::open_input(path);
  return read_weights(in, path);
}

inline Trajectory read_data_file(const std::string& path) {
  auto in = detail::open_input(path);
  return read_data(in, path);
}

namespace detail {

inline void write_rows(std::ostream& out, const Matrix& M) {
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      out << (j ? " " : "") << M(i, j);
    }
    out << '\n';
  }
}

}  // namespace detail

inline void write_system(std::ostream& out, const LinearSystem& sys) {
  out << std::setprecision(17) << sys.n() << ' ' << sys.m() << '\n';
  detail::write_rows(out, sys.A());
  detail::write_rows(out, sys.B());
}

/// Writes the first N samples; states beyond N (a trailing successor) are dropped.
inline void write_data(std::ostream& out, const Trajectory& traj) {
  const std::size_t N = traj.size();
  const bool with_states = !traj.states().empty();
  out << std::setprecision(17) << (with_states ? traj.n() : 0) << ' ' << traj.m() << ' ' << N << '\n';
  for (std::size_t k = 0; k < N; ++k) {
    const Vector& u = traj.inputs()[k];
    for (Index i = 0; i < u.size(); ++i) {
      out << (i ? " " : "") << u(i);
    }
    if (with_states) {
      const Vector& x = traj.states()[k];
      for (Index i = 0; i < x.size(); ++i) {
        out << ' ' << x(i);
      }
    }
    out << '\n';
  }
}

}  // namespace ddlqr

#endif  // DDLQR_IO_HPP
