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
#ifndef DDLQR_BENCH_HPP
#define DDLQR_BENCH_HPP

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "ddlqr/common.hpp"
#include "ddlqr/deadbeat.hpp"
#include "ddlqr/oracle.hpp"
#include "ddlqr/qlearn.hpp"
#include "ddlqr/systems.hpp"

// The clean end-to-end pipeline on random plants: excite, design a deadbeat
// initial gain from the data, run a fixed number of Q-learning iterations and
// compare with the Riccati solution.

namespace ddlqr {

struct BenchOptions {
  Index m = 2;
  int trials = 100;
  int iterations = 10;
  Seed seed = 0;
  unsigned jobs = 1;
  CollectionOptions collection{};
};

struct BenchTrial {
  int trial = 0;
  Seed seed = 0;
  double error = std::numeric_limits<double>::quiet_NaN();
  /// Deadbeat design plus the learning loop; data generation is excluded.
  double time_seconds = std::numeric_limits<double>::quiet_NaN();
  /// Relative DARE residual of the oracle gain the error is measured against.
  double oracle_residual = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::string> failure;
};

struct BenchRow {
  Index n = 0;
  int trials = 0;
  /// Averages over trials that completed.
  double avg_error = std::numeric_limits<double>::quiet_NaN();
  double max_error = std::numeric_limits<double>::quiet_NaN();
  double avg_time_seconds = std::numeric_limits<double>::quiet_NaN();
  int failures = 0;
  std::vector<BenchTrial> per_trial;
};

/// Seed of trial t at dimension n: derive_seed(derive_seed(seed, n), t).
inline Seed bench_trial_seed(Seed seed, Index n, int trial) {
  return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(trial));
}

inline BenchTrial bench_trial(Index n, const BenchOptions& opts, int trial) {
  BenchTrial out;
  out.trial = trial;
  out.seed = bench_trial_seed(opts.seed, n, trial);
  try {
    const LinearSystem sys = random_controllable_system(n, opts.m, out.seed);
    const CostWeights w = CostWeights::identity(n, opts.m);
    DareOptions dare;
    dare.accept_stall = true;
    const Matrix P = solve_dare(sys, w, dare);
    out.oracle_residual = dare_residual(sys, w, P);
    const Gain K_opt = lqr_gain(sys, w, P);

    auto rng = make_rng(out.seed, 0x5830u);
    const Vector x0 = uniform_vector(n, -1.0, 1.0, rng);
    const LearningData data = collect_learning_data(sys, x0, out.seed, opts.collection);

    const auto start = std::chrono::steady_clock::now();
    const Gain K0 = deadbeat_from_data(data);
    QLearningOptions q;
    q.fixed_iterations = opts.iterations;
    const QLearningResult res = run_qlearning(data, K0, w, q);
    out.time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.error = gain_distance(res.gain, K_opt);
  } catch (const std::exception& e) {
    spdlog::info("bench n={} trial {} failed: {}", n, trial, e.what());
    out.failure = e.what();
  }
  return out;
}

inline BenchRow bench_dimension(Index n, const BenchOptions& opts) {
  if (n < 1 || opts.m < 1 || opts.trials < 1 || opts.iterations < 1) {
    throw InvalidArgument("bench_dimension: parameters must be positive");
  }
  BenchRow row;
  row.n = n;
  row.trials = opts.trials;
  row.per_trial.resize(static_cast<std::size_t>(opts.trials));
  parallel_for(row.per_trial.size(), opts.jobs,
               [&](std::size_t t) { row.per_trial[t] = bench_trial(n, opts, static_cast<int>(t)); });
  double err = 0.0;
  double time = 0.0;
  double max_error = 0.0;
  int done = 0;
  for (const BenchTrial& t : row.per_trial) {
    if (t.failure) {
      ++row.failures;
      continue;
    }
    ++done;
    err += t.error;
    time += t.time_seconds;
    max_error = std::max(max_error, t.error);
  }
  if (done > 0) {
    row.avg_error = err / done;
    row.avg_time_seconds = time / done;
    row.max_error = max_error;
  }
  return row;
}

}  // namespace ddlqr

#endif  // DDLQR_BENCH_HPP
