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
#ifndef DDLQR_TOOLS_CLI_HPP
#define DDLQR_TOOLS_CLI_HPP

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ddlqr/ddlqr.hpp"

namespace ddlqr::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

namespace detail {

inline void configure_logging() {
  static const bool done = [] {
    auto logger = spdlog::stderr_color_mt("ddlqr");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("DDLQR_LOG")) {
      spdlog::set_level(spdlog::level::from_str(env));
    }
    return true;
  }();
  (void)done;
}

inline void print_matrix(std::ostream& out, const Matrix& M) {
  out << std::setprecision(17);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      out << (j ? " " : "") << M(i, j);
    }
    out << '\n';
  }
}

inline Vector initial_state(Index n, Seed seed) {
  auto rng = make_rng(seed, 0x5830u);
  return uniform_vector(n, -1.0, 1.0, rng);
}

/// Learning samples either recorded in a data file or produced by exciting the given plant.
struct Experiment {
  std::optional<LinearSystem> system;
  std::optional<Trajectory> recorded;
  Index n = 0;
  Index m = 0;
};

inline Experiment load_experiment(const std::string& system_file, const std::string& data_file) {
  Experiment e;
  if (!system_file.empty()) {
    e.system = read_system_file(system_file);
    e.n = e.system->n();
    e.m = e.system->m();
  }
  if (!data_file.empty()) {
    e.recorded = read_data_file(data_file);
    if (e.recorded->n() == 0) {
      throw IoError("'" + data_file + "' holds no states");
    }
    if (e.system && (e.recorded->n() != e.n || e.recorded->m() != e.m)) {
      throw IoError("'" + data_file + "' does not match the dimensions of '" + system_file + "'");
    }
    e.n = e.recorded->n();
    e.m = e.recorded->m();
  }
  if (!e.system && !e.recorded) {
    throw CLI::ValidationError("a system file or --data is required");
  }
  return e;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) {
    throw IoError("cannot write '" + path + "'");
  }
  f << text;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace detail

struct SolveArgs {
  std::string system_file;
  std::string weights_file;
  std::string data_file;
  std::string out;
  Seed seed = 0;
  std::optional<int> iterations;
  double eps = 1e-10;
  int max_iter = 50;
  bool audit = false;
};

/// Deadbeat initial gain, then Q-learning; prints the final gain.
inline int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const detail::Experiment ex = detail::load_experiment(a.system_file, a.data_file);
    const CostWeights w = a.weights_file.empty() ? CostWeights::identity(ex.n, ex.m) : read_weights_file(a.weights_file);
    if (w.n() != ex.n || w.m() != ex.m) {
      throw IoError("weights do not match the system dimensions");
    }
    if (a.audit && !ex.system) {
      throw CLI::ValidationError("--audit needs the system file");
    }

    const LearningData data = ex.recorded ? LearningData::from_trajectory(*ex.recorded)
                                          : collect_learning_data(*ex.system, detail::initial_state(ex.n, a.seed), a.seed);
    Gain K0;
    try {
      K0 = ex.recorded ? deadbeat_from_data(*ex.recorded) : deadbeat_from_data(data);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("initial gain: ") + e.what());
    }

    QLearningOptions q;
    q.eps = a.eps;
    q.max_iter = a.max_iter;
    q.fixed_iterations = a.iterations;
    if (a.audit) {
      q.audit = *ex.system;
    }
    QLearningResult res;
    int code = kOk;
    try {
      res = run_qlearning(data, K0, w, q);
    } catch (const ConvergenceFailure& e) {
      err << "error: q-learning: " << e.what() << '\n';
      res = e.partial();
      code = kFailure;
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("q-learning: ") + e.what());
    }

    std::optional<AuditSummary> audit;
    if (a.audit) {
      audit = audit_result(res, *ex.system, w);
    }
    out << "gain (u = -K x), " << res.iterations << " iterations:\n";
    detail::print_matrix(out, res.gain.matrix());
    if (audit) {
      out << std::setprecision(17) << "audit: |K - K*| = " << audit->error_vs_optimal
          << ", spectral radius = " << audit->final_spectral_radius << '\n';
    }
    if (!a.out.empty()) {
      detail::write_text(a.out, qlearning_report(res, ex.n, ex.m, audit).dump(2) + "\n");
    }
    return code;
  });
}

struct BenchArgs {
  std::vector<int> dims{3, 5, 10, 20, 50};
  int m = 2;
  int trials = 100;
  Seed seed = 0;
  int iterations = 10;
  unsigned jobs = 1;
  std::string out;
};

inline constexpr const char* kBenchHeader = "n,trials,avg_error,avg_time_seconds,failures";

inline int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    std::ostringstream csv;
    csv << std::setprecision(17) << kBenchHeader << '\n';
    BenchOptions opts;
    opts.m = a.m;
    opts.trials = a.trials;
    opts.seed = a.seed;
    opts.iterations = a.iterations;
    opts.jobs = a.jobs;
    for (int n : a.dims) {
      const BenchRow row = bench_dimension(n, opts);
      csv << row.n << ',' << row.trials << ',' << row.avg_error << ',' << row.avg_time_seconds << ','
          << row.failures << '\n';
      spdlog::info("bench n={} done: avg error {:.3e}, {} failures", n, row.avg_error, row.failures);
    }
    if (a.out.empty()) {
      out << csv.str();
    } else {
      detail::write_text(a.out, csv.str());
    }
    return static_cast<int>(kOk);
  });
}

struct NoisyArgs {
  int n = 5;
  int m = 2;
  double w_max = 1e-3;
  int trials = 100;
  Seed seed = 0;
  int iterations = 10;
  unsigned jobs = 1;
  bool gaussian = false;
  std::string out;
};

inline constexpr const char* kNoisyHeader = "trial,seed,error_norm,stabilizing,margin_lhs,margin_ok";

inline int cmd_noisy(const NoisyArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    NoisyExperimentOptions opts;
    opts.n = a.n;
    opts.m = a.m;
    opts.w_max = a.w_max;
    opts.trials = a.trials;
    opts.seed = a.seed;
    opts.iterations = a.iterations;
    opts.jobs = a.jobs;
    opts.kind = a.gaussian ? NoiseKind::kGaussian : NoiseKind::kUniform;
    const NoisyStatistics s = noisy_experiment(opts);

    if (!a.out.empty()) {
      std::ostringstream csv;
      csv << std::setprecision(17) << kNoisyHeader << '\n';
      for (const NoisyTrial& t : s.per_trial) {
        csv << t.trial << ',' << t.seed << ',' << t.error_norm << ',' << (t.stabilizing ? 1 : 0) << ','
            << t.margin_lhs << ',' << (t.margin_ok ? 1 : 0) << '\n';
      }
      detail::write_text(a.out, csv.str());
    }
    out << std::setprecision(17) << "trials=" << a.trials << " w_max=" << a.w_max << " mean_error=" << s.mean_error
        << " max_error=" << s.max_error << " mean_error_stabilizing=" << s.mean_error_stabilizing
        << " destabilized=" << s.destabilized_count << " failures=" << s.failure_count << '\n';
    return static_cast<int>(kOk);
  });
}

struct PeCheckArgs {
  std::string data_file;
  int order = 1;
};

inline int cmd_pe_check(const PeCheckArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Trajectory traj = read_data_file(a.data_file);
    const Index m = traj.m();
    const Index L = a.order;
    const auto N = static_cast<Index>(traj.size());
    if (N < min_pe_length(m, L)) {
      out << "NOT persistently exciting of order " << L << ": N = " << N << " samples, but order " << L
          << " needs N >= (m+1)L-1 = " << min_pe_length(m, L) << '\n';
      return static_cast<int>(kFailure);
    }
    bool ok = is_persistently_exciting(traj.inputs(), L);
    out << (ok ? "persistently exciting" : "NOT persistently exciting") << " of order " << L << '\n';
    if (traj.n() > 0) {
      if (static_cast<Index>(traj.states().size()) < L) {
        out << "Willems rank: not enough states\n";
        ok = false;
      } else {
        const Index rank = numerical_rank_column_scaled(willems_matrix(traj, L));
        const Index expected = L * m + traj.n();
        const bool pass = rank == expected;
        out << "Willems rank " << rank << " (expected Lm + n = " << expected << "): " << (pass ? "PASS" : "FAIL")
            << '\n';
        ok = ok && pass;
      }
    }
    return static_cast<int>(ok ? kOk : kFailure);
  });
}

struct DeadbeatArgs {
  std::string system_file;
  std::string data_file;
  Seed seed = 0;
  bool audit = false;
};

inline constexpr double kDeadbeatAuditTolerance = 1e-6;

inline int cmd_deadbeat(const DeadbeatArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const detail::Experiment ex = detail::load_experiment(a.system_file, a.data_file);
    if (a.audit && !ex.system) {
      throw CLI::ValidationError("--audit needs the system file");
    }
    Gain K;
    if (ex.recorded) {
      K = deadbeat_from_data(*ex.recorded);
    } else {
      K = deadbeat_from_data(collect_learning_data(*ex.system, detail::initial_state(ex.n, a.seed), a.seed));
    }
    out << "deadbeat gain (u = -K x):\n";
    detail::print_matrix(out, K.matrix());
    if (!a.audit) {
      return static_cast<int>(kOk);
    }
    const Matrix Acl = closed_loop(*ex.system, K.matrix());
    Matrix power = Matrix::Identity(ex.n, ex.n);
    for (Index k = 0; k < ex.n; ++k) {
      power = Acl * power;
    }
    const double rho = spectral_radius(Acl);
    const double contraction = spectral_norm(power);
    const bool pass = rho <= kDeadbeatAuditTolerance && contraction <= kDeadbeatAuditTolerance;
    out << std::setprecision(17) << "audit: max |eig(A - B K)| = " << rho << ", |(A - B K)^n|_2 = " << contraction
        << ": " << (pass ? "PASS" : "FAIL") << '\n';
    return static_cast<int>(pass ? kOk : kFailure);
  });
}

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  detail::configure_logging();
  CLI::App app{"Data-driven LQR: Q-learning from persistently exciting data", "ddlqr"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "learn the LQR gain of a plant from one excitation experiment");
  s->add_option("system", solve.system_file, "system file (n m, rows of A, rows of B)");
  s->add_option("--weights", solve.weights_file, "weights file (n m, rows of Q, rows of R); identity if omitted");
  s->add_option("--data", solve.data_file, "learn from recorded data instead of simulating the system");
  s->add_option("--seed", solve.seed, "experiment seed");
  s->add_option("--iterations", solve.iterations, "run exactly this many iterations");
  s->add_option("--eps", solve.eps, "stop once |K^{i+1} - K^i|_2 <= eps")->check(CLI::PositiveNumber);
  s->add_option("--max-iter", solve.max_iter, "iteration cap in tolerance mode")->check(CLI::PositiveNumber);
  s->add_option("--out", solve.out, "write the JSON report here");
  s->add_flag("--audit", solve.audit, "compare against the model-based optimum");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "clean-data benchmark over random plants, CSV per dimension");
  b->add_option("--dims", bench.dims, "state dimensions")->delimiter(',')->check(CLI::PositiveNumber);
  b->add_option("--m", bench.m, "input dimension")->check(CLI::PositiveNumber);
  b->add_option("--trials", bench.trials, "random plants per dimension")->check(CLI::PositiveNumber);
  b->add_option("--seed", bench.seed, "base seed");
  b->add_option("--iterations", bench.iterations, "Q-learning iterations")->check(CLI::PositiveNumber);
  b->add_option("--jobs", bench.jobs, "worker threads")->check(CLI::PositiveNumber);
  b->add_option("--out", bench.out, "CSV path; stdout if omitted");

  NoisyArgs noisy;
  auto* z = app.add_subcommand("noisy", "learning from noisy state measurements over random plants");
  z->add_option("--n", noisy.n, "state dimension")->check(CLI::PositiveNumber);
  z->add_option("--m", noisy.m, "input dimension")->check(CLI::PositiveNumber);
  z->add_option("--w-max", noisy.w_max, "componentwise noise bound")->check(CLI::NonNegativeNumber);
  z->add_option("--trials", noisy.trials, "random plants")->check(CLI::PositiveNumber);
  z->add_option("--seed", noisy.seed, "base seed");
  z->add_option("--iterations", noisy.iterations, "Q-learning iterations")->check(CLI::PositiveNumber);
  z->add_option("--jobs", noisy.jobs, "worker threads")->check(CLI::PositiveNumber);
  z->add_flag("--gaussian", noisy.gaussian, "clipped normal noise instead of uniform");
  z->add_option("--out", noisy.out, "per-trial CSV path");

  PeCheckArgs pe;
  auto* p = app.add_subcommand("pe-check", "persistency of excitation and Willems rank of a data file");
  p->add_option("data", pe.data_file, "data file (n m N, then u_k x_k per line)")->required();
  p->add_option("--order", pe.order, "excitation order L")->check(CLI::PositiveNumber);

  DeadbeatArgs db;
  auto* d = app.add_subcommand("deadbeat", "deadbeat gain designed from data only");
  d->add_option("system", db.system_file, "system file; an excitation experiment is simulated");
  d->add_option("--data", db.data_file, "design from recorded data");
  d->add_option("--seed", db.seed, "experiment seed");
  d->add_flag("--audit", db.audit, "check the closed-loop spectrum against the system");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (s->parsed()) {
    return cmd_solve(solve, out, err);
  }
  if (b->parsed()) {
    return cmd_bench(bench, out, err);
  }
  if (z->parsed()) {
    return cmd_noisy(noisy, out, err);
  }
  if (p->parsed()) {
    return cmd_pe_check(pe, out, err);
  }
  return cmd_deadbeat(db, out, err);
}

}  // namespace ddlqr::cli

#endif  // DDLQR_TOOLS_CLI_HPP
