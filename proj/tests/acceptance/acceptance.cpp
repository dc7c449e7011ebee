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
// Acceptance runner. `acceptance N` checks criterion N and `acceptance`
// checks all of them; each prints one "criterion N: PASS|FAIL ..." line and
// the exit status is nonzero when any checked criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "ddlqr/ddlqr.hpp"
#include "support/oracles.hpp"

namespace {

using namespace ddlqr;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

Vector start_state(Index n, Seed seed) {
  auto rng = make_rng(seed, 0x5830u);
  return uniform_vector(n, -1.0, 1.0, rng);
}

/// Instances shared by the property criteria: n in 2..6, m in 1..2.
struct Instance {
  LinearSystem sys;
  CostWeights w;
  LqrSolution lqr;
  QLearningResult res;
  Gain K0;
};

Instance learn_instance(int t, int iterations) {
  const Index n = 2 + t % 5;
  const Index m = 1 + (t / 5) % 2;
  const Seed seed = derive_seed(0xacce, static_cast<std::uint64_t>(t));
  LinearSystem sys = random_controllable_system(n, m, seed);
  CostWeights w = CostWeights::identity(n, m);
  LqrSolution lqr = solve_lqr(sys, w);
  const LearningData data = collect_learning_data(sys, start_state(n, seed), seed);
  Gain K0 = deadbeat_from_data(data);
  QLearningOptions opts;
  opts.fixed_iterations = iterations;
  opts.audit = sys;
  QLearningResult res = run_qlearning(data, K0, w, opts);
  return {std::move(sys), std::move(w), std::move(lqr), std::move(res), std::move(K0)};
}

constexpr int kPropertyInstances = 20;

Verdict criterion1() {
  BenchOptions opts;
  opts.m = 2;
  opts.trials = 100;
  opts.iterations = 10;
  opts.jobs = jobs();
  bool pass = true;
  std::ostringstream d;
  for (Index n : {3, 5, 10}) {
    const BenchRow row = bench_dimension(n, opts);
    pass = pass && row.avg_error <= 1e-10;
    d << fmt("n=%ld avg=%.3e max=%.3e failures=%d; ", static_cast<long>(n), row.avg_error, row.max_error,
             row.failures);
  }
  return {pass, d.str() + "bound avg <= 1e-10"};
}

Verdict criterion2() {
  BenchOptions opts;
  opts.m = 2;
  opts.iterations = 10;
  const auto start = std::chrono::steady_clock::now();
  const BenchTrial t = bench_trial(50, opts, 0);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (t.failure) {
    return {false, fmt("n=50 run failed after %.2f s: %s", total, t.failure->c_str())};
  }
  const bool pass = t.time_seconds < 60.0 && t.error <= 1e-6;
  return {pass, fmt("n=50 error=%.3e learn_time=%.2f s total_time=%.2f s dare_residual=%.3e; bounds error <= 1e-6, "
                    "time < 60 s",
                    t.error, t.time_seconds, total, t.oracle_residual)};
}

Verdict criterion3() {
  double worst = 0.0;
  int checked = 0;
  std::string failure;
  for (int t = 0; t < kPropertyInstances; ++t) {
    try {
      const Instance in = learn_instance(t, 10);
      Gain K = in.K0;
      for (const PolicyIterate& it : in.res.iterates) {
        const Matrix ref = solve_dlyap(PhiMatrix(in.sys, K).matrix(), in.w.Qbar());
        worst = std::max(worst, (it.theta.matrix() - ref).norm() / (1.0 + ref.norm()));
        ++checked;
        K = it.gain;
      }
    } catch (const std::exception& e) {
      failure = fmt("instance %d: %s", t, e.what());
      break;
    }
  }
  if (!failure.empty()) {
    return {false, failure};
  }
  return {worst <= 1e-7, fmt("%d instances, %d iterates, worst relative deviation %.3e; bound 1e-7",
                             kPropertyInstances, checked, worst)};
}

Verdict criterion4() {
  double worst_sandwich = 0.0;
  double worst_monotone = 0.0;
  double worst_relative = 0.0;
  double worst_rho = 0.0;
  for (int t = 0; t < kPropertyInstances; ++t) {
    try {
      const Instance in = learn_instance(t, 10);
      const Matrix& star = in.lqr.theta.matrix();
      const double scale = std::max(1.0, spectral_norm(star));
      const Matrix* prev = nullptr;
      for (const PolicyIterate& it : in.res.iterates) {
        const double below_star = -min_eigenvalue_symmetric(it.theta.matrix() - star);
        worst_sandwich = std::max(worst_sandwich, below_star);
        worst_relative = std::max(worst_relative, below_star / scale);
        if (prev) {
          const double increase = -min_eigenvalue_symmetric(*prev - it.theta.matrix());
          worst_monotone = std::max(worst_monotone, increase);
          worst_relative = std::max(worst_relative, increase / scale);
        }
        prev = &it.theta.matrix();
      }
      for (const IterationRecord& r : in.res.diagnostics.records) {
        worst_rho = std::max(worst_rho, r.spectral_radius);
      }
      worst_rho = std::max(worst_rho, spectral_radius(closed_loop(in.sys, in.res.gain.matrix())));
    } catch (const std::exception& e) {
      return {false, fmt("instance %d: %s", t, e.what())};
    }
  }
  const bool pass = worst_sandwich <= 1e-9 && worst_monotone <= 1e-9 && worst_rho < 1.0;
  return {pass, fmt("worst eigenvalue violation of Theta* <= Theta^{i+1}: %.3e, of Theta^{i+1} <= Theta^i: %.3e "
                    "(%.3e relative to max(1, |Theta*|)); worst spectral radius %.6f; bounds 1e-9, < 1",
                    worst_sandwich, worst_monotone, worst_relative, worst_rho)};
}

/// Worst e_{i+1} / (gamma e_i^2) with gamma = e_2 / e_1^2, over steps with e_{i+1} above `floor`.
double rate_ratio(const std::vector<double>& e, double floor, int& checked) {
  double worst = 0.0;
  if (e.size() < 2 || e[0] <= floor || e[1] <= floor) {
    return worst;
  }
  const double gamma = e[1] / (e[0] * e[0]);
  for (std::size_t i = 1; i + 1 < e.size() && e[i + 1] > floor; ++i) {
    worst = std::max(worst, e[i + 1] / (gamma * e[i] * e[i]));
    ++checked;
  }
  return worst;
}

Verdict criterion5() {
  int checked = 0;
  int checked_model = 0;
  int checked_coarse = 0;
  double worst = 0.0;
  double worst_model = 0.0;
  double worst_coarse = 0.0;
  for (int t = 0; t < kPropertyInstances; ++t) {
    try {
      const Instance in = learn_instance(t, 10);
      const Matrix& star = in.lqr.theta.matrix();
      std::vector<double> e;
      for (const PolicyIterate& it : in.res.iterates) {
        e.push_back(spectral_norm(it.theta.matrix() - star));
      }
      std::vector<double> em;
      for (const PolicyIterate& it : hewer_iteration(in.sys, in.w, in.K0, 10)) {
        em.push_back(spectral_norm(it.theta.matrix() - star));
      }
      worst = std::max(worst, rate_ratio(e, 1e-13, checked));
      worst_model = std::max(worst_model, rate_ratio(em, 1e-13, checked_model));
      worst_coarse = std::max(worst_coarse, rate_ratio(e, 1e-9 * (1.0 + spectral_norm(star)), checked_coarse));
    } catch (const std::exception& ex) {
      return {false, fmt("instance %d: %s", t, ex.what())};
    }
  }
  return {worst <= 1.5,
          fmt("%d steps above the 1e-13 floor, worst e_{i+1} / (gamma e_i^2) = %.3g (bound 1.5); "
              "model-based iteration from the same K0: %.3g over %d steps; "
              "learned iterates above a 1e-9 (1 + |Theta*|) floor: %.3g over %d steps",
              checked, worst, worst_model, checked_model, worst_coarse, checked_coarse)};
}

Verdict criterion6() {
  double worst_rho = 0.0;
  double worst_contraction = 0.0;
  int worst_at = -1;
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + t % 5;
    const Index m = 1 + (t / 5) % 2;
    const Seed seed = derive_seed(0xdeadbeef, static_cast<std::uint64_t>(t));
    try {
      const LinearSystem sys = random_controllable_system(n, m, seed);
      const LearningData data = collect_learning_data(sys, start_state(n, seed), seed);
      const Matrix Acl = closed_loop(sys, deadbeat_from_data(data).matrix());
      const double rho = spectral_radius(Acl);
      if (rho > worst_rho) {
        worst_rho = rho;
        worst_at = t;
      }
      Matrix Pn = Matrix::Identity(n, n);
      for (Index k = 0; k < n; ++k) {
        Pn = Acl * Pn;
      }
      auto rng = make_rng(seed, 0x78);
      for (int j = 0; j < 20; ++j) {
        const Vector x0 = uniform_vector(n, -1.0, 1.0, rng);
        worst_contraction = std::max(worst_contraction, (Pn * x0).norm() / x0.norm());
      }
    } catch (const std::exception& e) {
      return {false, fmt("system %d: %s", t, e.what())};
    }
  }
  const bool pass = worst_rho <= 1e-6 && worst_contraction <= 1e-6;
  return {pass, fmt("50 systems, worst max|eig| = %.3e (system %d), worst |x_n| / |x_0| = %.3e; bounds 1e-6",
                    worst_rho, worst_at, worst_contraction)};
}

Verdict criterion7() {
  int failures = 0;
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + t % 5;
    const Index m = 1 + (t / 5) % 2;
    const Seed seed = derive_seed(0x57, static_cast<std::uint64_t>(t));
    const LinearSystem sys = random_controllable_system(n, m, seed);
    for (Index L : {1, 2}) {
      const Index order = L + n;
      const Index N = min_pe_length(m, order) + 2;
      const Trajectory traj = simulate(sys, start_state(n, seed), generate_pe_input(m, order, N, seed));
      const Index rank = numerical_rank_column_scaled(willems_matrix(traj, L));
      failures += rank == L * m + n ? 0 : 1;
      ++checked;
    }
  }
  return {failures == 0, fmt("%d of %d (instance, L) pairs with rank != Lm + n", failures, checked)};
}

Verdict criterion8() {
  NoisyExperimentOptions opts;
  opts.n = 5;
  opts.m = 2;
  opts.trials = 100;
  opts.iterations = 10;
  opts.jobs = jobs();
  opts.w_max = 1e-3;
  const NoisyStatistics a = noisy_experiment(opts);
  opts.w_max = 1e-2;
  const NoisyStatistics b = noisy_experiment(opts);
  const bool pass_a = a.mean_error < 0.5 && a.destabilized_count == 0;
  const bool pass_b = b.destabilized_count <= 5 && b.mean_error < 5.0;
  return {pass_a && pass_b,
          fmt("w_max=1e-3: mean=%.4g (stabilizing only %.4g) destabilized=%d failures=%d [%s]; "
              "w_max=1e-2: mean=%.4g (stabilizing only %.4g) destabilized=%d failures=%d [%s]; "
              "bounds mean < 0.5 and 0 destabilized, then <= 5 destabilized and mean < 5",
              a.mean_error, a.mean_error_stabilizing, a.destabilized_count, a.failure_count, pass_a ? "ok" : "fail",
              b.mean_error, b.mean_error_stabilizing, b.destabilized_count, b.failure_count, pass_b ? "ok" : "fail")};
}

Verdict criterion9() {
  // Perturbed Bellman identity against the clean evaluation at the same gain.
  double worst = 0.0;
  int samples = 0;
  int skipped = 0;
  for (int t = 0; t < 10; ++t) {
    const Seed seed = derive_seed(0x36, static_cast<std::uint64_t>(t));
    const LinearSystem sys = random_controllable_system(5, 2, seed);
    const CostWeights w = CostWeights::identity(5, 2);
    const LearningData clean = collect_learning_data(sys, start_state(5, seed), seed);
    const NoisyData noisy = add_noise(clean, 1e-3, seed);
    const Matrix wbar = noise_increments(noisy, sys.A());
    try {
      QLearningOptions opts;
      opts.fixed_iterations = 10;
      const Gain K0 = deadbeat_from_data(noisy.measured());
      const QLearningResult res = run_qlearning_noisy(noisy, K0, w, opts);
      Gain K = K0;
      for (const PolicyIterate& it : res.iterates) {
        const Matrix Phi = PhiMatrix(sys, K).matrix();
        if (spectral_radius(Phi) >= 1.0) {
          ++skipped;
          K = it.gain;
          continue;
        }
        const Matrix dT = it.theta.matrix() - solve_dlyap(Phi, w.Qbar());
        for (Index k = 0; k < clean.eta(); ++k) {
          const Vector z = noisy.measured().z().col(k);
          const double eps = epsilon_term(it.theta, K, z, wbar.col(k), sys.S());
          const double lhs = z.dot(dT * z) - (Phi * z).dot(dT * (Phi * z));
          worst = std::max(worst, std::abs(lhs - eps) / (1.0 + std::abs(eps)));
          ++samples;
        }
        K = it.gain;
      }
    } catch (const std::exception& e) {
      ++skipped;
    }
  }
  const bool identity_ok = samples > 0 && worst <= 1e-8;

  std::mt19937_64 rng(0x4c37);
  int norm_bound_violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const Index d = 2 + t % 10;
    const Matrix P = oracle::random_symmetric(d, rng, 10.0);
    const double eta = static_cast<double>(triangular_number(d));
    if (spectral_norm(P) > std::sqrt(eta) * vec_sym(P).entries().norm()) {
      ++norm_bound_violations;
    }
  }

  int reduction_mismatches = 0;
  for (int t = 0; t < 10; ++t) {
    const Seed seed = derive_seed(0x30, static_cast<std::uint64_t>(t));
    const LinearSystem sys = random_controllable_system(4, 2, seed);
    const CostWeights w = CostWeights::identity(4, 2);
    const LearningData clean = collect_learning_data(sys, start_state(4, seed), seed);
    const NoisyData noisy = add_noise(clean, 0.0, seed);
    QLearningOptions opts;
    opts.fixed_iterations = 10;
    try {
      const Gain K0 = deadbeat_from_data(clean);
      const Gain K0n = deadbeat_from_data(noisy.measured());
      const QLearningResult a = run_qlearning(clean, K0, w, opts);
      const QLearningResult b = run_qlearning_noisy(noisy, K0n, w, opts);
      if (K0.matrix() != K0n.matrix() || a.gain.matrix() != b.gain.matrix() || a.theta.matrix() != b.theta.matrix()) {
        ++reduction_mismatches;
      }
    } catch (const std::exception&) {
      ++reduction_mismatches;
    }
  }

  const bool pass = identity_ok && norm_bound_violations == 0 && reduction_mismatches == 0;
  return {pass, fmt("identity: %d samples, worst residual / (1 + |eps|) = %.3e (bound 1e-8), %d iterates skipped; "
                    "norm inequality: %d of 1000 violated; zero-noise reduction: %d of 10 not bitwise identical",
                    samples, worst, skipped, norm_bound_violations, reduction_mismatches)};
}

Verdict criterion10() {
  std::mt19937_64 rng(0x10);
  double worst = 0.0;
  int cases = 0;
  for (Index d = 2; d <= 8; ++d) {
    for (int t = 0; t < 2000; ++t) {
      const Vector x = oracle::random_vector(d, rng);
      const Matrix P = oracle::random_symmetric(d, rng);
      const double lhs = quad_monomials(x).dot(vec_sym(P).entries());
      worst = std::max(worst, std::abs(lhs - oracle::quadratic_form(x, P)));
      ++cases;
    }
  }
  return {worst <= 1e-10, fmt("%d cases, d = 2..8, worst |x~ . vec(P) - x^T P x| = %.3e; bound 1e-10", cases, worst)};
}

const std::function<Verdict()> kCriteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                              criterion6, criterion7, criterion8, criterion9, criterion10};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  int first = 1;
  int last = 10;
  if (argc > 1) {
    first = last = std::atoi(argv[1]);
    if (first < 1 || first > 10) {
      std::cerr << "usage: " << argv[0] << " [1-10]\n";
      return 2;
    }
  }
  bool all = true;
  for (int c = first; c <= last; ++c) {
    Verdict v;
    try {
      v = kCriteria[c - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("unexpected error: ") + e.what()};
    }
    std::cout << "criterion " << c << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
