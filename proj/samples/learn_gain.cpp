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
// Learns the LQR gain of a random plant without using its model, then
// compares with the Riccati solution.

#include <iostream>

#include "ddlqr/ddlqr.hpp"

int main() {
  using namespace ddlqr;
  const Seed seed = 2026;
  const LinearSystem sys = random_controllable_system(4, 2, seed);
  const CostWeights w = CostWeights::identity(4, 2);

  auto rng = make_rng(seed, 1);
  const LearningData data = collect_learning_data(sys, uniform_vector(4, -1.0, 1.0, rng), seed);
  const Gain K0 = deadbeat_from_data(data);

  QLearningOptions opts;
  opts.fixed_iterations = 10;
  const QLearningResult res = run_qlearning(data, K0, w, opts);
  const LqrSolution lqr = solve_lqr(sys, w);

  std::cout << "learned gain:\n" << res.gain.matrix() << "\n";
  std::cout << "|K - K*| = " << gain_distance(res.gain, lqr.K) << "\n";
  for (const IterationRecord& r : res.diagnostics.records) {
    std::cout << "iteration " << r.iteration << ": |dK| = " << r.gain_delta << ", cond V = " << r.cond_V << "\n";
  }
}
