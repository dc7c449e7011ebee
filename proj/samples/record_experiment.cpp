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
// Simulates a plant under a persistently exciting input and writes the
// samples in the format read by `ddlqr solve --data` and `ddlqr pe-check`.
//
//   sample_record_experiment plant.sys out.dat [seed]

#include <fstream>
#include <iostream>
#include <string>

#include "ddlqr/ddlqr.hpp"

int main(int argc, char** argv) {
  using namespace ddlqr;
  if (argc < 3) {
    std::cerr << "usage: " << argv[0] << " system-file out-file [seed]\n";
    return 2;
  }
  try {
    const LinearSystem sys = read_system_file(argv[1]);
    const Seed seed = argc > 3 ? std::stoull(argv[3]) : 0;
    const Index N = eta_for(sys.n(), sys.m()) + 2;
    const auto u = generate_pe_input(sys.m(), sys.n() + 1, N, seed);
    auto rng = make_rng(seed, 1);
    const Trajectory traj = simulate(sys, uniform_vector(sys.n(), -1.0, 1.0, rng), u);
    std::ofstream out(argv[2]);
    write_data(out, traj);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
