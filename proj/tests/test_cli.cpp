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
#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "support/oracles.hpp"

namespace {

using namespace ddlqr;
namespace fs = std::filesystem;

const std::string kSamples = DDLQR_SAMPLES_DIR;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "ddlqr");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

double last_number(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string last;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      last = line;
    }
  }
  return std::stod(last);
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("ddlqr_test_" + name); }

TEST(CliSolve, ScalarPlantGivesGoldenGain) {
  const CliRun r = run({"solve", kSamples + "/scalar_unit.sys", "--weights", kSamples + "/unit_weights.txt"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(last_number(r.out), 1.0 / oracle::golden(), 1e-8);
}

TEST(CliSolve, MissingFileIsUsageError) {
  const CliRun r = run({"solve", "/nonexistent/x.sys"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/x.sys"), std::string::npos);
}

TEST(CliSolve, AuditAndJsonReport) {
  const fs::path report = temp_file("report.json");
  const CliRun r = run({"solve", kSamples + "/plant3.sys", "--iterations", "10", "--audit", "--out", report.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("audit:"), std::string::npos);
  std::ifstream in(report);
  const Json j = Json::parse(in);
  EXPECT_EQ(j["n"], 3);
  EXPECT_EQ(j["m"], 2);
  EXPECT_EQ(j["eta"], 15);
  EXPECT_EQ(j["iterations"], 10);
  EXPECT_EQ(j["per_iteration"].size(), 10u);
  EXPECT_LE(j["audit"]["error_vs_optimal"].get<double>(), 1e-10);
  fs::remove(report);
}

TEST(CliSolve, RecordedDataMatchesSimulatedPlant) {
  const fs::path data = temp_file("plant3.dat");
  {
    const LinearSystem sys = read_system_file(kSamples + "/plant3.sys");
    const Trajectory t = simulate(sys, Vector::Constant(3, 0.2), generate_pe_input(2, 4, 17, 3));
    std::ofstream out(data);
    write_data(out, t);
  }
  const CliRun r = run({"solve", "--data", data.string(), "--iterations", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("10 iterations"), std::string::npos);
  fs::remove(data);
}

TEST(CliSolve, NoInputIsUsageError) { EXPECT_EQ(run({"solve"}).code, 2); }

TEST(CliBench, SmallRunWritesHeaderAndRows) {
  const CliRun r = run({"bench", "--dims", "3", "--trials", "5", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, cli::kBenchHeader);
  EXPECT_EQ(row.rfind("3,5,", 0), 0u);
  const double avg = std::stod(row.substr(4, row.find(',', 4) - 4));
  EXPECT_LE(avg, 1e-10);
}

TEST(CliNoisy, SingleTrialIsReproducible) {
  const fs::path a = temp_file("noisy_a.csv");
  const fs::path b = temp_file("noisy_b.csv");
  ASSERT_EQ(run({"noisy", "--trials", "1", "--seed", "4", "--out", a.string()}).code, 0);
  const CliRun r = run({"noisy", "--trials", "1", "--seed", "4", "--out", b.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("destabilized="), std::string::npos);
  std::ifstream fa(a);
  std::ifstream fb(b);
  const std::string ca((std::istreambuf_iterator<char>(fa)), {});
  const std::string cb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_EQ(ca, cb);
  EXPECT_EQ(ca.rfind(cli::kNoisyHeader, 0), 0u);
  EXPECT_EQ(std::count(ca.begin(), ca.end(), '\n'), 2);
  fs::remove(a);
  fs::remove(b);
}

TEST(CliPeCheck, ConstantInputIsNotExciting) {
  const CliRun r = run({"pe-check", kSamples + "/constant_input.dat", "--order", "2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("NOT persistently exciting"), std::string::npos);
}

TEST(CliPeCheck, OrderBeyondLengthCitesTheBound) {
  const CliRun r = run({"pe-check", kSamples + "/constant_input.dat", "--order", "6"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("N >= (m+1)L-1 = 11"), std::string::npos) << r.out;
}

TEST(CliPeCheck, RecordedExperimentPasses) {
  const fs::path data = temp_file("pe.dat");
  {
    const LinearSystem sys = read_system_file(kSamples + "/plant3.sys");
    const Trajectory t = simulate(sys, Vector::Constant(3, -0.3), generate_pe_input(2, 4, 17, 8));
    std::ofstream out(data);
    write_data(out, t);
  }
  const CliRun r = run({"pe-check", data.string(), "--order", "4"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  fs::remove(data);
}

TEST(CliDeadbeat, ScalarPlant) {
  const CliRun r = run({"deadbeat", kSamples + "/scalar_deadbeat.sys"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(last_number(r.out), 0.4, 1e-10);
}

TEST(CliDeadbeat, AuditReportsSpectrum) {
  const CliRun r = run({"deadbeat", kSamples + "/plant3.sys", "--audit"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("max |eig(A - B K)|"), std::string::npos);
}

TEST(CliDeadbeat, InsufficientDataCitesTheBound) {
  const fs::path data = temp_file("short.dat");
  {
    std::ofstream out(data);
    out << "3 2 4\n";
    for (int k = 0; k < 4; ++k) {
      out << "1 0 0.1 0.2 0.3\n";
    }
  }
  const CliRun r = run({"deadbeat", "--data", data.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("(m+1)(n+1)-1"), std::string::npos) << r.err;
  fs::remove(data);
}

TEST(Cli, HelpAndUnknownCommand) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

}  // namespace
