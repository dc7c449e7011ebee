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
#ifndef DDLQR_REPORT_HPP
#define DDLQR_REPORT_HPP

#include <cmath>
#include <optional>

#include <nlohmann/json.hpp>

#include "ddlqr/common.hpp"
#include "ddlqr/oracle.hpp"
#include "ddlqr/qlearn.hpp"

namespace ddlqr {

using Json = nlohmann::json;

/// Row-major nested arrays.
inline Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < M.cols(); ++j) {
      row.push_back(M(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

// JSON has no NaN; undefined entries become null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

/// Model-side comparison attached when the true plant is known.
struct AuditSummary {
  double error_vs_optimal = 0.0;
  double final_spectral_radius = 0.0;
  Matrix optimal_gain;
};

inline AuditSummary audit_result(const QLearningResult& res, const LinearSystem& sys, const CostWeights& w) {
  const LqrSolution lqr = solve_lqr(sys, w);
  return {gain_distance(res.gain, lqr.K), spectral_radius(closed_loop(sys, res.gain.matrix())), lqr.K.matrix()};
}

inline Json qlearning_report(const QLearningResult& res, Index n, Index m,
                             const std::optional<AuditSummary>& audit = std::nullopt) {
  Json per_iteration = Json::array();
  for (const IterationRecord& r : res.diagnostics.records) {
    Json rec = {{"gain_delta", r.gain_delta},
                {"cond_V", detail::number_or_null(r.cond_V)},
                {"min_eig_theta", r.min_eig_theta},
                {"monotone_gap", detail::number_or_null(r.monotone_gap)}};
    if (std::isfinite(r.spectral_radius)) {
      rec["spectral_radius"] = r.spectral_radius;
    }
    per_iteration.push_back(std::move(rec));
  }
  Json report = {{"n", n},
                 {"m", m},
                 {"eta", eta_for(n, m)},
                 {"iterations", res.iterations},
                 {"converged", res.converged},
                 {"final_gain", matrix_to_json(res.gain.matrix())},
                 {"final_theta", matrix_to_json(res.theta.matrix())},
                 {"per_iteration", std::move(per_iteration)},
                 {"wall_time_seconds", res.wall_time_seconds}};
  if (audit) {
    report["audit"] = {{"error_vs_optimal", audit->error_vs_optimal},
                       {"final_spectral_radius", audit->final_spectral_radius},
                       {"optimal_gain", matrix_to_json(audit->optimal_gain)}};
  }
  return report;
}

}  // namespace ddlqr

#endif  // DDLQR_REPORT_HPP
