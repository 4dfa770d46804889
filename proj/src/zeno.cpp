// Copyright 2026 The pmsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pmsim/zeno.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "pmsim/stats.hpp"

namespace pmsim {

namespace {

constexpr double kContaminationThreshold = 0.01;

void validate_config(const ZpmConfig& config) {
  if (config.n_rounds < 1) {
    throw ConfigError("zpm: n_rounds must be at least 1");
  }
  if (config.measured.basis() != config.system_state.basis() ||
      config.measured.dim() != config.system_state.dim()) {
    throw ConfigError("zpm: measured observable does not match the system state");
  }
}

}  // namespace

ZpmOutcome run_zpm(const ZpmConfig& config) {
  validate_config(config);
  int n = config.n_rounds;
  double weight = 1.0 / n;

  CompositeState state = CompositeState::product(config.system_state, config.pointer);
  state.to_momentum();  // couplings are diagonal here; projections work anywhere
  double success = 1.0;
  for (int round = 0; round < n; ++round) {
    if (config.ordering == ZpmOrdering::kProjectThenCouple) {
      success *= state.project_system(config.system_state);
      apply_coupling_kick(state, config.measured, weight);
    } else {
      apply_coupling_kick(state, config.measured, weight);
      success *= state.project_system(config.system_state);
    }
  }
  check_boundary_mass(state);
  PacketMoments moments = position_moments(state);
  return ZpmOutcome{std::move(state), success, moments.mean, moments.variance};
}

CompositeState zpm_first_order_branch(const ZpmConfig& config) {
  validate_config(config);
  double exp_a = expectation(config.system_state, config.measured);
  double var_a = variance_obs(config.system_state, config.measured);
  double correction = var_a / (2.0 * config.n_rounds);

  CompositeState state = CompositeState::product(config.system_state, config.pointer);
  state.to_momentum();
  const PointerGrid& grid = state.grid();
  MatC amps = state.amps();
  for (int i = 0; i < grid.n_points; ++i) {
    double p = grid.momentum(i);
    // Translation by <A> plus the second-derivative correction, both spectral.
    cxd factor = std::polar(1.0, -exp_a * p) * (1.0 - correction * p * p);
    amps.row(i) *= factor;
  }
  amps /= amps.norm();
  return CompositeState(grid, std::move(amps), Rep::kMomentum, state.sys_basis());
}

ZpmVarianceReport zpm_qm_variance(const ZpmConfig& config) {
  validate_config(config);
  double var_a = variance_obs(config.system_state, config.measured);
  double var_x0 = position_moments(config.pointer).variance;

  ZpmOutcome outcome = run_zpm(config);
  ZpmVarianceReport report{};
  report.variance = outcome.pointer_variance;
  if (var_a < 1e-14) {
    return report;  // coefficient and contamination are identically zero
  }
  double n = config.n_rounds;
  report.first_order_coefficient = n * (outcome.pointer_variance - var_x0) / var_a;

  ZpmConfig doubled = config;
  doubled.n_rounds = 2 * config.n_rounds;
  ZpmOutcome outcome2 = run_zpm(doubled);
  double coeff2 = 2.0 * n * (outcome2.pointer_variance - var_x0) / var_a;
  report.contamination_fraction =
      std::abs(report.first_order_coefficient - coeff2) /
      std::max(std::abs(report.first_order_coefficient), 1e-30);
  report.contaminated = report.contamination_fraction > kContaminationThreshold;
  return report;
}

PointerConstantsFit fit_pointer_constants(const std::vector<double>& var_x0_grid,
                                          const QuantumState& psi, const Observable& a,
                                          int n_rounds, int n_points,
                                          double extent_sigmas) {
  std::set<double> distinct(var_x0_grid.begin(), var_x0_grid.end());
  if (distinct.size() < 5) {
    throw ConfigError("fit_pointer_constants: need at least 5 distinct variances");
  }
  for (double v : var_x0_grid) {
    if (!(v > 0.0)) {
      throw ConfigError("fit_pointer_constants: variances must be positive");
    }
  }

  PointerConstantsFit fit{};
  std::vector<double> lin, quad, ones, inv;
  for (double v : var_x0_grid) {
    double sigma = std::sqrt(v);
    PointerGrid grid = make_grid(sigma, 0.0, n_points, extent_sigmas);
    ZpmConfig config{n_rounds, psi, a, make_gaussian(grid, 0.0, sigma)};
    ZpmVarianceReport report = zpm_qm_variance(config);
    if (report.contaminated) {
      throw NumericalError(
          "fit_pointer_constants: second-order contamination at Var(x0) = " +
          std::to_string(v) + " (fraction " +
          std::to_string(report.contamination_fraction) + ")");
    }
    fit.var_grid.push_back(v);
    fit.coefficients.push_back(report.first_order_coefficient);
    lin.push_back(v);
    quad.push_back(v * v);
    ones.push_back(1.0);
    inv.push_back(1.0 / v);
  }

  TwoBasisFit ansatz = fit_two_basis(lin, quad, fit.coefficients);
  fit.k1 = ansatz.k1;
  fit.k2 = ansatz.k2;
  fit.k1_se = ansatz.k1_se;
  fit.k2_se = ansatz.k2_se;
  fit.rms_residual = ansatz.rms_residual;
  fit.condition = ansatz.condition;

  TwoBasisFit alt = fit_two_basis(ones, inv, fit.coefficients);
  fit.alt_b0 = alt.k1;
  fit.alt_b1 = alt.k2;
  fit.alt_rms_residual = alt.rms_residual;
  return fit;
}

}  // namespace pmsim
