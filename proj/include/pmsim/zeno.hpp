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

#pragma once

#include <vector>

#include "pmsim/composite.hpp"
#include "pmsim/pointer.hpp"
#include "pmsim/qcore.hpp"

namespace pmsim {

// Round ordering within one protection cycle. The default projects first and
// couples second, so the final round leaves one coupling slice unprotected;
// the reversed ordering ends on a projection and stays a product state.
enum class ZpmOrdering { kProjectThenCouple, kCoupleThenProject };

// N protection rounds with total coupling weight 1 split evenly, so each
// round moves the pointer by a_i / N conditional on the system outcome.
struct ZpmConfig {
  int n_rounds;
  QuantumState system_state;
  Observable measured;
  PointerState pointer;
  ZpmOrdering ordering = ZpmOrdering::kProjectThenCouple;
};

struct ZpmOutcome {
  CompositeState branch_state;  // post-selected on every protection succeeding
  double success_probability;
  double pointer_mean;
  double pointer_variance;
};

// Runs the N-round protocol exactly on the pointer grid and post-selects the
// all-protections-succeed branch. Throws OrthogonalBranchError if a protection
// annihilates the state.
ZpmOutcome run_zpm(const ZpmConfig& config);

// Product-form approximation of the post-selected branch: the initial packet
// translated by <A> plus (Var(A)/2N) times its second derivative, normalized,
// attached to the undisturbed system state.
CompositeState zpm_first_order_branch(const ZpmConfig& config);

struct ZpmVarianceReport {
  double variance;
  // N * (Var(x_f) - Var(x_0)) / Var(A); zero when Var(A) vanishes.
  double first_order_coefficient;
  // Relative drift of the coefficient when N doubles; flags second-order
  // contamination above one percent rather than reporting it silently.
  double contamination_fraction;
  bool contaminated;
};

ZpmVarianceReport zpm_qm_variance(const ZpmConfig& config);

// Least-squares constants of the pointer variance law. The first-order
// coefficient c(V) with V = Var(x_0) is fitted to the ansatz k1 V + k2 V^2;
// because that form cannot represent a constant offset, the same data are
// also fitted to b0 + b1 / V and both residuals are reported.
struct PointerConstantsFit {
  double k1;
  double k2;
  double k1_se;
  double k2_se;
  double rms_residual;
  double condition;
  double alt_b0;
  double alt_b1;
  double alt_rms_residual;
  std::vector<double> var_grid;
  std::vector<double> coefficients;
};

// Computes first_order_coefficient on a grid of initial variances (pointer
// packets rebuilt per point with the given grid resolution) and fits the law.
// Requires at least five distinct variances; throws if any point fails the
// contamination check or if a fit is ill-conditioned.
PointerConstantsFit fit_pointer_constants(const std::vector<double>& var_x0_grid,
                                          const QuantumState& psi, const Observable& a,
                                          int n_rounds, int n_points = 1024,
                                          double extent_sigmas = 40.0);

}  // namespace pmsim
