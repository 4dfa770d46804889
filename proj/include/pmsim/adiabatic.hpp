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

#include <utility>
#include <vector>

#include "pmsim/composite.hpp"
#include "pmsim/pointer.hpp"
#include "pmsim/qcore.hpp"

namespace pmsim {

// Truncated oscillator displaced so that the coherent state |alpha> is the
// nondegenerate ground state of H = (adag - conj(alpha))(a - alpha), with
// omega = m = hbar = 1 and quadratures q = (a + adag)/sqrt(2),
// p = -i (a - adag)/sqrt(2).
struct OscillatorSystem {
  int fock_dim;
  cxd alpha;
  Observable hamiltonian;
  Observable q;
  Observable p;
  QuantumState ground;
  double energy;
  double gap;
};

// Validates the ground-state residual, the spectral gap, and the truncation
// tail (top 10% of Fock levels below 1e-8) at construction. Requires
// fock_dim >= 40 and |alpha| <= 2, the range those bounds are good for.
OscillatorSystem build_displaced_oscillator(cxd alpha, int fock_dim = 48);

// Protected system coupled to the pointer through P (x) A / T held constant
// over the window [0, T], so the coupling integral is exactly 1.
struct ApmConfig {
  OscillatorSystem system;
  Observable measured;
  double duration;
  PointerState pointer;
};

struct ApmOutcome {
  CompositeState final_state;
  double shift;
  double pointer_variance;
  // Pointer mean sampled at seventeen evenly spaced checkpoints.
  std::vector<std::pair<double, double>> mean_trajectory;
  double max_truncation_tail;
};

// Exact evolution on the pointer grid (the frozen coupling makes each
// momentum mode autonomous). steps must resolve the oscillator period with
// at least 50 steps per 2 pi; the truncation tail is re-checked mid-run.
ApmOutcome run_apm(const ApmConfig& config, int steps);

// Default step count: 64 steps per oscillator period, at least 64.
int apm_default_steps(double duration);

// Mean pointer displacement at time t predicted by the first-order Heisenberg
// solution: (t/T) expA + (q0 sin t + p0 (1 - cos t)) / T, with q0 and p0 the
// initial oscillator deviations. A pure formula evaluator shared by the
// trajectory oracle (quantum means, q0 = p0 = 0) and the stochastic sampler
// (per-trial classical draws).
double heisenberg_pointer_mean(double t, double duration, double exp_a, double q0,
                               double p0);

struct ApmFoTerm {
  int level;
  double gap;            // E - E_m
  cxd matrix_element;    // <E_m|A|psi>
  double sector_norm;    // norm of the extracted m-sector
  double scaled_norm;    // sector_norm * T * |gap| / |matrix_element|
  double shape_match;    // squared overlap with the derivative-packet template
};

struct ApmFirstOrder {
  CompositeState state;
  int active_terms;  // levels with |<E_m|A|psi>| above threshold
  std::vector<ApmFoTerm> terms;
};

// First-order final state: the undisturbed system attached to the ideally
// translated packet, plus one excited-level sector per nonzero coupling
// matrix element. The distorted packets are extracted from the exactly
// evolved state rather than assumed, and each term reports how well it
// matches the derivative-of-the-packet form the first-order expansion
// predicts. Throws on near-degenerate level spacings below 1e-6.
ApmFirstOrder apm_first_order_state(const ApmConfig& config);

struct ApmVarianceReport {
  double variance;
  // Leading-order coefficient T^2 (Var(x_f) - Var(x_0)) per initial width,
  // with numerical uncertainties from grid refinement.
  std::vector<double> var_grid;
  std::vector<double> coefficients;
  std::vector<double> coefficient_errors;
  double width_slope;
  double width_slope_se;
  bool width_dependent;  // |slope| exceeds five standard errors
};

// Variance of the exact final pointer state, plus a sweep over initial widths
// showing whether the leading correction coefficient depends on Var(x_0).
ApmVarianceReport apm_qm_variance(const ApmConfig& config,
                                  const std::vector<double>& width_grid = {0.25, 0.5,
                                                                           1.0});

}  // namespace pmsim
