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

enum class ProfileKind { kSineSquared, kSquareSmooth, kConstant };

// Measurement-strength profile g(t) on [0, T], normalized so the integral
// over the full window is exactly 1. The callable and the closed-form
// integral are cross-checked by Simpson quadrature at construction (1e-8).
// Smooth kinds vanish at both endpoints; the constant kind does not and is
// reported as non-smooth. The square-smooth kind is a plateau with raised
// cosine ramps over the first and last quarter of the window.
class CouplingProfile {
 public:
  static CouplingProfile make(ProfileKind kind, double duration);

  ProfileKind kind() const { return kind_; }
  double duration() const { return duration_; }
  bool smooth() const { return kind_ != ProfileKind::kConstant; }
  // Largest value of g over the window.
  double peak() const;

  // g(t); zero outside [0, T].
  double operator()(double t) const;
  // Closed-form integral of g from 0 to t, clamped to the window.
  double integral_to(double t) const;

 private:
  CouplingProfile(ProfileKind kind, double duration)
      : kind_(kind), duration_(duration) {}

  ProfileKind kind_;
  double duration_;
};

// Ramp fraction of the square-smooth profile (per side).
inline constexpr double kRampFraction = 0.25;
// Upper bound enforced on peak(g) * ||A|| * sigma_P / gap. Stronger couplings
// leave the regime where the protected state tracks its eigenstate, so setup
// construction rejects them.
inline constexpr double kCouplingRatioCap = 0.1;

// A protected measurement: the system sits in a nondegenerate eigenstate of
// the protecting Hamiltonian while g(t) A (x) P couples it to the pointer.
// Construction validates the eigenstate (residual below 1e-8), records the
// spectral gap, and enforces the weak-coupling cap above.
struct PMSetup {
  PMSetup(QuantumState system_state, Observable protecting_hamiltonian,
          Observable measured, CouplingProfile profile, PointerState pointer,
          bool include_pointer_kinetic = false);

  QuantumState system_state;
  Observable protecting_hamiltonian;
  Observable measured;
  CouplingProfile profile;
  PointerState pointer;
  bool include_pointer_kinetic;

  // Filled in by the constructor.
  double energy;          // eigenvalue of the protected state
  double gap;             // distance to the nearest other eigenvalue
  double coupling_ratio;  // peak(g) * ||A|| * sigma_P / gap
};

struct PMOutcome {
  CompositeState final_state;
  double shift;                    // <X>_final - <X>_initial
  double min_protection_fidelity;  // min over checkpoints of |<psi|psi(t)>|^2
  std::vector<std::pair<double, double>> mean_trajectory;      // (t, <X(t)>)
  std::vector<std::pair<double, double>> fidelity_trajectory;  // (t, fidelity)
};

// Evolves the composite over [0, T] with midpoint-frozen steps and returns the
// pointer shift. For T * gap >> 1 the shift approaches <A> in the protected
// state. Checkpoints for the trajectories are spaced T/16 apart.
PMOutcome run_protected_pm(const PMSetup& setup, int steps);

struct PartialShift {
  double measured;   // simulated <X(dt)> - <X(0)>
  double predicted;  // <A> * integral of g from 0 to dt
};

// Stops the run at time dt in [0, T] and compares the simulated shift against
// the accumulated-coupling prediction.
PartialShift partial_shift(const PMSetup& setup, double dt, int steps);

}  // namespace pmsim
