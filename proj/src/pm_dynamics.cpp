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

#include "pmsim/pm_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pmsim {

namespace {

double simpson_integral(const CouplingProfile& g, double a, double b, int panels) {
  double h = (b - a) / panels;
  double sum = g(a) + g(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return sum * h / 3.0;
}

}  // namespace

CouplingProfile CouplingProfile::make(ProfileKind kind, double duration) {
  if (!(duration > 0.0)) {
    throw ConfigError("coupling profile duration must be positive, got " +
                      std::to_string(duration));
  }
  CouplingProfile profile(kind, duration);
  double total = simpson_integral(profile, 0.0, duration, 2048);
  if (std::abs(total - 1.0) > 1e-8) {
    throw NumericalError("coupling profile integral deviates from 1: " +
                         std::to_string(total));
  }
  return profile;
}

double CouplingProfile::peak() const {
  switch (kind_) {
    case ProfileKind::kSineSquared:
      return 2.0 / duration_;
    case ProfileKind::kSquareSmooth:
      return 1.0 / (duration_ * (1.0 - kRampFraction));
    case ProfileKind::kConstant:
      return 1.0 / duration_;
  }
  return 0.0;
}

double CouplingProfile::operator()(double t) const {
  if (t < 0.0 || t > duration_) return 0.0;
  switch (kind_) {
    case ProfileKind::kSineSquared: {
      double s = std::sin(std::numbers::pi * t / duration_);
      return 2.0 / duration_ * s * s;
    }
    case ProfileKind::kSquareSmooth: {
      double ramp = kRampFraction * duration_;
      double h = peak();
      if (t < ramp) return h * 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp));
      if (t > duration_ - ramp) {
        return h * 0.5 * (1.0 - std::cos(std::numbers::pi * (duration_ - t) / ramp));
      }
      return h;
    }
    case ProfileKind::kConstant:
      return 1.0 / duration_;
  }
  return 0.0;
}

double CouplingProfile::integral_to(double t) const {
  t = std::clamp(t, 0.0, duration_);
  switch (kind_) {
    case ProfileKind::kSineSquared:
      return t / duration_ -
             std::sin(2.0 * std::numbers::pi * t / duration_) /
                 (2.0 * std::numbers::pi);
    case ProfileKind::kSquareSmooth: {
      double ramp = kRampFraction * duration_;
      double h = peak();
      auto ramp_area = [&](double u) {
        return h * 0.5 * (u - ramp / std::numbers::pi *
                                  std::sin(std::numbers::pi * u / ramp));
      };
      if (t < ramp) return ramp_area(t);
      if (t <= duration_ - ramp) return ramp_area(ramp) + h * (t - ramp);
      return 1.0 - ramp_area(duration_ - t);
    }
    case ProfileKind::kConstant:
      return t / duration_;
  }
  return 0.0;
}

PMSetup::PMSetup(QuantumState system_state_in, Observable protecting_hamiltonian_in,
                 Observable measured_in, CouplingProfile profile_in,
                 PointerState pointer_in, bool include_pointer_kinetic_in)
    : system_state(std::move(system_state_in)),
      protecting_hamiltonian(std::move(protecting_hamiltonian_in)),
      measured(std::move(measured_in)),
      profile(profile_in),
      pointer(std::move(pointer_in)),
      include_pointer_kinetic(include_pointer_kinetic_in) {
  if (system_state.dim() != protecting_hamiltonian.dim() ||
      system_state.dim() != measured.dim()) {
    throw ConfigError("system state, protecting Hamiltonian, and measured observable "
                      "must share one dimension");
  }
  if (system_state.basis() != protecting_hamiltonian.basis() ||
      system_state.basis() != measured.basis()) {
    throw ConfigError("system state, protecting Hamiltonian, and measured observable "
                      "must share one basis");
  }

  energy = expectation(system_state, protecting_hamiltonian);
  VecC residual =
      protecting_hamiltonian.matrix() * system_state.amps() - energy * system_state.amps();
  if (residual.norm() > 1e-8) {
    throw ConfigError("system state is not an eigenstate of the protecting "
                      "Hamiltonian: residual " +
                      std::to_string(residual.norm()));
  }

  const VecR& levels = protecting_hamiltonian.eigenvalues();
  int near = 0;
  gap = 0.0;
  for (Eigen::Index i = 0; i < levels.size(); ++i) {
    double d = std::abs(levels[i] - energy);
    if (d < 1e-8) {
      ++near;
    } else if (gap == 0.0 || d < gap) {
      gap = d;
    }
  }
  if (near != 1) {
    throw ConfigError("protected level is degenerate: " + std::to_string(near) +
                      " eigenvalues within 1e-8 of E");
  }
  if (gap <= 0.0) {
    throw ConfigError("protecting Hamiltonian has no gap above the protected level");
  }

  double a_norm = measured.eigenvalues().cwiseAbs().maxCoeff();
  double sigma_p = 1.0 / (2.0 * std::sqrt(position_moments(pointer).variance));
  coupling_ratio = profile.peak() * a_norm * sigma_p / gap;
  if (coupling_ratio > kCouplingRatioCap) {
    throw ConfigError("coupling ratio " + std::to_string(coupling_ratio) +
                      " exceeds the weak-coupling cap " +
                      std::to_string(kCouplingRatioCap));
  }
}

PMOutcome run_protected_pm(const PMSetup& setup, int steps) {
  if (steps < 16) throw ConfigError("protected run needs at least 16 steps");
  double duration = setup.profile.duration();
  CompositeState state = CompositeState::product(setup.system_state, setup.pointer);
  double mean0 = position_moments(state).mean;

  int checkpoints = 16;
  int per_segment = (steps + checkpoints - 1) / checkpoints;
  auto g = [&setup](double t) { return setup.profile(t); };

  PMOutcome out{state, 0.0, 1.0, {}, {}};
  out.mean_trajectory.push_back({0.0, mean0});
  out.fidelity_trajectory.push_back({0.0, 1.0});
  for (int seg = 0; seg < checkpoints; ++seg) {
    double ta = duration * seg / checkpoints;
    double tb = duration * (seg + 1) / checkpoints;
    evolve_coupled(state, setup.protecting_hamiltonian, setup.measured, g, ta, tb,
                   per_segment, setup.include_pointer_kinetic);
    double fidelity = state.branch_weight(setup.system_state);
    out.min_protection_fidelity = std::min(out.min_protection_fidelity, fidelity);
    out.mean_trajectory.push_back({tb, position_moments(state).mean});
    out.fidelity_trajectory.push_back({tb, fidelity});
  }
  check_boundary_mass(state);
  out.shift = out.mean_trajectory.back().second - mean0;
  out.final_state = std::move(state);
  return out;
}

PartialShift partial_shift(const PMSetup& setup, double dt, int steps) {
  double duration = setup.profile.duration();
  if (dt < 0.0 || dt > duration) {
    throw ConfigError("partial-shift time " + std::to_string(dt) +
                      " is outside the coupling window [0, " +
                      std::to_string(duration) + "]");
  }
  double predicted =
      expectation(setup.system_state, setup.measured) * setup.profile.integral_to(dt);
  if (dt == 0.0) return {0.0, predicted};

  CompositeState state = CompositeState::product(setup.system_state, setup.pointer);
  double mean0 = position_moments(state).mean;
  int scaled = std::max(16, static_cast<int>(std::lround(steps * dt / duration)));
  auto g = [&setup](double t) { return setup.profile(t); };
  evolve_coupled(state, setup.protecting_hamiltonian, setup.measured, g, 0.0, dt, scaled,
                 setup.include_pointer_kinetic);
  check_boundary_mass(state);
  return {position_moments(state).mean - mean0, predicted};
}

}  // namespace pmsim
