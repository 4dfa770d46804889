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

#include <functional>
#include <string>
#include <vector>

#include "pmsim/pointer.hpp"
#include "pmsim/qcore.hpp"

namespace pmsim {

enum class Rep { kPosition, kMomentum };

// System (x) pointer state stored as an n_points-by-sys_dim matrix: column j
// is the pointer amplitude paired with system basis state j. Couplings of the
// form A (x) P are diagonal in the pointer momentum index, so evolution under
// H_sys (x) I + g A (x) P (+ P^2/2m) factors into independent sys_dim-sized
// problems per momentum mode. That keeps everything exact per mode and avoids
// ever forming the full (sys_dim * n_points)-dimensional operator.
class CompositeState {
 public:
  CompositeState(PointerGrid grid, MatC amps, Rep rep, std::string sys_basis);

  static CompositeState product(const QuantumState& sys, const PointerState& pointer);

  const PointerGrid& grid() const { return grid_; }
  Rep rep() const { return rep_; }
  const MatC& amps() const { return amps_; }
  Eigen::Index sys_dim() const { return amps_.cols(); }
  const std::string& sys_basis() const { return sys_basis_; }
  double norm() const { return amps_.norm(); }

  // Unitary FFT over the pointer index of every column; no-ops if already
  // in the requested representation.
  void to_position();
  void to_momentum();

  // Projects the system factor onto |onto| and renormalizes. Returns the
  // branch probability; throws OrthogonalBranchError below 1e-14. Valid in
  // either representation (the projection touches only the system index).
  double project_system(const QuantumState& onto);

  // Probability that a system measurement finds |onto|, without collapsing.
  double branch_weight(const QuantumState& onto) const;

  // Unnormalized position-space pointer amplitude paired with system vector
  // |onto|: c(x) = sum_j conj(onto_j) amps(x, j).
  VecC pointer_component(const VecC& onto) const;

  // Flattened ket with factor_dims {sys_dim, n_points} in position space.
  QuantumState to_quantum_state() const;

 private:
  friend void apply_coupling_kick(CompositeState&, const Observable&, double);
  friend class ConstantCoupledEvolver;
  friend void evolve_coupled(CompositeState&, const Observable&, const Observable&,
                             const std::function<double(double)>&, double, double, int,
                             bool);

  PointerGrid grid_;
  Rep rep_;
  MatC amps_;
  std::string sys_basis_;
};

// Applies exp(-i * weight * A (x) P) exactly: each pointer momentum mode p
// sees the system unitary exp(-i * weight * p * A).
void apply_coupling_kick(CompositeState& state, const Observable& a, double weight);

// Exact propagator for the autonomous H = H_sys (x) I + g A (x) P, optionally
// plus the pointer kinetic term P^2 / 2m. The per-mode eigendecompositions are
// done once at construction; advance() then costs one rotation per mode and
// can be called repeatedly with arbitrary time steps.
class ConstantCoupledEvolver {
 public:
  ConstantCoupledEvolver(const PointerGrid& grid, const Observable& h_sys,
                         const Observable& a, double g, bool include_kinetic);

  void advance(CompositeState& state, double dt) const;

 private:
  PointerGrid grid_;
  std::string basis_;
  std::vector<MatC> vecs_;
  std::vector<VecR> vals_;
};

// Midpoint-frozen stepping for H(t) = H_sys (x) I + g(t) A (x) P (+ P^2/2m):
// g is sampled at each step midpoint and the frozen Hamiltonian applied
// exactly, so the error is O(steps^-2) and a constant profile is exact for
// any step count. Two-level systems use a closed-form 2x2 exponential.
void evolve_coupled(CompositeState& state, const Observable& h_sys, const Observable& a,
                    const std::function<double(double)>& g, double t0, double t1,
                    int steps, bool include_kinetic);

// Full inner product <a|b> over both factors. Representation independent;
// both states must share grid, representation, and system basis.
cxd overlap(const CompositeState& a, const CompositeState& b);

// Pointer observables, traced over the system factor.
PacketMoments position_moments(const CompositeState& state);
VecR pointer_density(const CompositeState& state);

// Reduced system density matrix rho(j, k) = sum_x amps(x, j) conj(amps(x, k)).
MatC system_density(const CompositeState& state);

// Populations sum_x |amps(x, j)|^2 in the stored system basis (representation
// independent, since the pointer FFT is unitary).
VecR system_populations(const CompositeState& state);

// Same edge guard as the single-packet version: throws NumericalError if the
// outer 5% of grid points carry more than 1e-8 probability.
void check_boundary_mass(const CompositeState& state);

}  // namespace pmsim
