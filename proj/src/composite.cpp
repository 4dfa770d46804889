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

#include "pmsim/composite.hpp"

#include <cmath>
#include <utility>

#include "fft.hpp"

namespace pmsim {

namespace {

void require_sys_match(const CompositeState& state, const Observable& op,
                       const char* what) {
  if (op.dim() != state.sys_dim()) {
    throw ConfigError(std::string(what) + ": operator dimension " +
                      std::to_string(op.dim()) + " does not match system dimension " +
                      std::to_string(state.sys_dim()));
  }
  if (op.basis() != state.sys_basis()) {
    throw ConfigError(std::string(what) + ": operator basis '" + op.basis() +
                      "' does not match system basis '" + state.sys_basis() + "'");
  }
}

// Closed-form exp(-i H dt) for a 2x2 Hermitian H, applied to the mode vector
// (r0, r1) in place.
void apply_two_level_exp(const MatC& h, double dt, cxd& r0, cxd& r1) {
  double half_tr = 0.5 * (h(0, 0).real() + h(1, 1).real());
  double delta = 0.5 * (h(0, 0).real() - h(1, 1).real());
  cxd b = h(0, 1);
  double s = std::sqrt(delta * delta + std::norm(b));
  double sd = s * dt;
  double c = std::cos(sd);
  double f = sd < 1e-8 ? dt * (1.0 - sd * sd / 6.0) : std::sin(sd) / s;
  cxd phase = std::polar(1.0, -half_tr * dt);
  cxd u00 = phase * (c - cxd(0, 1) * f * delta);
  cxd u01 = phase * (-cxd(0, 1) * f) * b;
  cxd u10 = phase * (-cxd(0, 1) * f) * std::conj(b);
  cxd u11 = phase * (c + cxd(0, 1) * f * delta);
  cxd n0 = u00 * r0 + u01 * r1;
  cxd n1 = u10 * r0 + u11 * r1;
  r0 = n0;
  r1 = n1;
}

}  // namespace

CompositeState::CompositeState(PointerGrid grid, MatC amps, Rep rep,
                               std::string sys_basis)
    : grid_(grid), rep_(rep), amps_(std::move(amps)), sys_basis_(std::move(sys_basis)) {
  if (amps_.rows() != grid_.n_points) {
    throw ConfigError("composite amplitudes have " + std::to_string(amps_.rows()) +
                      " rows for a grid of " + std::to_string(grid_.n_points) +
                      " points");
  }
  if (amps_.cols() < 1) {
    throw ConfigError("composite state needs at least one system dimension");
  }
  double n2 = amps_.squaredNorm();
  if (std::abs(n2 - 1.0) > kNormTol) {
    throw ConfigError("composite state is not normalized: |amps|^2 = " +
                      std::to_string(n2));
  }
}

CompositeState CompositeState::product(const QuantumState& sys,
                                       const PointerState& pointer) {
  MatC amps = pointer.amps() * sys.amps().transpose();
  return CompositeState(pointer.grid, std::move(amps), Rep::kPosition, sys.basis());
}

void CompositeState::to_position() {
  if (rep_ == Rep::kPosition) return;
  detail::fft_unitary_cols(amps_, /*forward=*/false);
  rep_ = Rep::kPosition;
}

void CompositeState::to_momentum() {
  if (rep_ == Rep::kMomentum) return;
  detail::fft_unitary_cols(amps_, /*forward=*/true);
  rep_ = Rep::kMomentum;
}

double CompositeState::project_system(const QuantumState& onto) {
  if (onto.dim() != sys_dim()) {
    throw ConfigError("projection target dimension " + std::to_string(onto.dim()) +
                      " does not match system dimension " + std::to_string(sys_dim()));
  }
  if (onto.basis() != sys_basis_) {
    throw ConfigError("projection target basis '" + onto.basis() +
                      "' does not match system basis '" + sys_basis_ + "'");
  }
  VecC c = amps_ * onto.amps().conjugate();
  double prob = c.squaredNorm();
  if (prob < 1e-14) {
    throw OrthogonalBranchError("system projection weight " + std::to_string(prob) +
                                " is numerically zero");
  }
  amps_ = (c / std::sqrt(prob)) * onto.amps().transpose();
  return prob;
}

double CompositeState::branch_weight(const QuantumState& onto) const {
  if (onto.dim() != sys_dim() || onto.basis() != sys_basis_) {
    throw ConfigError("branch weight target does not match the system factor");
  }
  return (amps_ * onto.amps().conjugate()).squaredNorm();
}

VecC CompositeState::pointer_component(const VecC& onto) const {
  if (onto.size() != sys_dim()) {
    throw ConfigError("pointer component target dimension " +
                      std::to_string(onto.size()) + " does not match system dimension " +
                      std::to_string(sys_dim()));
  }
  if (rep_ == Rep::kPosition) return amps_ * onto.conjugate();
  MatC amps = amps_;
  detail::fft_unitary_cols(amps, /*forward=*/false);
  return amps * onto.conjugate();
}

QuantumState CompositeState::to_quantum_state() const {
  const MatC* source = &amps_;
  MatC copy;
  if (rep_ == Rep::kMomentum) {
    copy = amps_;
    detail::fft_unitary_cols(copy, /*forward=*/false);
    source = &copy;
  }
  VecC flat = Eigen::Map<const VecC>(source->data(), source->size());
  return QuantumState(std::move(flat), sys_basis_ + "*" + pointer_basis(grid_),
                      {sys_dim(), grid_.n_points});
}

void apply_coupling_kick(CompositeState& state, const Observable& a, double weight) {
  require_sys_match(state, a, "coupling kick");
  state.to_momentum();
  const MatC& v = a.eigenvectors();
  const VecR& lam = a.eigenvalues();
  MatC b = state.amps_ * v.conjugate();
  for (Eigen::Index k = 0; k < b.rows(); ++k) {
    double p = state.grid_.momentum(static_cast<int>(k));
    for (Eigen::Index m = 0; m < b.cols(); ++m) {
      b(k, m) *= std::polar(1.0, -weight * p * lam[m]);
    }
  }
  state.amps_ = b * v.transpose();
}

ConstantCoupledEvolver::ConstantCoupledEvolver(const PointerGrid& grid,
                                               const Observable& h_sys,
                                               const Observable& a, double g,
                                               bool include_kinetic)
    : grid_(grid), basis_(h_sys.basis()) {
  if (h_sys.dim() != a.dim()) {
    throw ConfigError("system Hamiltonian and coupling operator dimensions differ");
  }
  if (h_sys.basis() != a.basis()) {
    throw ConfigError("system Hamiltonian and coupling operator bases differ");
  }
  Eigen::Index d = h_sys.dim();
  vecs_.reserve(grid.n_points);
  vals_.reserve(grid.n_points);
  Eigen::SelfAdjointEigenSolver<MatC> solver;
  for (int k = 0; k < grid.n_points; ++k) {
    double p = grid.momentum(k);
    MatC h = h_sys.matrix() + (g * p) * a.matrix();
    if (include_kinetic) {
      h += (p * p / (2.0 * grid.mass)) * MatC::Identity(d, d);
    }
    solver.compute(h);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigendecomposition failed for momentum mode " +
                           std::to_string(k));
    }
    vecs_.push_back(solver.eigenvectors());
    vals_.push_back(solver.eigenvalues());
  }
}

void ConstantCoupledEvolver::advance(CompositeState& state, double dt) const {
  if (!(state.grid_ == grid_)) {
    throw ConfigError("evolver grid does not match the state grid");
  }
  if (state.sys_basis_ != basis_) {
    throw ConfigError("evolver basis does not match the state system basis");
  }
  state.to_momentum();
  Eigen::Index d = state.sys_dim();
  VecC mode(d), c(d);
  for (int k = 0; k < grid_.n_points; ++k) {
    mode = state.amps_.row(k).transpose();
    c.noalias() = vecs_[k].adjoint() * mode;
    for (Eigen::Index m = 0; m < d; ++m) {
      c[m] *= std::polar(1.0, -vals_[k][m] * dt);
    }
    mode.noalias() = vecs_[k] * c;
    state.amps_.row(k) = mode.transpose();
  }
}

void evolve_coupled(CompositeState& state, const Observable& h_sys, const Observable& a,
                    const std::function<double(double)>& g, double t0, double t1,
                    int steps, bool include_kinetic) {
  require_sys_match(state, h_sys, "coupled evolution");
  require_sys_match(state, a, "coupled evolution");
  if (steps < 1) throw ConfigError("coupled evolution needs at least one step");
  if (t1 < t0) throw ConfigError("coupled evolution needs t1 >= t0");
  if (t1 == t0) return;
  state.to_momentum();
  Eigen::Index d = state.sys_dim();
  double dt = (t1 - t0) / steps;
  Eigen::SelfAdjointEigenSolver<MatC> solver;
  VecC mode(d), c(d);
  for (int s = 0; s < steps; ++s) {
    double gm = g(t0 + (s + 0.5) * dt);
    for (int k = 0; k < state.grid_.n_points; ++k) {
      double p = state.grid_.momentum(k);
      MatC h = h_sys.matrix() + (gm * p) * a.matrix();
      if (include_kinetic) {
        h += (p * p / (2.0 * state.grid_.mass)) * MatC::Identity(d, d);
      }
      if (d == 2) {
        apply_two_level_exp(h, dt, state.amps_(k, 0), state.amps_(k, 1));
        continue;
      }
      solver.compute(h);
      if (solver.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed for momentum mode " +
                             std::to_string(k));
      }
      mode = state.amps_.row(k).transpose();
      c.noalias() = solver.eigenvectors().adjoint() * mode;
      for (Eigen::Index m = 0; m < d; ++m) {
        c[m] *= std::polar(1.0, -solver.eigenvalues()[m] * dt);
      }
      mode.noalias() = solver.eigenvectors() * c;
      state.amps_.row(k) = mode.transpose();
    }
  }
}

cxd overlap(const CompositeState& a, const CompositeState& b) {
  if (!(a.grid() == b.grid()) || a.sys_basis() != b.sys_basis() ||
      a.sys_dim() != b.sys_dim()) {
    throw ConfigError("overlap requires matching grids and system bases");
  }
  if (a.rep() != b.rep()) {
    throw ConfigError("overlap requires matching representations");
  }
  return (a.amps().conjugate().cwiseProduct(b.amps())).sum();
}

PacketMoments position_moments(const CompositeState& state) {
  VecR rho = pointer_density(state);
  double mean = 0.0, second = 0.0;
  for (int i = 0; i < state.grid().n_points; ++i) {
    double x = state.grid().position(i);
    mean += rho[i] * x;
    second += rho[i] * x * x;
  }
  double total = rho.sum();
  mean /= total;
  second /= total;
  return {mean, second - mean * mean};
}

VecR pointer_density(const CompositeState& state) {
  if (state.rep() == Rep::kPosition) return state.amps().rowwise().squaredNorm();
  MatC amps = state.amps();
  detail::fft_unitary_cols(amps, /*forward=*/false);
  return amps.rowwise().squaredNorm();
}

VecR system_populations(const CompositeState& state) {
  return state.amps().colwise().squaredNorm();
}

MatC system_density(const CompositeState& state) {
  return state.amps().transpose() * state.amps().conjugate();
}

void check_boundary_mass(const CompositeState& state) {
  VecR rho = pointer_density(state);
  int n = state.grid().n_points;
  int edge = n / 40;
  double mass = 0.0;
  for (int i = 0; i < edge; ++i) mass += rho[i] + rho[n - 1 - i];
  if (mass > 1e-8) {
    throw NumericalError(
        "pointer probability reached the grid boundary: edge mass = " +
        std::to_string(mass));
  }
}

}  // namespace pmsim
