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

#include "pmsim/qcore.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

namespace pmsim {

namespace {

void require_same_space(const std::string& what, const std::string& basis_a,
                        Eigen::Index dim_a, const std::string& basis_b,
                        Eigen::Index dim_b) {
  if (dim_a != dim_b) {
    throw ConfigError(what + ": dimension mismatch (" + std::to_string(dim_a) +
                      " vs " + std::to_string(dim_b) + ")");
  }
  if (basis_a != basis_b) {
    throw ConfigError(what + ": basis mismatch ('" + basis_a + "' vs '" + basis_b + "')");
  }
}

void check_finite(const VecC& v, const std::string& what) {
  if (!v.allFinite()) throw NumericalError(what + ": non-finite amplitudes");
}

}  // namespace

QuantumState::QuantumState(VecC amplitudes, std::string basis,
                           std::vector<Eigen::Index> factor_dims)
    : amps_(std::move(amplitudes)), basis_(std::move(basis)),
      factor_dims_(std::move(factor_dims)) {
  if (amps_.size() == 0) throw ConfigError("QuantumState: empty amplitude vector");
  check_finite(amps_, "QuantumState");
  double n2 = amps_.squaredNorm();
  if (std::abs(n2 - 1.0) > kNormTol) {
    throw ConfigError("QuantumState: squared norm " + std::to_string(n2) +
                      " violates unit normalization");
  }
  if (!factor_dims_.empty()) {
    Eigen::Index prod = 1;
    for (Eigen::Index d : factor_dims_) prod *= d;
    if (prod != amps_.size()) {
      throw ConfigError("QuantumState: factor dimensions do not multiply to vector size");
    }
  }
}

QuantumState QuantumState::normalized(VecC amplitudes, std::string basis,
                                      std::vector<Eigen::Index> factor_dims) {
  double n = amplitudes.norm();
  if (!(n > 1e-150)) throw ConfigError("QuantumState: cannot normalize a zero vector");
  amplitudes /= n;
  return QuantumState(std::move(amplitudes), std::move(basis), std::move(factor_dims));
}

Observable::Observable(MatC matrix, std::string basis)
    : mat_(std::move(matrix)), basis_(std::move(basis)) {
  if (mat_.rows() == 0 || mat_.rows() != mat_.cols()) {
    throw ConfigError("Observable: matrix must be square and non-empty");
  }
  if (!mat_.allFinite()) throw ConfigError("Observable: non-finite entries");
  double scale = std::max(1.0, mat_.cwiseAbs().maxCoeff());
  double herm = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTol * scale) {
    throw ConfigError("Observable: matrix is not Hermitian (residue " +
                      std::to_string(herm) + ")");
  }
}

Observable Observable::diagonal(const VecR& values, std::string basis) {
  MatC m = MatC::Zero(values.size(), values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return Observable(std::move(m), std::move(basis));
}

void Observable::ensure_eig() const {
  if (eig_) return;
  Eigen::SelfAdjointEigenSolver<MatC> solver(mat_);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Observable: eigendecomposition failed");
  }
  const MatC& v = solver.eigenvectors();
  double unit = (v.adjoint() * v - MatC::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  if (unit > kUnitaryTol) {
    throw NumericalError("Observable: eigenvector matrix not unitary (residue " +
                         std::to_string(unit) + ")");
  }
  eig_ = {solver.eigenvalues(), v};
}

const VecR& Observable::eigenvalues() const {
  ensure_eig();
  return eig_->first;
}

const MatC& Observable::eigenvectors() const {
  ensure_eig();
  return eig_->second;
}

Hamiltonian::Hamiltonian(Observable static_op, std::function<double(double)> g,
                         Observable coupling_op)
    : static_part(std::move(static_op)) {
  require_same_space("Hamiltonian", static_part.basis(), static_part.dim(),
                     coupling_op.basis(), coupling_op.dim());
  if (!g) throw ConfigError("Hamiltonian: empty coupling profile");
  coupling = {std::move(g), std::move(coupling_op)};
}

MatC Hamiltonian::at(double t) const {
  if (!coupling) return static_part.matrix();
  return static_part.matrix() + coupling->first(t) * coupling->second.matrix();
}

double expectation(const QuantumState& state, const Observable& obs) {
  require_same_space("expectation", state.basis(), state.dim(), obs.basis(), obs.dim());
  cxd value = state.amps().dot(obs.matrix() * state.amps());
  if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real()))) {
    throw NumericalError("expectation: imaginary residue " + std::to_string(value.imag()));
  }
  return value.real();
}

double variance_obs(const QuantumState& state, const Observable& obs) {
  require_same_space("variance", state.basis(), state.dim(), obs.basis(), obs.dim());
  VecC av = obs.matrix() * state.amps();
  double second = av.squaredNorm();  // <A psi|A psi> = <A^2>
  double first = expectation(state, obs);
  double var = second - first * first;
  if (var < -1e-12 * std::max(1.0, second)) {
    throw NumericalError("variance: negative value " + std::to_string(var));
  }
  return std::max(0.0, var);
}

QuantumState evolve(const QuantumState& state, const Hamiltonian& ham, double t0,
                    double t1, int steps) {
  require_same_space("evolve", state.basis(), state.dim(), ham.static_part.basis(),
                     ham.dim());
  if (steps < 1) throw ConfigError("evolve: steps must be >= 1");
  if (!(t1 >= t0)) throw ConfigError("evolve: t1 must be >= t0");

  VecC psi = state.amps();
  double dt = (t1 - t0) / steps;
  bool autonomous = !ham.coupling.has_value();
  // For an autonomous Hamiltonian a single cached decomposition serves every
  // step; otherwise g(t) is sampled at each midpoint and the frozen operator
  // exponentiated exactly.
  Eigen::SelfAdjointEigenSolver<MatC> solver;
  if (autonomous) {
    ham.static_part.eigenvalues();  // warm the cache, validates decomposition
    const VecR& w = ham.static_part.eigenvalues();
    const MatC& v = ham.static_part.eigenvectors();
    VecC phases(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      phases[k] = std::exp(cxd(0.0, -w[k] * (t1 - t0)));
    }
    psi = v * phases.cwiseProduct((v.adjoint() * psi).eval());
  } else {
    for (int s = 0; s < steps; ++s) {
      double tm = t0 + (s + 0.5) * dt;
      solver.compute(ham.at(tm));
      if (solver.info() != Eigen::Success) {
        throw NumericalError("evolve: step eigendecomposition failed");
      }
      const VecR& w = solver.eigenvalues();
      const MatC& v = solver.eigenvectors();
      VecC phases(w.size());
      for (Eigen::Index k = 0; k < w.size(); ++k) {
        phases[k] = std::exp(cxd(0.0, -w[k] * dt));
      }
      psi = v * phases.cwiseProduct((v.adjoint() * psi).eval());
    }
  }
  check_finite(psi, "evolve");
  return QuantumState(std::move(psi), state.basis(), state.factor_dims());
}

std::pair<QuantumState, double> project_branch(const QuantumState& state,
                                               const QuantumState& onto,
                                               int factor_index) {
  std::vector<Eigen::Index> dims = state.factor_dims();
  if (dims.empty()) dims = {state.dim()};
  if (factor_index < 0 || factor_index >= int(dims.size())) {
    throw ConfigError("project_branch: factor index out of range");
  }
  if (onto.dim() != dims[factor_index]) {
    throw ConfigError("project_branch: projector dimension does not match factor");
  }

  // Strides of the chosen factor inside the flattened tensor index.
  Eigen::Index inner = 1;
  for (size_t f = factor_index + 1; f < dims.size(); ++f) inner *= dims[f];
  Eigen::Index outer = state.dim() / (inner * dims[factor_index]);

  const VecC& a = state.amps();
  const VecC& w = onto.amps();
  VecC branch = VecC::Zero(state.dim());
  double prob = 0.0;
  for (Eigen::Index o = 0; o < outer; ++o) {
    for (Eigen::Index i = 0; i < inner; ++i) {
      cxd overlap = 0.0;
      for (Eigen::Index k = 0; k < dims[factor_index]; ++k) {
        overlap += std::conj(w[k]) * a[(o * dims[factor_index] + k) * inner + i];
      }
      prob += std::norm(overlap);
      for (Eigen::Index k = 0; k < dims[factor_index]; ++k) {
        branch[(o * dims[factor_index] + k) * inner + i] = w[k] * overlap;
      }
    }
  }
  if (prob < 1e-14) {
    throw OrthogonalBranchError("project_branch: branch probability " +
                                std::to_string(prob) + " vanishes");
  }
  branch /= std::sqrt(prob);
  return {QuantumState(std::move(branch), state.basis(), state.factor_dims()), prob};
}

QuantumState tensor(const QuantumState& a, const QuantumState& b) {
  VecC out(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    out.segment(i * b.dim(), b.dim()) = a.amps()[i] * b.amps();
  }
  std::vector<Eigen::Index> dims;
  auto append = [&dims](const QuantumState& s) {
    if (s.factor_dims().empty()) {
      dims.push_back(s.dim());
    } else {
      dims.insert(dims.end(), s.factor_dims().begin(), s.factor_dims().end());
    }
  };
  append(a);
  append(b);
  return QuantumState(std::move(out), a.basis() + "*" + b.basis(), std::move(dims));
}

Observable tensor(const Observable& a, const Observable& b) {
  MatC out(a.dim() * b.dim(), a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    for (Eigen::Index j = 0; j < a.dim(); ++j) {
      out.block(i * b.dim(), j * b.dim(), b.dim(), b.dim()) = a.matrix()(i, j) * b.matrix();
    }
  }
  return Observable(std::move(out), a.basis() + "*" + b.basis());
}

VecR born_weights(const QuantumState& state, const Observable& obs) {
  require_same_space("born_weights", state.basis(), state.dim(), obs.basis(), obs.dim());
  VecC coeffs = obs.eigenvectors().adjoint() * state.amps();
  return coeffs.cwiseAbs2();
}

}  // namespace pmsim
