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

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmsim/errors.hpp"

namespace pmsim {

using cxd = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;

inline constexpr double kNormTol = 1e-10;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-8;

// Finite-dimensional pure state with a basis tag. Tensor-product states also
// record their factor dimensions so branches can be projected out later.
class QuantumState {
 public:
  // Validates normalization (squared norm within 1e-10 of 1).
  QuantumState(VecC amplitudes, std::string basis,
               std::vector<Eigen::Index> factor_dims = {});

  // Rescales the input to unit norm first; rejects (near-)zero vectors.
  static QuantumState normalized(VecC amplitudes, std::string basis,
                                 std::vector<Eigen::Index> factor_dims = {});

  const VecC& amps() const { return amps_; }
  const std::string& basis() const { return basis_; }
  const std::vector<Eigen::Index>& factor_dims() const { return factor_dims_; }
  Eigen::Index dim() const { return amps_.size(); }

 private:
  VecC amps_;
  std::string basis_;
  std::vector<Eigen::Index> factor_dims_;
};

// Hermitian operator with a lazily computed, cached spectral decomposition.
class Observable {
 public:
  // Validates hermiticity entrywise within 1e-10 (relative to the largest entry).
  Observable(MatC matrix, std::string basis);

  static Observable diagonal(const VecR& values, std::string basis);

  const MatC& matrix() const { return mat_; }
  const std::string& basis() const { return basis_; }
  Eigen::Index dim() const { return mat_.rows(); }

  // Ascending eigenvalues and the matching eigenvector columns. Computed on
  // first use; the eigenvector matrix is checked for unitarity within 1e-8.
  const VecR& eigenvalues() const;
  const MatC& eigenvectors() const;

 private:
  void ensure_eig() const;

  MatC mat_;
  std::string basis_;
  mutable std::optional<std::pair<VecR, MatC>> eig_;
};

// H(t) = static_part + g(t) * coupling_op. The profile must be real-valued,
// which keeps the total Hermitian at every t.
struct Hamiltonian {
  Observable static_part;
  std::optional<std::pair<std::function<double(double)>, Observable>> coupling;

  explicit Hamiltonian(Observable static_op) : static_part(std::move(static_op)) {}
  Hamiltonian(Observable static_op, std::function<double(double)> g, Observable coupling_op);

  Eigen::Index dim() const { return static_part.dim(); }
  MatC at(double t) const;
};

// <state|A|state>; the imaginary residue must be below 1e-10 and is discarded.
double expectation(const QuantumState& state, const Observable& obs);

// <A^2> - <A>^2, clamped to zero if a tiny negative rounding residue remains.
double variance_obs(const QuantumState& state, const Observable& obs);

// Schrodinger evolution from t0 to t1 under H(t). g(t) is sampled at the step
// midpoint and held constant across the step, and each step applies the exact
// exponential of that frozen Hamiltonian, so time-independent Hamiltonians are
// propagated exactly for any step count.
QuantumState evolve(const QuantumState& state, const Hamiltonian& ham, double t0,
                    double t1, int steps);

// Projects the chosen tensor factor onto |onto> and renormalizes. Returns the
// branch and its probability; throws OrthogonalBranchError below 1e-14.
std::pair<QuantumState, double> project_branch(const QuantumState& state,
                                               const QuantumState& onto,
                                               int factor_index);

QuantumState tensor(const QuantumState& a, const QuantumState& b);
Observable tensor(const Observable& a, const Observable& b);

// Born weights |<a_k|psi>|^2 in the order of obs.eigenvalues().
VecR born_weights(const QuantumState& state, const Observable& obs);

}  // namespace pmsim
