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
#include <numbers>

#include "doctest.h"

using namespace pmsim;

namespace {

// Dense momentum operator in position space, built from the same unitary DFT
// convention the spectral code uses: P = W^dagger diag(p_k) W with
// W(k, x) = exp(-2 pi i k x / n) / sqrt(n). This gives an independent full
// matrix path for every composite-evolution oracle below.
Observable dense_momentum(const PointerGrid& grid) {
  int n = grid.n_points;
  MatC w(n, n);
  for (int k = 0; k < n; ++k) {
    for (int x = 0; x < n; ++x) {
      w(k, x) = std::polar(1.0 / std::sqrt(double(n)),
                           -2.0 * std::numbers::pi * k * x / n);
    }
  }
  VecR pk(n);
  for (int k = 0; k < n; ++k) pk[k] = grid.momentum(k);
  MatC p = w.adjoint() * pk.asDiagonal() * w;
  return Observable(std::move(p), pointer_basis(grid));
}

Observable two_level_h() {
  MatC h(2, 2);
  h << cxd(0.3, 0.0), cxd(0.1, -0.2), cxd(0.1, 0.2), cxd(-0.4, 0.0);
  return Observable(std::move(h), "s");
}

Observable two_level_a() {
  MatC a(2, 2);
  a << cxd(0.7, 0.0), cxd(0.25, 0.1), cxd(0.25, -0.1), cxd(-0.2, 0.0);
  return Observable(std::move(a), "s");
}

QuantumState two_level_state() {
  VecC v(2);
  v << cxd(0.6, 0.0), cxd(0.0, 0.8);
  return QuantumState(std::move(v), "s");
}

PointerGrid small_grid() { return make_grid(0.5, 0.0, 128, 32.0, 10.0); }

}  // namespace

TEST_CASE("product state flattens to the qcore tensor product") {
  PointerGrid grid = small_grid();
  PointerState pointer = make_gaussian(grid, 0.0, 0.5);
  QuantumState sys = two_level_state();
  CompositeState cs = CompositeState::product(sys, pointer);
  QuantumState dense = tensor(sys, pointer.state);
  CHECK((cs.to_quantum_state().amps() - dense.amps()).norm() < 1e-14);
  CHECK(cs.to_quantum_state().basis() == dense.basis());
}

TEST_CASE("representation changes round-trip exactly") {
  PointerGrid grid = small_grid();
  CompositeState cs =
      CompositeState::product(two_level_state(), make_gaussian(grid, 0.3, 0.5));
  MatC before = cs.amps();
  cs.to_momentum();
  CHECK(std::abs(cs.norm() - 1.0) < 1e-12);
  cs.to_position();
  CHECK((cs.amps() - before).norm() < 1e-12);
}

TEST_CASE("coupling kick matches the dense A (x) P exponential") {
  PointerGrid grid = small_grid();
  PointerState pointer = make_gaussian(grid, 0.0, 0.5);
  QuantumState sys = two_level_state();
  Observable a = two_level_a();
  double weight = 0.8;

  CompositeState cs = CompositeState::product(sys, pointer);
  apply_coupling_kick(cs, a, weight);
  cs.to_position();

  QuantumState dense0 = tensor(sys, pointer.state);
  Hamiltonian ham(tensor(a, dense_momentum(grid)));
  QuantumState dense1 = evolve(dense0, ham, 0.0, weight, 1);
  CHECK((cs.to_quantum_state().amps() - dense1.amps()).norm() < 1e-9);
}

TEST_CASE("identity coupling translates the pointer rigidly") {
  PointerGrid grid = make_grid(0.5, 0.0, 1024);
  PointerState pointer = make_gaussian(grid, 0.0, 0.5);
  Observable ident(MatC::Identity(2, 2), "s");
  CompositeState cs = CompositeState::product(two_level_state(), pointer);
  PacketMoments before = position_moments(cs);
  double shift = 16 * grid.dx;
  apply_coupling_kick(cs, ident, shift);
  PacketMoments after = position_moments(cs);
  CHECK(after.mean - before.mean == doctest::Approx(shift).epsilon(1e-10));
  CHECK(after.variance == doctest::Approx(before.variance).epsilon(1e-10));

  // A whole-bin shift is an exact permutation of the density.
  VecR rho0 = pointer_density(CompositeState::product(two_level_state(), pointer));
  VecR rho1 = pointer_density(cs);
  double worst = 0.0;
  for (int i = 16; i < grid.n_points; ++i) {
    worst = std::max(worst, std::abs(rho1[i] - rho0[i - 16]));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("kick conserves populations of the coupling eigenbasis") {
  PointerGrid grid = small_grid();
  Observable a = Observable::diagonal((VecR(2) << 1.0, -1.0).finished(), "s");
  CompositeState cs =
      CompositeState::product(two_level_state(), make_gaussian(grid, 0.0, 0.5));
  VecR before = system_populations(cs);
  apply_coupling_kick(cs, a, 1.3);
  VecR after = system_populations(cs);
  CHECK((before - after).norm() < 1e-12);
}

TEST_CASE("constant coupled evolution matches the dense propagator") {
  PointerGrid grid = small_grid();
  PointerState pointer = make_gaussian(grid, 0.0, 0.5);
  QuantumState sys = two_level_state();
  Observable h = two_level_h();
  Observable a = two_level_a();
  double g = 0.5, t = 1.7;

  for (bool kinetic : {false, true}) {
    CAPTURE(kinetic);
    CompositeState cs = CompositeState::product(sys, pointer);
    ConstantCoupledEvolver evolver(grid, h, a, g, kinetic);
    evolver.advance(cs, t);

    Observable p = dense_momentum(grid);
    MatC ident_sys = MatC::Identity(2, 2);
    MatC dense_h = tensor(h, Observable(MatC::Identity(grid.n_points, grid.n_points),
                                        pointer_basis(grid)))
                       .matrix() +
                   g * tensor(a, p).matrix();
    if (kinetic) {
      dense_h += tensor(Observable(ident_sys, "s"),
                        Observable(p.matrix() * p.matrix() / (2.0 * grid.mass),
                                   pointer_basis(grid)))
                     .matrix();
    }
    Hamiltonian ham(Observable(std::move(dense_h), sys.basis() + "*" + pointer_basis(grid)));
    QuantumState dense1 = evolve(tensor(sys, pointer.state), ham, 0.0, t, 1);
    CHECK((cs.to_quantum_state().amps() - dense1.amps()).norm() < 2e-9);
  }
}

TEST_CASE("constant evolver composes exactly over split steps") {
  PointerGrid grid = small_grid();
  CompositeState a =
      CompositeState::product(two_level_state(), make_gaussian(grid, 0.0, 0.5));
  CompositeState b = a;
  ConstantCoupledEvolver evolver(grid, two_level_h(), two_level_a(), 0.7, true);
  evolver.advance(a, 2.0);
  evolver.advance(b, 0.75);
  evolver.advance(b, 1.25);
  CHECK((a.amps() - b.amps()).norm() < 1e-12);
}

TEST_CASE("profile evolution matches the dense midpoint propagator step for step") {
  PointerGrid grid = small_grid();
  PointerState pointer = make_gaussian(grid, 0.0, 0.5);
  QuantumState sys = two_level_state();
  Observable h = two_level_h();
  Observable a = two_level_a();
  double big_t = 2.0;
  auto g = [big_t](double t) {
    double s = std::sin(std::numbers::pi * t / big_t);
    return 2.0 / big_t * s * s;
  };
  int steps = 48;

  CompositeState cs = CompositeState::product(sys, pointer);
  evolve_coupled(cs, h, a, g, 0.0, big_t, steps, /*include_kinetic=*/false);

  Observable p = dense_momentum(grid);
  Observable h_full = tensor(
      h, Observable(MatC::Identity(grid.n_points, grid.n_points), pointer_basis(grid)));
  Hamiltonian ham(h_full, g, tensor(a, p));
  QuantumState dense1 = evolve(tensor(sys, pointer.state), ham, 0.0, big_t, steps);
  CHECK((cs.to_quantum_state().amps() - dense1.amps()).norm() < 2e-9);
}

TEST_CASE("profile evolution handles systems beyond two levels") {
  PointerGrid grid = small_grid();
  MatC h3 = MatC::Zero(3, 3);
  h3(0, 0) = 0.2;
  h3(1, 1) = -0.1;
  h3(2, 2) = 0.5;
  h3(0, 1) = cxd(0.05, 0.02);
  h3(1, 0) = std::conj(h3(0, 1));
  Observable h(h3, "s3");
  MatC a3 = MatC::Zero(3, 3);
  a3(0, 2) = cxd(0.3, -0.1);
  a3(2, 0) = std::conj(a3(0, 2));
  a3(1, 1) = 0.4;
  Observable a(a3, "s3");
  VecC v(3);
  v << cxd(0.5, 0.0), cxd(0.5, 0.5), cxd(0.0, 0.5);
  QuantumState sys(v, "s3");
  auto g = [](double t) { return 0.3 + 0.2 * std::cos(t); };

  CompositeState cs = CompositeState::product(sys, make_gaussian(grid, 0.0, 0.5));
  evolve_coupled(cs, h, a, g, 0.0, 1.5, 32, /*include_kinetic=*/true);

  Observable p = dense_momentum(grid);
  MatC dense_h =
      tensor(h, Observable(MatC::Identity(grid.n_points, grid.n_points),
                           pointer_basis(grid)))
          .matrix() +
      tensor(Observable(MatC::Identity(3, 3), "s3"),
             Observable(p.matrix() * p.matrix() / (2.0 * grid.mass), pointer_basis(grid)))
          .matrix();
  Hamiltonian ham(Observable(dense_h, sys.basis() + "*" + pointer_basis(grid)), g,
                  tensor(a, p));
  QuantumState dense1 = evolve(tensor(sys, make_gaussian(grid, 0.0, 0.5).state), ham,
                               0.0, 1.5, 32);
  CHECK((cs.to_quantum_state().amps() - dense1.amps()).norm() < 2e-9);
}

TEST_CASE("midpoint stepping converges at second order in the profile") {
  PointerGrid grid = small_grid();
  auto g = [](double t) { return 0.4 + 0.3 * std::sin(2.0 * t); };
  auto run = [&](int steps) {
    CompositeState cs =
        CompositeState::product(two_level_state(), make_gaussian(grid, 0.0, 0.5));
    evolve_coupled(cs, two_level_h(), two_level_a(), g, 0.0, 2.0, steps, false);
    cs.to_position();
    return cs;
  };
  CompositeState ref = run(4096);
  double e32 = (run(32).amps() - ref.amps()).norm();
  double e64 = (run(64).amps() - ref.amps()).norm();
  CHECK(std::log2(e32 / e64) > 1.7);
}

TEST_CASE("zero coupling reduces to bare system evolution") {
  PointerGrid grid = small_grid();
  PointerState pointer = make_gaussian(grid, 0.2, 0.5);
  QuantumState sys = two_level_state();
  Observable h = two_level_h();
  CompositeState cs = CompositeState::product(sys, pointer);
  ConstantCoupledEvolver evolver(grid, h, two_level_a(), 0.0, false);
  evolver.advance(cs, 3.0);
  cs.to_position();

  QuantumState sys1 = evolve(sys, Hamiltonian(h), 0.0, 3.0, 1);
  MatC expect = pointer.amps() * sys1.amps().transpose();
  CHECK((cs.amps() - expect).norm() < 1e-10);
}

TEST_CASE("kinetic-only evolution reproduces single-packet spreading") {
  PointerGrid grid = make_grid(0.5, 0.0, 1024, 40.0, 10.0);
  PointerState pointer = make_gaussian(grid, 0.0, 0.5);
  Observable h0(MatC::Zero(2, 2), "s");
  CompositeState cs = CompositeState::product(two_level_state(), pointer);
  ConstantCoupledEvolver evolver(grid, h0, h0, 0.0, true);
  evolver.advance(cs, 2.0);

  VecR rho = pointer_density(cs);
  PointerState spread = free_evolve(pointer, 2.0);
  VecR expect = spread.amps().cwiseAbs2();
  CHECK((rho - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("system projection collapses branches with Born weights") {
  PointerGrid grid = small_grid();
  Observable a = Observable::diagonal((VecR(2) << 1.0, -1.0).finished(), "s");
  QuantumState sys = two_level_state();
  CompositeState cs = CompositeState::product(sys, make_gaussian(grid, 0.0, 0.5));
  // Entangle pointer and system, then ask for the original system state back.
  apply_coupling_kick(cs, a, 1.0);
  double w = cs.branch_weight(sys);
  CompositeState collapsed = cs;
  double prob = collapsed.project_system(sys);
  CHECK(prob == doctest::Approx(w).epsilon(1e-12));
  CHECK(std::abs(collapsed.norm() - 1.0) < 1e-12);
  CHECK(collapsed.branch_weight(sys) == doctest::Approx(1.0).epsilon(1e-12));

  // Branch weights over a full system basis sum to one.
  VecC up(2), down(2);
  up << 1.0, 0.0;
  down << 0.0, 1.0;
  double total = cs.branch_weight(QuantumState(up, "s")) +
                 cs.branch_weight(QuantumState(down, "s"));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projection onto an orthogonal system state throws") {
  PointerGrid grid = small_grid();
  VecC up(2), down(2);
  up << 1.0, 0.0;
  down << 0.0, 1.0;
  CompositeState cs =
      CompositeState::product(QuantumState(up, "s"), make_gaussian(grid, 0.0, 0.5));
  CHECK_THROWS_AS(cs.project_system(QuantumState(down, "s")), OrthogonalBranchError);
}

TEST_CASE("pointer component extracts the branch packet") {
  PointerGrid grid = small_grid();
  PointerState pointer = make_gaussian(grid, 0.0, 0.5);
  QuantumState sys = two_level_state();
  CompositeState cs = CompositeState::product(sys, pointer);
  VecC c = cs.pointer_component(sys.amps());
  CHECK((c - pointer.amps()).norm() < 1e-12);
  // Extraction agrees across representations.
  cs.to_momentum();
  CHECK((cs.pointer_component(sys.amps()) - pointer.amps()).norm() < 1e-12);
}

TEST_CASE("mismatched operators and malformed states are rejected") {
  PointerGrid grid = small_grid();
  CompositeState cs =
      CompositeState::product(two_level_state(), make_gaussian(grid, 0.0, 0.5));
  Observable wrong_basis(MatC::Identity(2, 2), "other");
  Observable wrong_dim(MatC::Identity(3, 3), "s");
  CHECK_THROWS_AS(apply_coupling_kick(cs, wrong_basis, 1.0), ConfigError);
  CHECK_THROWS_AS(apply_coupling_kick(cs, wrong_dim, 1.0), ConfigError);
  CHECK_THROWS_AS(
      evolve_coupled(cs, two_level_h(), two_level_a(), [](double) { return 1.0; }, 0.0,
                     1.0, 0, false),
      ConfigError);
  CHECK_THROWS_AS(CompositeState(grid, MatC::Ones(grid.n_points, 2), Rep::kPosition, "s"),
                  ConfigError);
}

TEST_CASE("boundary guard trips when mass reaches the edge") {
  PointerGrid grid = make_grid(0.5, 0.0, 256, 40.0, 10.0);
  CompositeState cs =
      CompositeState::product(two_level_state(), make_gaussian(grid, 0.0, 0.5));
  CHECK_NOTHROW(check_boundary_mass(cs));
  Observable h0(MatC::Zero(2, 2), "s");
  ConstantCoupledEvolver evolver(grid, h0, h0, 0.0, true);
  evolver.advance(cs, 2000.0);
  CHECK_THROWS_AS(check_boundary_mass(cs), NumericalError);
}

TEST_CASE("overlap matches the flattened inner product in both representations") {
  PointerGrid grid = small_grid();
  CompositeState a =
      CompositeState::product(two_level_state(), make_gaussian(grid, 0.3, 0.6));
  CompositeState b =
      CompositeState::product(QuantumState((VecC(2) << 0.8, cxd(0.0, -0.6)).finished(),
                                           "s"),
                              make_gaussian(grid, -0.2, 0.5));
  cxd direct = a.to_quantum_state().amps().dot(b.to_quantum_state().amps());
  CHECK(std::abs(overlap(a, b) - direct) < 1e-12);
  CHECK(std::abs(overlap(a, a) - cxd(1.0, 0.0)) < 1e-12);
  a.to_momentum();
  b.to_momentum();
  CHECK(std::abs(overlap(a, b) - direct) < 1e-12);

  CompositeState c =
      CompositeState::product(two_level_state(), make_gaussian(grid, 0.3, 0.6));
  CHECK_THROWS_AS(overlap(a, c), ConfigError);  // mixed representations
}

TEST_CASE("system density reduces a product state and follows a kick") {
  PointerGrid grid = small_grid();
  QuantumState sys = two_level_state();
  CompositeState cs = CompositeState::product(sys, make_gaussian(grid, 0.0, 0.5));
  MatC rho = system_density(cs);
  MatC pure = sys.amps() * sys.amps().adjoint();
  CHECK((rho - pure).norm() < 1e-12);
  CHECK(std::abs(rho.trace() - cxd(1.0, 0.0)) < 1e-12);

  // A coupling kick decoheres the system in the coupling eigenbasis: the
  // off-diagonal element there picks up the packet's displacement overlap.
  apply_coupling_kick(cs, two_level_a(), 1.0);
  MatC rho2 = system_density(cs);
  CHECK(std::abs(rho2.trace() - cxd(1.0, 0.0)) < 1e-12);
  CHECK((rho2 - rho2.adjoint()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<MatC> es(two_level_a().matrix());
  MatC in_eig = es.eigenvectors().adjoint() * rho2 * es.eigenvectors();
  MatC in_eig0 = es.eigenvectors().adjoint() * rho * es.eigenvectors();
  // Populations in the coupling eigenbasis are untouched; coherence shrinks.
  CHECK(std::abs(in_eig(0, 0) - in_eig0(0, 0)) < 1e-12);
  CHECK(std::abs(in_eig(1, 1) - in_eig0(1, 1)) < 1e-12);
  CHECK(std::abs(in_eig(0, 1)) < std::abs(in_eig0(0, 1)));
  // Representation independence.
  cs.to_momentum();
  CHECK((system_density(cs) - rho2).norm() < 1e-12);
}
