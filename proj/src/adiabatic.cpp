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

#include "pmsim/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "pmsim/stats.hpp"

namespace pmsim {

namespace {

constexpr double kTailLimit = 1e-8;
constexpr double kMatrixElementThreshold = 1e-9;
constexpr int kCheckpoints = 16;

double top_tail(const VecR& populations) {
  int d = static_cast<int>(populations.size());
  int top = (d + 9) / 10;
  double tail = 0.0;
  for (int i = d - top; i < d; ++i) tail += populations[i];
  return tail;
}

void check_tail(const CompositeState& state) {
  double tail = top_tail(system_populations(state));
  if (tail > kTailLimit) {
    throw NumericalError("Fock truncation tail reached " + std::to_string(tail) +
                         "; increase fock_dim");
  }
}

void validate_config(const ApmConfig& config) {
  if (!(config.duration > 0.0)) throw ConfigError("apm: duration must be positive");
  if (config.measured.basis() != config.system.ground.basis() ||
      config.measured.dim() != config.system.ground.dim()) {
    throw ConfigError("apm: measured observable does not match the oscillator basis");
  }
}

}  // namespace

int apm_default_steps(double duration) {
  return std::max(64, static_cast<int>(std::ceil(64.0 * duration /
                                                 (2.0 * std::numbers::pi))));
}

OscillatorSystem build_displaced_oscillator(cxd alpha, int fock_dim) {
  if (fock_dim < 40) {
    throw ConfigError("oscillator: fock_dim must be at least 40");
  }
  if (std::abs(alpha) > 2.0) {
    throw ConfigError("oscillator: |alpha| must not exceed 2");
  }
  std::string basis = "fock" + std::to_string(fock_dim);

  MatC lower = MatC::Zero(fock_dim, fock_dim);
  for (int n = 1; n < fock_dim; ++n) lower(n - 1, n) = std::sqrt(double(n));
  MatC raise = lower.adjoint();
  MatC shifted = lower - alpha * MatC::Identity(fock_dim, fock_dim);

  Observable hamiltonian(shifted.adjoint() * shifted, basis);
  Observable q((lower + raise) / std::numbers::sqrt2, basis);
  Observable p(cxd(0.0, -1.0) * (lower - raise) / std::numbers::sqrt2, basis);

  VecC amps(fock_dim);
  amps[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < fock_dim; ++n) {
    amps[n] = amps[n - 1] * alpha / std::sqrt(double(n));
  }
  QuantumState ground = QuantumState::normalized(std::move(amps), basis);

  double tail = top_tail(ground.amps().cwiseAbs2());
  if (tail > kTailLimit) {
    throw NumericalError("oscillator: coherent-state truncation tail " +
                         std::to_string(tail) + " at fock_dim " +
                         std::to_string(fock_dim));
  }

  double energy = expectation(ground, hamiltonian);
  double residual =
      (hamiltonian.matrix() * ground.amps() - energy * ground.amps()).norm();
  if (residual > 1e-6) {
    throw NumericalError("oscillator: ground-state residual " +
                         std::to_string(residual));
  }
  double gap = hamiltonian.eigenvalues()[1] - hamiltonian.eigenvalues()[0];
  if (std::abs(gap - 1.0) > 1e-6) {
    throw NumericalError("oscillator: spectral gap " + std::to_string(gap) +
                         " deviates from 1");
  }
  return OscillatorSystem{fock_dim, alpha,  std::move(hamiltonian), std::move(q),
                          std::move(p),     std::move(ground),      energy,
                          gap};
}

ApmOutcome run_apm(const ApmConfig& config, int steps) {
  validate_config(config);
  double duration = config.duration;
  int min_steps = static_cast<int>(
      std::ceil(50.0 * duration / (2.0 * std::numbers::pi)));
  if (steps < min_steps) {
    throw ConfigError("apm: " + std::to_string(steps) +
                      " steps do not resolve the oscillator period (need " +
                      std::to_string(min_steps) + ")");
  }

  double initial_mean = position_moments(config.pointer).mean;
  CompositeState state =
      CompositeState::product(config.system.ground, config.pointer);
  state.to_momentum();
  ConstantCoupledEvolver evolver(state.grid(), config.system.hamiltonian,
                                 config.measured, 1.0 / duration,
                                 /*include_kinetic=*/false);

  ApmOutcome out{std::move(state), 0.0, 0.0, {}, 0.0};
  out.mean_trajectory.reserve(kCheckpoints + 1);
  out.mean_trajectory.emplace_back(0.0, initial_mean);
  int substeps = (steps + kCheckpoints - 1) / kCheckpoints;
  double dt = duration / (kCheckpoints * substeps);
  for (int seg = 1; seg <= kCheckpoints; ++seg) {
    for (int s = 0; s < substeps; ++s) evolver.advance(out.final_state, dt);
    check_boundary_mass(out.final_state);
    out.max_truncation_tail =
        std::max(out.max_truncation_tail, top_tail(system_populations(out.final_state)));
    check_tail(out.final_state);
    out.mean_trajectory.emplace_back(seg * duration / kCheckpoints,
                                     position_moments(out.final_state).mean);
  }
  PacketMoments moments = position_moments(out.final_state);
  out.shift = moments.mean - initial_mean;
  out.pointer_variance = moments.variance;
  return out;
}

double heisenberg_pointer_mean(double t, double duration, double exp_a, double q0,
                               double p0) {
  if (!(duration > 0.0)) throw ConfigError("heisenberg mean: duration must be positive");
  if (t < 0.0 || t > duration) {
    throw ConfigError("heisenberg mean: t outside [0, duration]");
  }
  return (t / duration) * exp_a +
         (q0 * std::sin(t) + p0 * (1.0 - std::cos(t))) / duration;
}

ApmFirstOrder apm_first_order_state(const ApmConfig& config) {
  validate_config(config);
  ApmOutcome exact = run_apm(config, apm_default_steps(config.duration));

  const Observable& h = config.system.hamiltonian;
  const QuantumState& psi = config.system.ground;
  const VecR& levels = h.eigenvalues();
  const MatC& vecs = h.eigenvectors();
  double energy = config.system.energy;
  double exp_a = expectation(psi, config.measured);
  PacketMoments packet = position_moments(config.pointer);
  double sigma = std::sqrt(packet.variance);
  double center = packet.mean + exp_a;

  // Undisturbed-system sector: the initial packet translated by <A>, with the
  // ground state's dynamical phase.
  CompositeState fo = CompositeState::product(psi, config.pointer);
  fo.to_momentum();
  MatC amps = fo.amps();
  for (int i = 0; i < fo.grid().n_points; ++i) {
    amps.row(i) *= std::polar(1.0, -exp_a * fo.grid().momentum(i) -
                                       energy * config.duration);
  }
  detail::fft_unitary_cols(amps, /*forward=*/false);

  // Derivative-packet template for the shape diagnostic.
  VecC base = make_gaussian(fo.grid(), center, sigma).amps();
  VecC tmpl(fo.grid().n_points);
  for (int i = 0; i < fo.grid().n_points; ++i) {
    tmpl[i] = (fo.grid().position(i) - center) * base[i];
  }
  tmpl /= tmpl.norm();

  ApmFirstOrder result{CompositeState(fo.grid(), amps, Rep::kPosition, fo.sys_basis()),
                       0,
                       {}};
  VecC mels = vecs.adjoint() * (config.measured.matrix() * psi.amps());
  for (int m = 0; m < levels.size(); ++m) {
    double gap = energy - levels[m];
    if (std::abs(gap) < 1e-12) continue;  // the protected level itself
    if (std::abs(mels[m]) < kMatrixElementThreshold) continue;
    if (std::abs(gap) < 1e-6) {
      throw NumericalError("apm first order: near-degenerate level spacing " +
                           std::to_string(gap) + " at level " + std::to_string(m));
    }
    VecC sector = exact.final_state.pointer_component(vecs.col(m));
    double norm = sector.norm();
    ApmFoTerm term{};
    term.level = m;
    term.gap = gap;
    term.matrix_element = mels[m];
    term.sector_norm = norm;
    term.scaled_norm = norm * config.duration * std::abs(gap) / std::abs(mels[m]);
    term.shape_match = norm > 0.0 ? std::norm(tmpl.dot(sector)) / (norm * norm) : 0.0;
    amps += sector * vecs.col(m).transpose();
    result.terms.push_back(term);
    result.active_terms += 1;
  }
  amps /= amps.norm();
  result.state = CompositeState(fo.grid(), std::move(amps), Rep::kPosition,
                                fo.sys_basis());
  return result;
}

ApmVarianceReport apm_qm_variance(const ApmConfig& config,
                                  const std::vector<double>& width_grid) {
  validate_config(config);
  if (width_grid.size() < 3) {
    throw ConfigError("apm variance: need at least 3 initial widths");
  }
  int steps = apm_default_steps(config.duration);
  ApmVarianceReport report{};
  report.variance = run_apm(config, steps).pointer_variance;

  double duration = config.duration;
  int n_points = config.pointer.grid.n_points;
  auto coefficient = [&](double var0, int points) {
    double sigma = std::sqrt(var0);
    PointerGrid grid = make_grid(sigma, 0.0, points);
    ApmConfig swept{config.system, config.measured, duration,
                    make_gaussian(grid, 0.0, sigma)};
    double var = run_apm(swept, steps).pointer_variance;
    return duration * duration * (var - var0);
  };
  for (double v : width_grid) {
    double full = coefficient(v, n_points);
    double half = coefficient(v, n_points / 2);
    report.var_grid.push_back(v);
    report.coefficients.push_back(full);
    report.coefficient_errors.push_back(std::max(std::abs(full - half), 1e-9));
  }
  LineFit fit = fit_line(report.var_grid, report.coefficients,
                         report.coefficient_errors);
  report.width_slope = fit.slope;
  report.width_slope_se = fit.slope_se;
  report.width_dependent = std::abs(fit.slope) > 5.0 * fit.slope_se;
  return report;
}

}  // namespace pmsim
