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

#include <string>

#include "pmsim/qcore.hpp"

namespace pmsim {

// Uniform 1-D position grid for the measurement pointer (hbar = 1 throughout).
// Derivatives and momentum functions are applied spectrally, so n_points must
// be a power of two; packets are kept far from the edges by the boundary guard.
struct PointerGrid {
  int n_points;
  double dx;
  double center;
  double mass;

  PointerGrid(int n_points, double dx, double center, double mass);

  double extent() const { return n_points * dx; }
  double position(int i) const { return center + (i - n_points / 2) * dx; }
  // FFT-ordered momentum lattice value for index k.
  double momentum(int k) const;
  VecR positions() const;
  VecR momenta() const;

  bool operator==(const PointerGrid& o) const {
    return n_points == o.n_points && dx == o.dx && center == o.center && mass == o.mass;
  }
};

// Convenience constructor: extent = extent_sigmas * sigma around `center`,
// rounded to the grid convention used everywhere else in the package.
PointerGrid make_grid(double sigma, double center, int n_points = 1024,
                      double extent_sigmas = 40.0, double mass = 10.0);

// Wavepacket sampled on a grid. Amplitudes carry the sqrt(dx) measure factor,
// so sum |a_i|^2 = 1 and moments are plain weighted sums over grid positions.
struct PointerState {
  PointerGrid grid;
  QuantumState state;

  PointerState(PointerGrid grid, QuantumState state);
  const VecC& amps() const { return state.amps(); }
};

struct PacketMoments {
  double mean;
  double variance;
};

// Real Gaussian packet centered at `center` with position standard deviation
// sigma (variance sigma^2). Requires sigma >= 4 dx and grid extent >= 20 sigma.
PointerState make_gaussian(const PointerGrid& grid, double center, double sigma);

PacketMoments position_moments(const PointerState& ps);

// Kinetic evolution exp(-i P^2 t / 2m) applied spectrally. A Gaussian packet
// obeys var(t) = var(0) + t^2 / (4 m^2 var(0)).
PointerState free_evolve(const PointerState& ps, double t);

// Fourth-order central finite difference of the packet, in the same sampled
// convention as the amplitudes (result is phi'' * sqrt(dx), not normalized).
VecC packet_second_derivative(const PointerState& ps);

// var(t) for a minimum-uncertainty Gaussian spreading freely.
double gaussian_spread_variance(double var0, double t, double mass);

// Root-mean-square combination sqrt((w0^2 + (t/(m w0))^2) / 2) of the initial
// width and the kinematic spread. Kept as a separate reporting convention and
// never mixed with the variance-based law above.
double width_rms_mean(double w0, double t, double mass);

// Throws NumericalError if more than 1e-8 of the probability mass sits in the
// outer 5% of grid points (2.5% on each edge).
void check_boundary_mass(const PointerState& ps);
double boundary_mass(const PointerState& ps);

// Basis tag used for grid-sampled pointer states.
std::string pointer_basis(const PointerGrid& grid);

}  // namespace pmsim
