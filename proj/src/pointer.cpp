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

#include "pmsim/pointer.hpp"

#include <cmath>
#include <sstream>

#include "../src/fft.hpp"

namespace pmsim {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

PointerGrid::PointerGrid(int n_points_, double dx_, double center_, double mass_)
    : n_points(n_points_), dx(dx_), center(center_), mass(mass_) {
  if (!is_power_of_two(n_points) || n_points < 64) {
    throw ConfigError("PointerGrid: n_points must be a power of two >= 64");
  }
  if (!(dx > 0.0)) throw ConfigError("PointerGrid: dx must be positive");
  if (!(mass > 0.0)) throw ConfigError("PointerGrid: mass must be positive");
  if (!std::isfinite(center)) throw ConfigError("PointerGrid: center must be finite");
}

double PointerGrid::momentum(int k) const {
  int signed_k = (k < n_points / 2) ? k : k - n_points;
  return kTwoPi * signed_k / (n_points * dx);
}

VecR PointerGrid::positions() const {
  VecR x(n_points);
  for (int i = 0; i < n_points; ++i) x[i] = position(i);
  return x;
}

VecR PointerGrid::momenta() const {
  VecR p(n_points);
  for (int k = 0; k < n_points; ++k) p[k] = momentum(k);
  return p;
}

PointerGrid make_grid(double sigma, double center, int n_points, double extent_sigmas,
                      double mass) {
  if (!(sigma > 0.0)) throw ConfigError("make_grid: sigma must be positive");
  if (!(extent_sigmas >= 20.0)) {
    throw ConfigError("make_grid: extent must cover at least 20 sigma");
  }
  double dx = extent_sigmas * sigma / n_points;
  return PointerGrid(n_points, dx, center, mass);
}

std::string pointer_basis(const PointerGrid& grid) {
  std::ostringstream os;
  os << "grid[" << grid.n_points << "," << grid.dx << "," << grid.center << "]";
  return os.str();
}

PointerState::PointerState(PointerGrid grid_, QuantumState state_)
    : grid(grid_), state(std::move(state_)) {
  if (state.dim() != grid.n_points) {
    throw ConfigError("PointerState: amplitude count does not match the grid");
  }
}

PointerState make_gaussian(const PointerGrid& grid, double center, double sigma) {
  if (!(sigma >= 4.0 * grid.dx)) {
    throw ConfigError("make_gaussian: sigma must be at least 4 grid spacings");
  }
  if (!(grid.extent() >= 20.0 * sigma)) {
    throw ConfigError("make_gaussian: grid extent must cover at least 20 sigma");
  }
  VecC a(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    double y = grid.position(i) - center;
    a[i] = std::exp(-y * y / (4.0 * sigma * sigma));
  }
  PointerState ps(grid, QuantumState::normalized(std::move(a), pointer_basis(grid)));
  check_boundary_mass(ps);
  return ps;
}

PacketMoments position_moments(const PointerState& ps) {
  double mean = 0.0;
  double norm = 0.0;
  for (int i = 0; i < ps.grid.n_points; ++i) {
    double w = std::norm(ps.amps()[i]);
    mean += w * ps.grid.position(i);
    norm += w;
  }
  mean /= norm;
  double var = 0.0;
  for (int i = 0; i < ps.grid.n_points; ++i) {
    double y = ps.grid.position(i) - mean;
    var += std::norm(ps.amps()[i]) * y * y;
  }
  return {mean, var / norm};
}

PointerState free_evolve(const PointerState& ps, double t) {
  if (!(t >= 0.0)) throw ConfigError("free_evolve: t must be >= 0");
  VecC a = ps.amps();
  detail::fft_unitary(a, true);
  for (int k = 0; k < ps.grid.n_points; ++k) {
    double p = ps.grid.momentum(k);
    a[k] *= std::exp(cxd(0.0, -p * p * t / (2.0 * ps.grid.mass)));
  }
  detail::fft_unitary(a, false);
  PointerState out(ps.grid, QuantumState(std::move(a), pointer_basis(ps.grid)));
  check_boundary_mass(out);
  return out;
}

VecC packet_second_derivative(const PointerState& ps) {
  const VecC& a = ps.amps();
  int n = ps.grid.n_points;
  VecC d(n);
  double inv = 1.0 / (12.0 * ps.grid.dx * ps.grid.dx);
  for (int i = 0; i < n; ++i) {
    const cxd& m2 = a[(i - 2 + n) % n];
    const cxd& m1 = a[(i - 1 + n) % n];
    const cxd& p1 = a[(i + 1) % n];
    const cxd& p2 = a[(i + 2) % n];
    d[i] = (-m2 + 16.0 * m1 - 30.0 * a[i] + 16.0 * p1 - p2) * inv;
  }
  return d;
}

double gaussian_spread_variance(double var0, double t, double mass) {
  if (!(var0 > 0.0) || !(mass > 0.0)) {
    throw ConfigError("gaussian_spread_variance: var0 and mass must be positive");
  }
  return var0 + t * t / (4.0 * mass * mass * var0);
}

double width_rms_mean(double w0, double t, double mass) {
  if (!(w0 > 0.0) || !(mass > 0.0)) {
    throw ConfigError("width_rms_mean: w0 and mass must be positive");
  }
  double kin = t / (mass * w0);
  return std::sqrt(0.5 * (w0 * w0 + kin * kin));
}

double boundary_mass(const PointerState& ps) {
  int n = ps.grid.n_points;
  int edge = std::max(1, n / 40);  // 2.5% of points on each side
  double mass = 0.0;
  for (int i = 0; i < edge; ++i) {
    mass += std::norm(ps.amps()[i]) + std::norm(ps.amps()[n - 1 - i]);
  }
  return mass;
}

void check_boundary_mass(const PointerState& ps) {
  double mass = boundary_mass(ps);
  if (mass > 1e-8) {
    throw NumericalError("pointer packet reaches the grid boundary (edge mass " +
                         std::to_string(mass) + ")");
  }
}

}  // namespace pmsim
