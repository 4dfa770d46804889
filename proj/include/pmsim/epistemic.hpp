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

#include <cstdint>
#include <vector>

#include "pmsim/adiabatic.hpp"
#include "pmsim/qcore.hpp"
#include "pmsim/rng.hpp"
#include "pmsim/zeno.hpp"

namespace pmsim {

// Bin width shared by the model histograms and the quantum marginals they are
// compared against.
inline constexpr double kConsistencyBinWidth = 0.05;

// One stochastic trajectory of the round-based model: the system is taken to
// hold a definite eigenvalue each protection round, redrawn independently
// with Born weights, and the pointer advances by that eigenvalue over N.
struct OnticZSample {
  std::vector<int> draws;  // indices into the ascending eigenvalue list
  double shift;            // mean of the drawn eigenvalues
};

// One stochastic trajectory of the slow-drive model: the oscillator
// quadratures and the pointer position are taken to hold definite initial
// values drawn from the quantum marginals, and the pointer moves along the
// first-order solution evaluated at those values.
struct OnticASample {
  double q0;  // absolute quadrature draws, Normal(<q>, 1/2), Normal(<p>, 1/2)
  double p0;
  double x0;
  double x_f;
};

// Born-weight table for repeated eigenvalue draws. bias moves that much
// probability mass from the lowest eigenvalue to the highest, a deliberately
// broken table used to verify that the consistency check can fail.
class ZpmSampler {
 public:
  ZpmSampler(const QuantumState& psi, const Observable& a, double bias = 0.0);

  OnticZSample sample(int n_rounds, TrialRng& rng) const;

  double mean() const { return mean_; }
  double variance() const { return variance_; }

 private:
  VecR eigenvalues_;
  std::vector<double> cumulative_;
  double mean_;
  double variance_;
};

OnticZSample sample_zpm_run(const QuantumState& psi, const Observable& a,
                            int n_rounds, TrialRng& rng);

// Draw order per trial: x0, then q0, then p0. The final position is the
// shared first-order formula evaluated at the drawn values,
// x_f = x0 + exp_a + (q0 sin T + p0 (1 - cos T)) / T.
OnticASample sample_apm_run(cxd alpha, double duration, double exp_a, double var_x0,
                            TrialRng& rng);

struct ModelStats {
  double analytic_mean;
  double analytic_variance;
  double mc_mean;
  double mc_mean_se;
  double mc_variance;
  double mc_variance_se;
  std::int64_t n_trials;
};

// Round-based model ensemble: x0 ~ Normal(0, var_x0) plus the sampled shift.
// The analytic column is exact: mean <A>, variance var_x0 + Var(A) / N.
ModelStats zpm_model_stats(const QuantumState& psi, const Observable& a, int n_rounds,
                           double var_x0, std::int64_t n_trials, std::uint64_t seed,
                           int n_threads = 1, double bias = 0.0);

// Slow-drive model ensemble. The analytic variance is
// var_x0 + [sin^2 T + (1 - cos T)^2] / (2 T^2); the mean carries the
// (<q> sin T + <p> (1 - cos T)) / T correction, which closes at T = 2 pi k.
ModelStats apm_model_stats(cxd alpha, double duration, double exp_a, double var_x0,
                           std::int64_t n_trials, std::uint64_t seed,
                           int n_threads = 1);

// Model-versus-quantum comparison on one shared configuration. tv_to_ideal
// bins the per-trial shift against a point mass at <A>; tv_to_quantum bins
// the per-trial final position against the exact pointer marginal.
struct ConsistencyReport {
  std::int64_t n_trials;
  double tv_to_ideal;
  double tv_to_quantum;
  double tv_noise_floor;       // sampling bound sqrt(n_bins / n) / 2
  bool distribution_mismatch;  // tv_to_quantum above three times the floor
  double model_mean;
  double model_mean_se;
  double model_variance;
  double model_variance_se;
  double quantum_mean;
  double quantum_variance;
  double variance_sigma;  // |model - quantum| variance gap over the model SE
};

ConsistencyReport consistency_check(const ZpmConfig& config, std::int64_t n_trials,
                                    std::uint64_t seed, int n_threads = 1,
                                    double bias = 0.0);
ConsistencyReport consistency_check(const ApmConfig& config, std::int64_t n_trials,
                                    std::uint64_t seed, int n_threads = 1);

}  // namespace pmsim
