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

#include "pmsim/errors.hpp"

namespace pmsim {

// Single-pass accumulator for the first four central moments. merge() combines
// two accumulators exactly, so chunked parallel reductions give bit-stable
// results for a fixed chunking regardless of thread scheduling.
class MomentAccumulator {
 public:
  void add(double x);
  void merge(const MomentAccumulator& other);

  std::int64_t count() const { return n_; }
  double mean() const;
  double variance() const;  // unbiased, n >= 2
  double m2() const;        // biased central sample moments
  double m3() const;
  double m4() const;
  double mean_se() const;
  // Large-sample standard error of the unbiased variance estimate,
  // sqrt((m4 - (n-3)/(n-1) s^4) / n).
  double variance_se() const;

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_sum_ = 0.0;
  double m3_sum_ = 0.0;
  double m4_sum_ = 0.0;
};

// Two-variable companion tracking the cross moment for covariance checks.
class CovAccumulator {
 public:
  void add(double x, double y);
  void merge(const CovAccumulator& other);

  std::int64_t count() const { return n_; }
  double covariance() const;  // unbiased
  double correlation() const;
  // Delta-method standard error sqrt((m2x m2y + cov^2) / n).
  double covariance_se() const;

 private:
  std::int64_t n_ = 0;
  double mean_x_ = 0.0;
  double mean_y_ = 0.0;
  double m2x_sum_ = 0.0;
  double m2y_sum_ = 0.0;
  double cross_sum_ = 0.0;
};

struct LineFit {
  double slope;
  double intercept;
  double slope_se;
  double intercept_se;
  double chi2;  // weighted residual sum; plain SSR for unweighted fits
};

// Least-squares line. With per-point sigmas the fit is inverse-variance
// weighted and the errors come straight from the normal-equations covariance;
// without sigmas the errors are scaled by the residual variance (needs n >= 3).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& sigma = {});

struct TwoBasisFit {
  double k1;
  double k2;
  double k1_se;
  double k2_se;
  double rms_residual;
  double condition;
};

// Least squares for y ~ k1 f1 + k2 f2 via SVD. Throws NumericalError when the
// two basis columns are numerically collinear (condition number above 1e8).
TwoBasisFit fit_two_basis(const std::vector<double>& f1, const std::vector<double>& f2,
                          const std::vector<double>& y);

// Histogram over bins [i w, (i+1) w) anchored at integer multiples of the
// width, so two histograms with equal widths share bin edges by construction.
struct Histogram {
  double width = 0.0;
  std::int64_t lo_index = 0;
  std::vector<double> mass;  // normalized; mass[k] covers bin lo_index + k
  std::int64_t n_samples = 0;

  double mass_at(std::int64_t index) const;
};

Histogram histogram_fixed(const std::vector<double>& samples, double width);

// Freedman-Diaconis width 2 IQR n^{-1/3}, falling back to the Scott rule when
// the interquartile range degenerates.
Histogram histogram_fd(const std::vector<double>& samples);

// Bins a piecewise-constant density: masses[i] occupies a cell of width
// cell_width centered at positions[i] and is split across the bins it
// overlaps in proportion to the overlap. Lets a wavefunction marginal share
// bin edges with a sampled histogram whose grid spacing it does not divide.
Histogram histogram_density(const std::vector<double>& positions,
                            const std::vector<double>& masses, double cell_width,
                            double bin_width);

// Total variation distance between two histograms with matching bin widths.
double tv_distance(const Histogram& a, const Histogram& b);

// Total variation distance to a point mass: one minus the mass of the bin
// containing the point.
double tv_distance_to_point(const Histogram& h, double x);

// Upper bound on the sampling noise floor of an empirical TV estimate,
// sqrt(n_bins (1/na + 1/nb)) / 2.
double tv_bias_bound(std::int64_t n_bins, std::int64_t na, std::int64_t nb);

// Bhattacharyya coefficient of two normal densities (1 = identical).
double bhattacharyya_gaussian(double mean_a, double var_a, double mean_b, double var_b);

}  // namespace pmsim
