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

#include "pmsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace pmsim {

void MomentAccumulator::add(double x) {
  std::int64_t n1 = n_;
  n_ += 1;
  double delta = x - mean_;
  double delta_n = delta / static_cast<double>(n_);
  double delta_n2 = delta_n * delta_n;
  double term1 = delta * delta_n * static_cast<double>(n1);
  mean_ += delta_n;
  m4_sum_ += term1 * delta_n2 * static_cast<double>(n_ * n_ - 3 * n_ + 3) +
             6.0 * delta_n2 * m2_sum_ - 4.0 * delta_n * m3_sum_;
  m3_sum_ += term1 * delta_n * static_cast<double>(n_ - 2) - 3.0 * delta_n * m2_sum_;
  m2_sum_ += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  double na = static_cast<double>(n_);
  double nb = static_cast<double>(other.n_);
  double n = na + nb;
  double delta = other.mean_ - mean_;
  double d2 = delta * delta;
  double m4 = m4_sum_ + other.m4_sum_ +
              d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
              6.0 * d2 * (na * na * other.m2_sum_ + nb * nb * m2_sum_) / (n * n) +
              4.0 * delta * (na * other.m3_sum_ - nb * m3_sum_) / n;
  double m3 = m3_sum_ + other.m3_sum_ + d2 * delta * na * nb * (na - nb) / (n * n) +
              3.0 * delta * (na * other.m2_sum_ - nb * m2_sum_) / n;
  double m2 = m2_sum_ + other.m2_sum_ + d2 * na * nb / n;
  mean_ += delta * nb / n;
  m2_sum_ = m2;
  m3_sum_ = m3;
  m4_sum_ = m4;
  n_ += other.n_;
}

double MomentAccumulator::mean() const {
  if (n_ == 0) throw NumericalError("moment accumulator is empty");
  return mean_;
}

double MomentAccumulator::variance() const {
  if (n_ < 2) throw NumericalError("variance needs at least two samples");
  return m2_sum_ / static_cast<double>(n_ - 1);
}

double MomentAccumulator::m2() const {
  if (n_ == 0) throw NumericalError("moment accumulator is empty");
  return m2_sum_ / static_cast<double>(n_);
}

double MomentAccumulator::m3() const {
  if (n_ == 0) throw NumericalError("moment accumulator is empty");
  return m3_sum_ / static_cast<double>(n_);
}

double MomentAccumulator::m4() const {
  if (n_ == 0) throw NumericalError("moment accumulator is empty");
  return m4_sum_ / static_cast<double>(n_);
}

double MomentAccumulator::mean_se() const {
  return std::sqrt(variance() / static_cast<double>(n_));
}

double MomentAccumulator::variance_se() const {
  if (n_ < 4) throw NumericalError("variance_se needs at least four samples");
  double n = static_cast<double>(n_);
  double s2 = variance();
  double inner = m4() - (n - 3.0) / (n - 1.0) * s2 * s2;
  return std::sqrt(std::max(inner, 0.0) / n);
}

void CovAccumulator::add(double x, double y) {
  n_ += 1;
  double n = static_cast<double>(n_);
  double dx = x - mean_x_;
  double dy = y - mean_y_;
  mean_x_ += dx / n;
  mean_y_ += dy / n;
  // dy is the pre-update deviation; pairing it with the post-update x
  // deviation gives the exact single-pass cross sum.
  m2x_sum_ += dx * (x - mean_x_);
  m2y_sum_ += dy * (y - mean_y_);
  cross_sum_ += dx * (y - mean_y_);
}

void CovAccumulator::merge(const CovAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  double na = static_cast<double>(n_);
  double nb = static_cast<double>(other.n_);
  double n = na + nb;
  double dx = other.mean_x_ - mean_x_;
  double dy = other.mean_y_ - mean_y_;
  cross_sum_ += other.cross_sum_ + dx * dy * na * nb / n;
  m2x_sum_ += other.m2x_sum_ + dx * dx * na * nb / n;
  m2y_sum_ += other.m2y_sum_ + dy * dy * na * nb / n;
  mean_x_ += dx * nb / n;
  mean_y_ += dy * nb / n;
  n_ += other.n_;
}

double CovAccumulator::covariance() const {
  if (n_ < 2) throw NumericalError("covariance needs at least two samples");
  return cross_sum_ / static_cast<double>(n_ - 1);
}

double CovAccumulator::correlation() const {
  if (n_ < 2) throw NumericalError("correlation needs at least two samples");
  double denom = std::sqrt(m2x_sum_ * m2y_sum_);
  if (denom == 0.0) throw NumericalError("correlation of a constant sequence");
  return cross_sum_ / denom;
}

double CovAccumulator::covariance_se() const {
  if (n_ < 2) throw NumericalError("covariance_se needs at least two samples");
  double n = static_cast<double>(n_);
  double m2x = m2x_sum_ / n;
  double m2y = m2y_sum_ / n;
  double cov = cross_sum_ / n;
  return std::sqrt((m2x * m2y + cov * cov) / n);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& sigma) {
  std::size_t n = x.size();
  if (y.size() != n) throw ConfigError("fit_line: x and y lengths differ");
  bool weighted = !sigma.empty();
  if (weighted && sigma.size() != n) {
    throw ConfigError("fit_line: sigma length differs from x");
  }
  std::size_t min_points = weighted ? 2 : 3;
  if (n < min_points) {
    throw ConfigError("fit_line: need at least " + std::to_string(min_points) +
                      " points");
  }

  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (weighted) {
      if (!(sigma[i] > 0.0)) throw ConfigError("fit_line: sigmas must be positive");
      w = 1.0 / (sigma[i] * sigma[i]);
    }
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  double det = sw * swxx - swx * swx;
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw NumericalError("fit_line: degenerate abscissas");
  }
  LineFit fit{};
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;

  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - fit.slope * x[i] - fit.intercept;
    double w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
    chi2 += w * r * r;
  }
  fit.chi2 = chi2;

  double var_scale = weighted ? 1.0 : chi2 / static_cast<double>(n - 2);
  fit.slope_se = std::sqrt(var_scale * sw / det);
  fit.intercept_se = std::sqrt(var_scale * swxx / det);
  return fit;
}

TwoBasisFit fit_two_basis(const std::vector<double>& f1, const std::vector<double>& f2,
                          const std::vector<double>& y) {
  std::size_t n = f1.size();
  if (f2.size() != n || y.size() != n) {
    throw ConfigError("fit_two_basis: input lengths differ");
  }
  if (n < 3) throw ConfigError("fit_two_basis: need at least 3 points");

  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(static_cast<Eigen::Index>(i), 0) = f1[i];
    design(static_cast<Eigen::Index>(i), 1) = f2[i];
    rhs[static_cast<Eigen::Index>(i)] = y[i];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()[0];
  double smin = svd.singularValues()[1];
  double condition =
      smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(condition < 1e8)) {
    throw NumericalError("fit_two_basis: basis functions are numerically collinear "
                         "(condition " +
                         std::to_string(condition) + ")");
  }

  Eigen::Vector2d k = svd.solve(rhs);
  Eigen::VectorXd resid = rhs - design * k;
  double ssr = resid.squaredNorm();
  double dof = static_cast<double>(n) - 2.0;
  double s2 = dof > 0.0 ? ssr / dof : 0.0;
  Eigen::Matrix2d cov = (design.transpose() * design).inverse() * s2;

  TwoBasisFit fit{};
  fit.k1 = k[0];
  fit.k2 = k[1];
  fit.k1_se = std::sqrt(std::max(cov(0, 0), 0.0));
  fit.k2_se = std::sqrt(std::max(cov(1, 1), 0.0));
  fit.rms_residual = std::sqrt(ssr / static_cast<double>(n));
  fit.condition = condition;
  return fit;
}

namespace {

std::int64_t bin_index(double x, double width) {
  return static_cast<std::int64_t>(std::floor(x / width));
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

double Histogram::mass_at(std::int64_t index) const {
  std::int64_t offset = index - lo_index;
  if (offset < 0 || offset >= static_cast<std::int64_t>(mass.size())) return 0.0;
  return mass[static_cast<std::size_t>(offset)];
}

Histogram histogram_fixed(const std::vector<double>& samples, double width) {
  if (samples.empty()) throw ConfigError("histogram_fixed: no samples");
  if (!(width > 0.0)) throw ConfigError("histogram_fixed: width must be positive");

  std::int64_t lo = bin_index(samples[0], width);
  std::int64_t hi = lo;
  for (double s : samples) {
    std::int64_t idx = bin_index(s, width);
    lo = std::min(lo, idx);
    hi = std::max(hi, idx);
  }
  Histogram h;
  h.width = width;
  h.lo_index = lo;
  h.n_samples = static_cast<std::int64_t>(samples.size());
  h.mass.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  double unit = 1.0 / static_cast<double>(samples.size());
  for (double s : samples) {
    h.mass[static_cast<std::size_t>(bin_index(s, width) - lo)] += unit;
  }
  return h;
}

Histogram histogram_density(const std::vector<double>& positions,
                            const std::vector<double>& masses, double cell_width,
                            double bin_width) {
  if (positions.empty() || positions.size() != masses.size()) {
    throw ConfigError("histogram_density: positions and masses sizes differ");
  }
  if (!(cell_width > 0.0) || !(bin_width > 0.0)) {
    throw ConfigError("histogram_density: widths must be positive");
  }
  double total = 0.0;
  for (double m : masses) total += m;
  if (!(total > 0.0)) throw NumericalError("histogram_density: no mass");

  std::map<std::int64_t, double> bins;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    double m = masses[i];
    if (!(m > 0.0)) continue;
    double lo = positions[i] - 0.5 * cell_width;
    double hi = positions[i] + 0.5 * cell_width;
    std::int64_t first = bin_index(lo, bin_width);
    std::int64_t last = bin_index(hi, bin_width);
    for (std::int64_t j = first; j <= last; ++j) {
      double overlap = std::min(hi, (j + 1) * bin_width) -
                       std::max(lo, j * bin_width);
      if (overlap > 0.0) bins[j] += m * overlap / cell_width;
    }
  }
  Histogram h;
  h.width = bin_width;
  h.lo_index = bins.begin()->first;
  h.n_samples = 0;
  h.mass.assign(static_cast<std::size_t>(bins.rbegin()->first - h.lo_index + 1), 0.0);
  for (const auto& [idx, m] : bins) {
    h.mass[static_cast<std::size_t>(idx - h.lo_index)] = m / total;
  }
  return h;
}

Histogram histogram_fd(const std::vector<double>& samples) {
  if (samples.size() < 4) throw ConfigError("histogram_fd: too few samples");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  double n_cbrt = std::cbrt(static_cast<double>(samples.size()));
  double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double width = 2.0 * iqr / n_cbrt;
  if (!(width > 0.0)) {
    MomentAccumulator acc;
    for (double s : samples) acc.add(s);
    width = 3.49 * std::sqrt(acc.variance()) / n_cbrt;
  }
  if (!(width > 0.0)) {
    throw NumericalError("histogram_fd: samples are degenerate");
  }
  return histogram_fixed(samples, width);
}

double tv_distance(const Histogram& a, const Histogram& b) {
  if (a.width <= 0.0 || b.width <= 0.0 ||
      std::abs(a.width - b.width) > 1e-12 * std::max(a.width, b.width)) {
    throw ConfigError("tv_distance: histograms must share a bin width");
  }
  std::int64_t lo = std::min(a.lo_index, b.lo_index);
  std::int64_t hi = std::max(a.lo_index + static_cast<std::int64_t>(a.mass.size()),
                             b.lo_index + static_cast<std::int64_t>(b.mass.size()));
  double sum = 0.0;
  for (std::int64_t i = lo; i < hi; ++i) sum += std::abs(a.mass_at(i) - b.mass_at(i));
  return 0.5 * sum;
}

double tv_distance_to_point(const Histogram& h, double x) {
  return 1.0 - h.mass_at(bin_index(x, h.width));
}

double tv_bias_bound(std::int64_t n_bins, std::int64_t na, std::int64_t nb) {
  if (n_bins <= 0 || na <= 0 || nb <= 0) {
    throw ConfigError("tv_bias_bound: counts must be positive");
  }
  return 0.5 * std::sqrt(static_cast<double>(n_bins) *
                         (1.0 / static_cast<double>(na) +
                          1.0 / static_cast<double>(nb)));
}

double bhattacharyya_gaussian(double mean_a, double var_a, double mean_b,
                              double var_b) {
  if (!(var_a > 0.0) || !(var_b > 0.0)) {
    throw ConfigError("bhattacharyya_gaussian: variances must be positive");
  }
  double d = mean_a - mean_b;
  double distance = 0.25 * d * d / (var_a + var_b) +
                    0.25 * std::log(0.25 * (var_a / var_b + var_b / var_a + 2.0));
  return std::exp(-distance);
}

}  // namespace pmsim
