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
//
// Release gate: twelve independent checks covering the shift laws, the
// stochastic counter-models, the model-versus-quantum discrepancies, and the
// reproducibility contract. Each check prints one PASS/FAIL line; the binary
// exits nonzero if any check fails.

#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pmsim/adiabatic.hpp"
#include "pmsim/composite.hpp"
#include "pmsim/epistemic.hpp"
#include "pmsim/harness.hpp"
#include "pmsim/pm_dynamics.hpp"
#include "pmsim/pointer.hpp"
#include "pmsim/qcore.hpp"
#include "pmsim/stats.hpp"
#include "pmsim/zeno.hpp"

namespace {

using namespace pmsim;

constexpr double kPi = 3.14159265358979323846;

struct Gate {
  int failed = 0;
  int index = 0;

  void run(const std::string& label, const std::function<bool(std::string&)>& body) {
    ++index;
    std::string detail;
    bool pass = false;
    try {
      pass = body(detail);
    } catch (const std::exception& e) {
      pass = false;
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %2d. %s%s%s\n", pass ? "PASS" : "FAIL", index, label.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failed;
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// Two-level protected run: ground state of diag(0, 1), gap 1, measured
// observable with expectation 0.6 in the protected state.
PMSetup two_level_setup(double duration) {
  MatC a(2, 2);
  a << 0.6, 0.8, 0.8, -0.6;
  VecC v(2);
  v << 1.0, 0.0;
  PointerGrid grid = make_grid(0.5, 0.0);
  return PMSetup(QuantumState(std::move(v), "s"),
                 Observable::diagonal((VecR(2) << 0.0, 1.0).finished(), "s"),
                 Observable(std::move(a), "s"),
                 CouplingProfile::make(ProfileKind::kSineSquared, duration),
                 make_gaussian(grid, 0.0, 0.5));
}

QuantumState probe_state() {
  VecC v(2);
  v << 0.6, 0.8;
  return QuantumState(std::move(v), "s");
}

Observable probe_observable() {
  return Observable::diagonal((VecR(2) << 1.0, -1.0).finished(), "s");
}

ZpmConfig zpm_config(int n_rounds, double sigma, int n_points = 1024) {
  PointerGrid grid = make_grid(sigma, 0.0, n_points);
  return ZpmConfig{n_rounds, probe_state(), probe_observable(),
                   make_gaussian(grid, 0.0, sigma), ZpmOrdering::kProjectThenCouple};
}

ApmConfig apm_config(double duration, double sigma, int n_points = 512) {
  OscillatorSystem sys = build_displaced_oscillator(cxd(1.0, 0.0));
  Observable measured = sys.q;
  PointerGrid grid = make_grid(sigma, 0.0, n_points);
  return ApmConfig{std::move(sys), std::move(measured), duration,
                   make_gaussian(grid, 0.0, sigma)};
}

ExperimentConfig compare_config(const std::string& scheme) {
  ExperimentConfig c;
  c.kind = ExperimentKind::kCompare;
  c.scheme = scheme;
  c.threads = 4;
  return c;
}

double zpm_fo_infidelity(int n_rounds) {
  ZpmConfig config = zpm_config(n_rounds, 0.5);
  ZpmOutcome exact = run_zpm(config);
  CompositeState fo = zpm_first_order_branch(config);
  return 1.0 - std::norm(overlap(exact.branch_state, fo));
}

double apm_fo_infidelity(double duration) {
  ApmConfig config = apm_config(duration, 0.5);
  ApmFirstOrder fo = apm_first_order_state(config);
  ApmOutcome exact = run_apm(config, apm_default_steps(duration));
  exact.final_state.to_position();
  return 1.0 - std::norm(overlap(fo.state, exact.final_state));
}

std::vector<std::string> csv_last_row(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') last = line;
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = last.find(',', start);
    cells.push_back(last.substr(start, pos == std::string::npos ? std::string::npos
                                                                : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace

int main() {
  Gate gate;

  gate.run("ideal shift accuracy and its decay exponent", [](std::string& detail) {
    std::vector<double> windows = {50.0, 100.0, 200.0};
    std::vector<double> log_t, log_err, errs;
    for (double t : windows) {
      double shift = run_protected_pm(two_level_setup(t), static_cast<int>(32 * t)).shift;
      double err = std::abs(shift - 0.6);
      errs.push_back(err);
      log_t.push_back(std::log(t));
      log_err.push_back(std::log(err));
    }
    bool decreasing = errs[1] < errs[0] && errs[2] < errs[1];
    LineFit fit = fit_line(log_t, log_err);
    bool slope_ok = fit.slope > -1.3 && fit.slope < -0.7;
    bool small = errs[2] < 0.01;
    detail = fmt("slope=%.3f (window -1+/-0.3), err(200)=%.2e", fit.slope, errs[2]);
    return decreasing && slope_ok && small;
  });

  gate.run("partial-window shift tracks the coupling integral", [](std::string& detail) {
    PMSetup setup = two_level_setup(200.0);
    double worst = 0.0;
    for (int i = 1; i <= 10; ++i) {
      PartialShift ps = partial_shift(setup, 200.0 * i / 10.0, 6400);
      worst = std::max(worst, std::abs(ps.measured - ps.predicted));
    }
    detail = fmt("max |measured - predicted| = %.2e vs 0.006", worst);
    return worst < 0.01 * 0.6;
  });

  gate.run("round-based shift accuracy and deficit halving", [](std::string& detail) {
    double shift = run_zpm(zpm_config(200, 0.5)).pointer_mean;
    double shift_err = std::abs(shift - (-0.28));
    double d50 = 1.0 - run_zpm(zpm_config(50, 0.5)).success_probability;
    double d100 = 1.0 - run_zpm(zpm_config(100, 0.5)).success_probability;
    double ratio = d50 / d100;
    detail = fmt("shift_err=%.2e vs 0.005, deficit_ratio=%.3f vs 2+/-20%%", shift_err,
                 ratio);
    return shift_err < 0.005 && ratio > 1.6 && ratio < 2.4;
  });

  gate.run("round-based first-order branch error falls as one over rounds squared",
           [](std::string& detail) {
             double i100 = zpm_fo_infidelity(100);
             double i200 = zpm_fo_infidelity(200);
             double ratio = i100 / i200;
             detail = fmt("infidelity ratio 100->200 = %.3f vs 4+/-1", ratio);
             return ratio > 3.0 && ratio < 5.0;
           });

  gate.run("round-based model variance matches its closed form", [](std::string& detail) {
    QuantumState psi = probe_state();
    Observable a = probe_observable();
    double worst = 0.0;
    std::uint64_t seed = 501;
    for (int n : {10, 50, 200}) {
      for (double v : {0.25, 1.0}) {
        ModelStats stats = zpm_model_stats(psi, a, n, v, 100000, seed++, 4);
        double pull =
            std::abs(stats.mc_variance - stats.analytic_variance) / stats.mc_variance_se;
        worst = std::max(worst, pull);
      }
    }
    detail = fmt("worst |mc - analytic| = %.2f SE vs 3 SE", worst);
    return worst <= 3.0;
  });

  gate.run("width sweep splits the variance coefficients; constants fit is stable",
           [](std::string& detail) {
             ExperimentConfig c = compare_config("zpm");
             c.n_rounds = 50;
             c.trials = 100000;
             c.seed = 601;
             DiscrepancyReport report = sweep_compare(c, "var_x0", {0.25, 0.5, 1.0});
             bool model_flat = std::abs(report.model_slope) < 2.0 * report.model_slope_se;
             bool qm_sloped = std::abs(report.qm_slope) > 5.0 * report.qm_slope_se;

             std::vector<double> grid = {0.25, 0.5, 0.75, 1.0, 1.5};
             QuantumState psi = probe_state();
             Observable a = probe_observable();
             PointerConstantsFit base = fit_pointer_constants(grid, psi, a, 100, 512);
             PointerConstantsFit fine = fit_pointer_constants(grid, psi, a, 100, 1024);
             PointerConstantsFit doubled = fit_pointer_constants(grid, psi, a, 200, 512);
             auto stable = [](double x, double y, double sx, double sy) {
               return std::abs(x - y) < 2.0 * std::hypot(sx, sy);
             };
             bool fit_ok = stable(base.k1, fine.k1, base.k1_se, fine.k1_se) &&
                           stable(base.k2, fine.k2, base.k2_se, fine.k2_se) &&
                           stable(base.k1, doubled.k1, base.k1_se, doubled.k1_se) &&
                           stable(base.k2, doubled.k2, base.k2_se, doubled.k2_se);
             detail = fmt("model slope %.3f (2SE %.3f); qm slope/SE %.1f",
                          report.model_slope, 2.0 * report.model_slope_se,
                          std::abs(report.qm_slope) /
                              std::max(report.qm_slope_se, 1e-300)) +
                      (fit_ok ? "; k1,k2 stable" : "; k1,k2 drift");
             return model_flat && qm_sloped && fit_ok;
           });

  gate.run("slow-drive shift is the expectation value; trajectory matches the formula",
           [](std::string& detail) {
             double worst_shift = 0.0, worst_traj = 0.0;
             for (double t : {4.0 * kPi, 8.0 * kPi}) {
               ApmConfig config = apm_config(t, 0.5);
               ApmOutcome out = run_apm(config, apm_default_steps(t));
               double tol = 1.0 / (t * t);
               worst_shift =
                   std::max(worst_shift, std::abs(out.shift - std::sqrt(2.0)) / tol);
               for (int k = 1; k <= 10; ++k) {
                 double tk = out.mean_trajectory[k].first;
                 double expected =
                     heisenberg_pointer_mean(tk, t, std::sqrt(2.0), 0.0, 0.0);
                 worst_traj = std::max(
                     worst_traj, std::abs(out.mean_trajectory[k].second - expected) / tol);
               }
             }
             detail = fmt("shift err %.2e and trajectory err %.2e in 1/T^2 units",
                          worst_shift, worst_traj);
             return worst_shift < 1.0 && worst_traj < 1.0;
           });

  gate.run("slow-drive model variance matches its closed form with exact recurrence",
           [](std::string& detail) {
             double worst = 0.0;
             std::uint64_t seed = 701;
             for (double t : {kPi, 1.5 * kPi, 4.0 * kPi}) {
               ModelStats stats =
                   apm_model_stats(cxd(1.0, 0.0), t, std::sqrt(2.0), 0.25, 100000,
                                   seed++, 4);
               double pull = std::abs(stats.mc_variance - stats.analytic_variance) /
                             stats.mc_variance_se;
               worst = std::max(worst, pull);
             }
             ModelStats rec =
                 apm_model_stats(cxd(1.0, 0.0), 4.0 * kPi, std::sqrt(2.0), 0.25, 100000,
                                 750, 4);
             bool recurrence = std::abs(rec.analytic_variance - 0.25) < 1e-12;
             detail = fmt("worst pull %.2f SE vs 3 SE; recurrence residue %.1e", worst,
                          std::abs(rec.analytic_variance - 0.25));
             return worst <= 3.0 && recurrence;
           });

  gate.run("slow-drive first-order state error falls as one over window squared",
           [](std::string& detail) {
             double i1 = apm_fo_infidelity(4.0 * kPi);
             double i2 = apm_fo_infidelity(8.0 * kPi);
             double ratio = i1 / i2;
             int active = apm_first_order_state(apm_config(4.0 * kPi, 0.5)).active_terms;
             detail = fmt("infidelity ratio = %.3f vs 4+/-1; active terms %.0f vs 1",
                          ratio, static_cast<double>(active));
             return ratio > 3.0 && ratio < 5.0 && active == 1;
           });

  gate.run("comparison flags the missing momentum-backaction variance term",
           [](std::string& detail) {
             ExperimentConfig c = compare_config("apm");
             c.duration = 4.0 * kPi;
             c.pointer.sigma = 1.0;
             c.pointer.n_points = 512;
             c.trials = 50000000;
             c.seed = 801;
             RunResult r = run_experiment(c);
             std::vector<std::string> row = csv_last_row(r.csv);
             double sigma = std::stod(row[6]);
             bool flagged = row[7] == "discrepant" && sigma > 5.0;
             detail = fmt("difference = %.1f combined SE vs 5", sigma);
             return flagged;
           });

  gate.run("model outcome concentration tightens; rigged weights are caught",
           [](std::string& detail) {
             double tv10 =
                 consistency_check(zpm_config(10, 0.5, 512), 20000, 901, 4).tv_to_ideal;
             double tv100 =
                 consistency_check(zpm_config(100, 0.5, 512), 20000, 902, 4).tv_to_ideal;
             double tv1000 =
                 consistency_check(zpm_config(1000, 0.5, 512), 20000, 903, 4).tv_to_ideal;
             bool shrinking = tv10 > tv100 && tv100 > tv1000;
             ConsistencyReport fair =
                 consistency_check(zpm_config(50, 0.5, 512), 100000, 904, 4, 0.0);
             ConsistencyReport rigged =
                 consistency_check(zpm_config(50, 0.5, 512), 100000, 904, 4, 0.05);
             bool flagged = !fair.distribution_mismatch && rigged.distribution_mismatch;
             detail = fmt("tv to ideal %.3f > %.3f > %.3f", tv10, tv100, tv1000) +
                      (flagged ? "; bias flagged" : "; bias missed");
             return shrinking && flagged;
           });

  gate.run("same seed reproduces every CSV byte outside the timestamp",
           [](std::string& detail) {
             int checked = 0;
             for (const char* kind : {"zpm-model", "apm-model", "consistency"}) {
               ExperimentConfig c;
               c.kind = kind == std::string("zpm-model") ? ExperimentKind::kZpmModel
                        : kind == std::string("apm-model") ? ExperimentKind::kApmModel
                                                           : ExperimentKind::kConsistency;
               c.scheme = c.kind == ExperimentKind::kApmModel ? "apm" : "zpm";
               c.pointer.n_points = 512;
               c.trials = 20000;
               c.seed = 1001;
               c.threads = 2;
               std::string first = strip_timestamp(run_experiment(c).csv);
               std::string second = strip_timestamp(run_experiment(c).csv);
               if (first != second) {
                 detail = std::string("mismatch for ") + kind;
                 return false;
               }
               ++checked;
             }
             detail = fmt("%.0f experiment kinds byte-stable", double(checked));
             return checked == 3;
           });

  std::printf("%d of %d checks passed\n", gate.index - gate.failed, gate.index);
  return gate.failed == 0 ? 0 : 1;
}
