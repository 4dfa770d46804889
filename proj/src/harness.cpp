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

#include "pmsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pmsim/errors.hpp"
#include "pmsim/stats.hpp"

namespace pmsim {
namespace {

constexpr const char* kVersion = "pmsim 0.1.0";

using nlohmann::json;

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kZpmQm: return "zpm-qm";
    case ExperimentKind::kZpmModel: return "zpm-model";
    case ExperimentKind::kApmQm: return "apm-qm";
    case ExperimentKind::kApmModel: return "apm-model";
    case ExperimentKind::kCompare: return "compare";
    case ExperimentKind::kFitK: return "fit-k";
    case ExperimentKind::kConsistency: return "consistency";
  }
  throw ConfigError("config: field 'kind' holds an unknown value");
}

ExperimentKind parse_kind(const std::string& name) {
  if (name == "zpm-qm") return ExperimentKind::kZpmQm;
  if (name == "zpm-model") return ExperimentKind::kZpmModel;
  if (name == "apm-qm") return ExperimentKind::kApmQm;
  if (name == "apm-model") return ExperimentKind::kApmModel;
  if (name == "compare") return ExperimentKind::kCompare;
  if (name == "fit-k") return ExperimentKind::kFitK;
  if (name == "consistency") return ExperimentKind::kConsistency;
  throw ConfigError("config: field 'kind' must be one of zpm-qm, zpm-model, apm-qm, "
                    "apm-model, compare, fit-k, consistency");
}

// Scheme fixed by the kind; empty string means the config may choose.
std::string implied_scheme(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kZpmQm:
    case ExperimentKind::kZpmModel: return "zpm";
    case ExperimentKind::kApmQm:
    case ExperimentKind::kApmModel: return "apm";
    case ExperimentKind::kFitK: return "zpm";
    default: return "";
  }
}

std::string ordering_name(ZpmOrdering ordering) {
  return ordering == ZpmOrdering::kProjectThenCouple ? "project-then-couple"
                                                     : "couple-then-project";
}

double as_number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError("config: field '" + name + "' must be a number");
  return v.get<double>();
}

double as_positive(const json& v, const std::string& name) {
  double x = as_number(v, name);
  if (!(x > 0.0) || !std::isfinite(x))
    throw ConfigError("config: field '" + name + "' must be positive");
  return x;
}

std::int64_t as_positive_int(const json& v, const std::string& name) {
  if (!v.is_number_integer())
    throw ConfigError("config: field '" + name + "' must be a positive integer");
  std::int64_t x = v.get<std::int64_t>();
  if (x <= 0) throw ConfigError("config: field '" + name + "' must be a positive integer");
  return x;
}

std::string as_string(const json& v, const std::string& name) {
  if (!v.is_string()) throw ConfigError("config: field '" + name + "' must be a string");
  return v.get<std::string>();
}

cxd as_complex(const json& v, const std::string& name) {
  if (v.is_number()) return cxd(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return cxd(v[0].get<double>(), v[1].get<double>());
  throw ConfigError("config: field '" + name + "' must be a number or an [re, im] pair");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string preamble(const ExperimentConfig& config, const std::string& kind_label) {
  std::ostringstream out;
  out << "# " << kVersion << "\n";
  out << "# kind: " << kind_label << "\n";
  out << "# scheme: " << config.scheme << "\n";
  out << "# seed: " << config.seed << "\n";
  out << "# threads: " << config.threads << "\n";
  out << "# timestamp: " << timestamp_utc() << "\n";
  out << "# config: " << canonical_config(config).dump() << "\n";
  return out.str();
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

// Halve the grid for the refinement rerun when that still resolves the
// packet; double it otherwise. Either way the error estimate compares two
// resolutions of the same physical setup.
int refined_points(int n_points) { return n_points >= 512 ? n_points / 2 : 2 * n_points; }

struct QmPoint {
  double shift;
  double shift_err;
  double variance;
  double variance_err;
  double success;  // all-protections-succeed probability; 1 for the slow drive
  double tail;
};

QmPoint zpm_qm_point(const ExperimentConfig& config) {
  ZpmOutcome full = run_zpm(build_zpm(config));
  ExperimentConfig alt = config;
  alt.pointer.n_points = refined_points(config.pointer.n_points);
  ZpmOutcome ref = run_zpm(build_zpm(alt));
  QmPoint point;
  point.shift = full.pointer_mean - config.pointer.center;
  point.shift_err = std::max(std::abs(full.pointer_mean - ref.pointer_mean), 1e-12);
  point.variance = full.pointer_variance;
  point.variance_err =
      std::max(std::abs(full.pointer_variance - ref.pointer_variance), 1e-12);
  point.success = full.success_probability;
  point.tail = 0.0;
  return point;
}

QmPoint apm_qm_point(const ExperimentConfig& config) {
  ApmConfig apm = build_apm(config);
  ApmOutcome full = run_apm(apm, apm_default_steps(apm.duration));
  ExperimentConfig alt = config;
  alt.pointer.n_points = refined_points(config.pointer.n_points);
  ApmConfig apm_ref = build_apm(alt);
  ApmOutcome ref = run_apm(apm_ref, apm_default_steps(apm_ref.duration));
  QmPoint point;
  point.shift = full.shift;
  point.shift_err = std::max(std::abs(full.shift - ref.shift), 1e-12);
  point.variance = full.pointer_variance;
  point.variance_err =
      std::max(std::abs(full.pointer_variance - ref.pointer_variance), 1e-12);
  point.success = 1.0;
  point.tail = full.max_truncation_tail;
  return point;
}

// One quantum-versus-model comparison at a fully specified parameter point.
DiscrepancyRow make_row(const ExperimentConfig& point, double parameter_value,
                        std::uint64_t seed) {
  double var_x0 = point.pointer.sigma * point.pointer.sigma;
  DiscrepancyRow row{};
  row.parameter = parameter_value;
  double scale = 0.0;  // coefficient = scale * (variance - var_x0)
  ModelStats stats;
  QmPoint qm;
  if (point.scheme == "zpm") {
    qm = zpm_qm_point(point);
    ZpmConfig zpm = build_zpm(point);
    double var_a = variance_obs(zpm.system_state, zpm.measured);
    scale = var_a > 0.0 ? point.n_rounds / var_a : 0.0;
    stats = zpm_model_stats(zpm.system_state, zpm.measured, point.n_rounds, var_x0,
                            point.trials, seed, point.threads, point.bias);
  } else {
    qm = apm_qm_point(point);
    ApmConfig apm = build_apm(point);
    double exp_a = expectation(apm.system.ground, apm.measured);
    scale = apm.duration * apm.duration;
    stats = apm_model_stats(point.alpha, apm.duration, exp_a, var_x0, point.trials,
                            seed, point.threads);
  }
  row.qm_variance = qm.variance;
  row.qm_err = qm.variance_err;
  row.model_variance = stats.mc_variance;
  row.model_se = stats.mc_variance_se;
  row.qm_coefficient = scale * (qm.variance - var_x0);
  row.qm_coefficient_err = scale > 0.0 ? scale * qm.variance_err : 1.0;
  row.model_coefficient = scale * (stats.mc_variance - var_x0);
  row.model_coefficient_se = scale > 0.0 ? scale * stats.mc_variance_se : 1.0;
  double combined = std::sqrt(row.qm_err * row.qm_err + row.model_se * row.model_se);
  row.difference_sigma = std::abs(row.qm_variance - row.model_variance) / combined;
  row.discrepant = row.difference_sigma > 5.0;
  return row;
}

std::string verdict_name(bool discrepant) { return discrepant ? "discrepant" : "consistent"; }

}  // namespace

nlohmann::json canonical_config(const ExperimentConfig& config) {
  json j;
  j["kind"] = kind_name(config.kind);
  j["scheme"] = config.scheme;
  if (config.scheme == "zpm") {
    json state = json::array();
    for (const cxd& amp : config.state_amps)
      state.push_back(json::array({amp.real(), amp.imag()}));
    j["state"] = state;
    j["basis"] = config.state_basis;
    j["observable"] = config.observable_diagonal;
    j["n_rounds"] = config.n_rounds;
    j["ordering"] = ordering_name(config.ordering);
    j["bias"] = config.bias;
  } else {
    j["alpha"] = json::array({config.alpha.real(), config.alpha.imag()});
    j["fock_dim"] = config.fock_dim;
    j["duration"] = config.duration;
    j["measured"] = config.apm_observable;
  }
  j["pointer"] = {{"sigma", config.pointer.sigma},
                  {"center", config.pointer.center},
                  {"n_points", config.pointer.n_points},
                  {"extent_sigmas", config.pointer.extent_sigmas},
                  {"mass", config.pointer.mass}};
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["threads"] = config.threads;
  if (config.kind == ExperimentKind::kFitK) j["width_grid"] = config.width_grid;
  return j;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  static const std::set<std::string> known = {
      "kind",     "scheme",   "state",   "basis",    "observable", "n_rounds",
      "ordering", "alpha",    "fock_dim", "duration", "measured",   "pointer",
      "trials",   "seed",     "threads", "bias",     "width_grid", "out"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw ConfigError("config: unknown field '" + item.key() + "'");

  ExperimentConfig c;
  if (!j.contains("kind")) throw ConfigError("config: field 'kind' is required");
  c.kind = parse_kind(as_string(j.at("kind"), "kind"));

  std::string implied = implied_scheme(c.kind);
  if (j.contains("scheme")) {
    c.scheme = as_string(j.at("scheme"), "scheme");
    if (c.scheme != "zpm" && c.scheme != "apm")
      throw ConfigError("config: field 'scheme' must be \"zpm\" or \"apm\"");
    if (!implied.empty() && c.scheme != implied)
      throw ConfigError("config: field 'scheme' must be \"" + implied + "\" for kind " +
                        kind_name(c.kind));
  } else {
    c.scheme = implied.empty() ? "zpm" : implied;
  }

  if (j.contains("state")) {
    const json& state = j.at("state");
    if (!state.is_array() || state.size() < 2)
      throw ConfigError("config: field 'state' must list at least two amplitudes");
    c.state_amps.clear();
    for (const json& amp : state) c.state_amps.push_back(as_complex(amp, "state"));
  }
  if (j.contains("basis")) c.state_basis = as_string(j.at("basis"), "basis");
  if (j.contains("observable")) {
    const json& obs = j.at("observable");
    if (!obs.is_array() || obs.empty())
      throw ConfigError("config: field 'observable' must be an array of eigenvalues");
    c.observable_diagonal.clear();
    for (const json& v : obs) c.observable_diagonal.push_back(as_number(v, "observable"));
  }
  if (c.scheme == "zpm" &&
      c.observable_diagonal.size() != c.state_amps.size())
    throw ConfigError("config: field 'observable' must match the state dimension");
  if (j.contains("n_rounds")) {
    std::int64_t n = as_positive_int(j.at("n_rounds"), "n_rounds");
    if (n > 1000000) throw ConfigError("config: field 'n_rounds' is unreasonably large");
    c.n_rounds = static_cast<int>(n);
  }
  if (j.contains("ordering")) {
    std::string name = as_string(j.at("ordering"), "ordering");
    if (name == "project-then-couple")
      c.ordering = ZpmOrdering::kProjectThenCouple;
    else if (name == "couple-then-project")
      c.ordering = ZpmOrdering::kCoupleThenProject;
    else
      throw ConfigError("config: field 'ordering' must be \"project-then-couple\" or "
                        "\"couple-then-project\"");
  }

  if (j.contains("alpha")) c.alpha = as_complex(j.at("alpha"), "alpha");
  if (j.contains("fock_dim")) {
    std::int64_t n = as_positive_int(j.at("fock_dim"), "fock_dim");
    if (n < 40 || n > 4096)
      throw ConfigError("config: field 'fock_dim' must be between 40 and 4096");
    c.fock_dim = static_cast<int>(n);
  }
  if (j.contains("duration")) c.duration = as_positive(j.at("duration"), "duration");
  if (j.contains("measured")) {
    c.apm_observable = as_string(j.at("measured"), "measured");
    if (c.apm_observable != "q" && c.apm_observable != "p" &&
        c.apm_observable != "energy")
      throw ConfigError("config: field 'measured' must be \"q\", \"p\", or \"energy\"");
  }

  if (j.contains("pointer")) {
    const json& p = j.at("pointer");
    if (!p.is_object()) throw ConfigError("config: field 'pointer' must be an object");
    static const std::set<std::string> pointer_known = {"sigma", "center", "n_points",
                                                        "extent_sigmas", "mass"};
    for (const auto& item : p.items())
      if (!pointer_known.count(item.key()))
        throw ConfigError("config: unknown field 'pointer." + item.key() + "'");
    if (p.contains("sigma")) c.pointer.sigma = as_positive(p.at("sigma"), "pointer.sigma");
    if (p.contains("center")) c.pointer.center = as_number(p.at("center"), "pointer.center");
    if (p.contains("n_points")) {
      std::int64_t n = as_positive_int(p.at("n_points"), "pointer.n_points");
      if (n < 8 || n > (1 << 22) || (n & (n - 1)) != 0)
        throw ConfigError("config: field 'pointer.n_points' must be a power of two");
      c.pointer.n_points = static_cast<int>(n);
    }
    if (p.contains("extent_sigmas"))
      c.pointer.extent_sigmas = as_positive(p.at("extent_sigmas"), "pointer.extent_sigmas");
    if (p.contains("mass")) c.pointer.mass = as_positive(p.at("mass"), "pointer.mass");
  }

  if (j.contains("trials")) c.trials = as_positive_int(j.at("trials"), "trials");
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<std::int64_t>() < 0))
      throw ConfigError("config: field 'seed' must be a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("threads")) {
    std::int64_t n = as_positive_int(j.at("threads"), "threads");
    if (n > 256) throw ConfigError("config: field 'threads' must be at most 256");
    c.threads = static_cast<int>(n);
  }
  if (j.contains("bias")) {
    double b = as_number(j.at("bias"), "bias");
    if (b < 0.0 || b >= 1.0)
      throw ConfigError("config: field 'bias' must lie in [0, 1)");
    c.bias = b;
  }
  if (j.contains("width_grid")) {
    const json& grid = j.at("width_grid");
    if (!grid.is_array())
      throw ConfigError("config: field 'width_grid' must be an array of variances");
    c.width_grid.clear();
    for (const json& v : grid) c.width_grid.push_back(as_positive(v, "width_grid"));
  }
  if (c.kind == ExperimentKind::kFitK && c.width_grid.size() < 5)
    throw ConfigError("config: field 'width_grid' must list at least five variances");
  if (j.contains("out")) c.out = as_string(j.at("out"), "out");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

ZpmConfig build_zpm(const ExperimentConfig& config) {
  VecC amps(static_cast<Eigen::Index>(config.state_amps.size()));
  for (std::size_t i = 0; i < config.state_amps.size(); ++i)
    amps[static_cast<Eigen::Index>(i)] = config.state_amps[i];
  QuantumState psi = QuantumState::normalized(amps, config.state_basis);
  if (static_cast<Eigen::Index>(config.observable_diagonal.size()) != psi.dim())
    throw ConfigError("config: field 'observable' must match the state dimension");
  VecR diag(psi.dim());
  for (Eigen::Index i = 0; i < psi.dim(); ++i)
    diag[i] = config.observable_diagonal[static_cast<std::size_t>(i)];
  Observable a = Observable::diagonal(diag, config.state_basis);
  PointerGrid grid = make_grid(config.pointer.sigma, config.pointer.center,
                               config.pointer.n_points, config.pointer.extent_sigmas,
                               config.pointer.mass);
  PointerState pointer = make_gaussian(grid, config.pointer.center, config.pointer.sigma);
  return ZpmConfig{config.n_rounds, std::move(psi), std::move(a), std::move(pointer),
                   config.ordering};
}

ApmConfig build_apm(const ExperimentConfig& config) {
  OscillatorSystem system = build_displaced_oscillator(config.alpha, config.fock_dim);
  Observable measured = config.apm_observable == "q"        ? system.q
                        : config.apm_observable == "p"      ? system.p
                        : config.apm_observable == "energy" ? system.hamiltonian
                                                            : throw ConfigError(
                                                                  "config: field 'measured' "
                                                                  "must be \"q\", \"p\", or "
                                                                  "\"energy\"");
  PointerGrid grid = make_grid(config.pointer.sigma, config.pointer.center,
                               config.pointer.n_points, config.pointer.extent_sigmas,
                               config.pointer.mass);
  PointerState pointer = make_gaussian(grid, config.pointer.center, config.pointer.sigma);
  return ApmConfig{std::move(system), std::move(measured), config.duration,
                   std::move(pointer)};
}

DiscrepancyReport sweep_compare(const ExperimentConfig& config,
                                const std::string& parameter,
                                const std::vector<double>& values) {
  if (values.size() < 3)
    throw ConfigError("sweep: needs at least 3 parameter values");
  bool zpm = config.scheme == "zpm";
  if (parameter != "var_x0" && parameter != (zpm ? "N" : "T"))
    throw ConfigError("sweep: parameter '" + parameter + "' is not valid for scheme '" +
                      config.scheme + "' (use " + (zpm ? "N" : "T") + " or var_x0)");

  DiscrepancyReport report;
  report.parameter = parameter;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double value = values[i];
    ExperimentConfig point = config;
    if (parameter == "N") {
      if (value < 1.0 || value != std::floor(value))
        throw ConfigError("sweep: N values must be positive integers");
      point.n_rounds = static_cast<int>(value);
    } else if (parameter == "T") {
      if (!(value > 0.0)) throw ConfigError("sweep: T values must be positive");
      point.duration = value;
    } else {
      if (!(value > 0.0)) throw ConfigError("sweep: var_x0 values must be positive");
      point.pointer.sigma = std::sqrt(value);
    }
    report.rows.push_back(make_row(point, value, config.seed + i));
  }

  std::vector<double> distinct = values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (parameter == "var_x0" && distinct.size() >= 2) {
    std::vector<double> qm_c, qm_e, model_c, model_e;
    for (const DiscrepancyRow& row : report.rows) {
      qm_c.push_back(row.qm_coefficient);
      qm_e.push_back(row.qm_coefficient_err);
      model_c.push_back(row.model_coefficient);
      model_e.push_back(row.model_coefficient_se);
    }
    LineFit qm_fit = fit_line(values, qm_c, qm_e);
    LineFit model_fit = fit_line(values, model_c, model_e);
    report.has_slopes = true;
    report.qm_slope = qm_fit.slope;
    report.qm_slope_se = qm_fit.slope_se;
    report.model_slope = model_fit.slope;
    report.model_slope_se = model_fit.slope_se;
  }
  return report;
}

OverlapResult distribution_overlap(const std::vector<double>& samples_a,
                                   const std::vector<double>& samples_b,
                                   OverlapEstimator estimator) {
  if (samples_a.size() < 1000 || samples_b.size() < 1000)
    throw ConfigError("distribution_overlap: needs at least 1000 samples per side");

  if (estimator == OverlapEstimator::kBhattacharyyaGaussian) {
    MomentAccumulator a, b;
    for (double x : samples_a) a.add(x);
    for (double x : samples_b) b.add(x);
    OverlapResult result;
    result.overlap = bhattacharyya_gaussian(a.mean(), a.variance(), b.mean(), b.variance());
    // Loose moment-estimation bound; tightest near identical inputs.
    result.bias_bound = 1.0 / static_cast<double>(samples_a.size()) +
                        1.0 / static_cast<double>(samples_b.size());
    return result;
  }

  // Shared Freedman-Diaconis width from the pooled samples keeps the
  // estimator symmetric in its arguments.
  std::vector<double> pooled = samples_a;
  pooled.insert(pooled.end(), samples_b.begin(), samples_b.end());
  std::sort(pooled.begin(), pooled.end());
  std::size_t n = pooled.size();
  double q1 = pooled[n / 4];
  double q3 = pooled[(3 * n) / 4];
  double width = 2.0 * (q3 - q1) / std::cbrt(static_cast<double>(n));
  if (width <= 0.0) {
    MomentAccumulator pool;
    for (double x : pooled) pool.add(x);
    double sd = std::sqrt(std::max(pool.variance(), 0.0));
    width = 3.49 * sd / std::cbrt(static_cast<double>(n));
  }
  if (width <= 0.0) {
    // All pooled samples coincide: both are the same point mass.
    return OverlapResult{1.0, 0.0};
  }

  Histogram ha = histogram_fixed(samples_a, width);
  Histogram hb = histogram_fixed(samples_b, width);
  std::int64_t lo = std::min(ha.lo_index, hb.lo_index);
  std::int64_t hi = std::max(ha.lo_index + static_cast<std::int64_t>(ha.mass.size()),
                             hb.lo_index + static_cast<std::int64_t>(hb.mass.size()));
  double shared = 0.0;  // mass the two histograms place in the same bins
  for (std::int64_t bin = lo; bin < hi; ++bin)
    shared += std::min(ha.mass_at(bin), hb.mass_at(bin));
  OverlapResult result;
  // 1 - TV is exact for identical inputs; the shared-mass test keeps disjoint
  // supports at exactly zero instead of a rounding residue.
  result.overlap = shared == 0.0 ? 0.0 : 1.0 - tv_distance(ha, hb);
  result.bias_bound = tv_bias_bound(hi - lo, static_cast<std::int64_t>(samples_a.size()),
                                    static_cast<std::int64_t>(samples_b.size()));
  return result;
}

RunResult run_experiment(const ExperimentConfig& config) {
  std::string csv = preamble(config, kind_name(config.kind));
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  switch (config.kind) {
    case ExperimentKind::kZpmQm: {
      QmPoint point = zpm_qm_point(config);
      header = {"n_rounds", "var_x0",       "success_probability", "shift",
                "shift_err", "pointer_variance", "variance_err"};
      rows.push_back({std::to_string(config.n_rounds),
                      fmt(config.pointer.sigma * config.pointer.sigma), fmt(point.success),
                      fmt(point.shift), fmt(point.shift_err), fmt(point.variance),
                      fmt(point.variance_err)});
      break;
    }
    case ExperimentKind::kApmQm: {
      QmPoint point = apm_qm_point(config);
      header = {"duration",  "var_x0",           "shift",        "shift_err",
                "pointer_variance", "variance_err", "max_truncation_tail"};
      rows.push_back({fmt(config.duration), fmt(config.pointer.sigma * config.pointer.sigma),
                      fmt(point.shift), fmt(point.shift_err), fmt(point.variance),
                      fmt(point.variance_err), fmt(point.tail)});
      break;
    }
    case ExperimentKind::kZpmModel: {
      ZpmConfig zpm = build_zpm(config);
      double var_x0 = config.pointer.sigma * config.pointer.sigma;
      ModelStats stats =
          zpm_model_stats(zpm.system_state, zpm.measured, config.n_rounds, var_x0,
                          config.trials, config.seed, config.threads, config.bias);
      header = {"n_rounds", "var_x0",           "trials",      "analytic_mean",
                "analytic_variance", "mc_mean", "mc_mean_se", "mc_variance",
                "mc_variance_se"};
      rows.push_back({std::to_string(config.n_rounds), fmt(var_x0),
                      std::to_string(stats.n_trials), fmt(stats.analytic_mean),
                      fmt(stats.analytic_variance), fmt(stats.mc_mean),
                      fmt(stats.mc_mean_se), fmt(stats.mc_variance),
                      fmt(stats.mc_variance_se)});
      break;
    }
    case ExperimentKind::kApmModel: {
      ApmConfig apm = build_apm(config);
      double var_x0 = config.pointer.sigma * config.pointer.sigma;
      double exp_a = expectation(apm.system.ground, apm.measured);
      ModelStats stats = apm_model_stats(config.alpha, config.duration, exp_a, var_x0,
                                         config.trials, config.seed, config.threads);
      header = {"duration", "var_x0",           "trials",      "analytic_mean",
                "analytic_variance", "mc_mean", "mc_mean_se", "mc_variance",
                "mc_variance_se"};
      rows.push_back({fmt(config.duration), fmt(var_x0), std::to_string(stats.n_trials),
                      fmt(stats.analytic_mean), fmt(stats.analytic_variance),
                      fmt(stats.mc_mean), fmt(stats.mc_mean_se), fmt(stats.mc_variance),
                      fmt(stats.mc_variance_se)});
      break;
    }
    case ExperimentKind::kCompare: {
      bool zpm = config.scheme == "zpm";
      double value = zpm ? static_cast<double>(config.n_rounds) : config.duration;
      DiscrepancyRow row = make_row(config, value, config.seed);
      header = {zpm ? "N" : "T", "var_x0",        "qm_variance",     "qm_err",
                "model_variance", "model_se",     "difference_sigma", "verdict"};
      rows.push_back({fmt(row.parameter), fmt(config.pointer.sigma * config.pointer.sigma),
                      fmt(row.qm_variance), fmt(row.qm_err), fmt(row.model_variance),
                      fmt(row.model_se), fmt(row.difference_sigma),
                      verdict_name(row.discrepant)});
      break;
    }
    case ExperimentKind::kFitK: {
      if (config.scheme != "zpm")
        throw ConfigError("config: field 'scheme' must be \"zpm\" for kind fit-k");
      ZpmConfig zpm = build_zpm(config);
      PointerConstantsFit fit =
          fit_pointer_constants(config.width_grid, zpm.system_state, zpm.measured,
                                config.n_rounds, config.pointer.n_points,
                                config.pointer.extent_sigmas);
      header = {"var_x0", "coefficient", "k1",      "k1_se",  "k2",
                "k2_se",  "rms_residual", "condition", "alt_b0", "alt_b1",
                "alt_rms_residual"};
      for (std::size_t i = 0; i < fit.var_grid.size(); ++i)
        rows.push_back({fmt(fit.var_grid[i]), fmt(fit.coefficients[i]), fmt(fit.k1),
                        fmt(fit.k1_se), fmt(fit.k2), fmt(fit.k2_se), fmt(fit.rms_residual),
                        fmt(fit.condition), fmt(fit.alt_b0), fmt(fit.alt_b1),
                        fmt(fit.alt_rms_residual)});
      break;
    }
    case ExperimentKind::kConsistency: {
      bool zpm = config.scheme == "zpm";
      ConsistencyReport report =
          zpm ? consistency_check(build_zpm(config), config.trials, config.seed,
                                  config.threads, config.bias)
              : consistency_check(build_apm(config), config.trials, config.seed,
                                  config.threads);
      double value = zpm ? static_cast<double>(config.n_rounds) : config.duration;
      header = {"scheme",        "parameter",      "trials",
                "bias",          "tv_to_ideal",    "tv_to_quantum",
                "tv_noise_floor", "distribution_mismatch", "model_mean",
                "model_mean_se", "model_variance", "model_variance_se",
                "quantum_mean",  "quantum_variance", "variance_sigma"};
      rows.push_back({config.scheme, fmt(value), std::to_string(report.n_trials),
                      fmt(config.bias), fmt(report.tv_to_ideal), fmt(report.tv_to_quantum),
                      fmt(report.tv_noise_floor),
                      report.distribution_mismatch ? "1" : "0", fmt(report.model_mean),
                      fmt(report.model_mean_se), fmt(report.model_variance),
                      fmt(report.model_variance_se), fmt(report.quantum_mean),
                      fmt(report.quantum_variance), fmt(report.variance_sigma)});
      break;
    }
  }

  csv += join_row(header);
  for (const auto& row : rows) csv += join_row(row);
  return RunResult{std::move(csv)};
}

RunResult run_sweep(const ExperimentConfig& config, const std::string& parameter,
                    const std::vector<double>& values) {
  DiscrepancyReport report = sweep_compare(config, parameter, values);
  std::string csv = preamble(config, "sweep(" + parameter + ")");
  if (report.has_slopes) {
    csv += "# qm_coefficient_slope: " + fmt(report.qm_slope) + "\n";
    csv += "# qm_coefficient_slope_se: " + fmt(report.qm_slope_se) + "\n";
    csv += "# model_coefficient_slope: " + fmt(report.model_slope) + "\n";
    csv += "# model_coefficient_slope_se: " + fmt(report.model_slope_se) + "\n";
  }
  csv += join_row({report.parameter, "qm_variance", "qm_err", "model_variance",
                   "model_se", "qm_coefficient", "qm_coefficient_err",
                   "model_coefficient", "model_coefficient_se", "difference_sigma",
                   "verdict"});
  for (const DiscrepancyRow& row : report.rows)
    csv += join_row({fmt(row.parameter), fmt(row.qm_variance), fmt(row.qm_err),
                     fmt(row.model_variance), fmt(row.model_se), fmt(row.qm_coefficient),
                     fmt(row.qm_coefficient_err), fmt(row.model_coefficient),
                     fmt(row.model_coefficient_se), fmt(row.difference_sigma),
                     verdict_name(row.discrepant)});
  return RunResult{std::move(csv)};
}

std::string strip_timestamp(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.rfind("# timestamp:", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out.good()) throw IoError("failed while writing '" + path + "'");
}

std::string plot_script(const ExperimentConfig& config, const std::string& csv_path) {
  std::ostringstream out;
  out << "# " << kVersion << " plot script\n";
  out << "set datafile separator ','\n";
  out << "set datafile commentschars '#'\n";
  out << "set key autotitle columnhead\n";
  out << "set grid\n";
  out << "set title '" << kind_name(config.kind) << " (" << config.scheme << ")'\n";
  out << "set term pngcairo size 900,600\n";
  out << "set output '" << csv_path << ".png'\n";
  out << "plot '" << csv_path << "' using 1:2 with linespoints\n";
  return out.str();
}

}  // namespace pmsim
