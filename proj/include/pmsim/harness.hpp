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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmsim/adiabatic.hpp"
#include "pmsim/epistemic.hpp"
#include "pmsim/zeno.hpp"

namespace pmsim {

enum class ExperimentKind {
  kZpmQm,
  kZpmModel,
  kApmQm,
  kApmModel,
  kCompare,
  kFitK,
  kConsistency,
};

struct PointerSpec {
  double sigma = 0.5;
  double center = 0.0;
  int n_points = 1024;
  double extent_sigmas = 40.0;
  double mass = 10.0;
};

// Parsed experiment description. scheme selects the protection type for the
// kinds shared by both ("compare", "consistency"); the rest of the fields are
// read as the chosen scheme requires and validated by the target module.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kZpmQm;
  std::string scheme = "zpm";  // "zpm" | "apm"

  // Round-based protection.
  std::vector<cxd> state_amps = {cxd(0.6, 0.0), cxd(0.8, 0.0)};
  std::string state_basis = "s";
  std::vector<double> observable_diagonal = {1.0, -1.0};
  int n_rounds = 100;
  ZpmOrdering ordering = ZpmOrdering::kProjectThenCouple;

  // Slow-drive protection.
  cxd alpha = cxd(1.0, 0.0);
  int fock_dim = 48;
  double duration = 4.0 * 3.14159265358979323846;  // one recurrence period x 2
  std::string apm_observable = "q";  // "q" | "p" | "energy"

  PointerSpec pointer;
  std::int64_t trials = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  double bias = 0.0;
  std::vector<double> width_grid = {0.25, 0.5, 0.75, 1.0, 1.5};
  std::string out;
};

// Canonical JSON echo of the effective settings, written to the CSV preamble.
// Built from the struct, so command-line overrides are reflected.
nlohmann::json canonical_config(const ExperimentConfig& config);

// Parses and validates a config object, naming the offending field in every
// error. load_config additionally reads the file (IoError when unreadable).
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Module-level inputs assembled from a config.
ZpmConfig build_zpm(const ExperimentConfig& config);
ApmConfig build_apm(const ExperimentConfig& config);

struct DiscrepancyRow {
  double parameter;
  double qm_variance;
  double qm_err;  // grid-refinement uncertainty of the quantum value
  double model_variance;
  double model_se;
  double qm_coefficient;  // scheme's first-order variance coefficient
  double qm_coefficient_err;
  double model_coefficient;
  double model_coefficient_se;
  double difference_sigma;  // |qm - model| variance gap over the combined SE
  bool discrepant;          // above five combined SE
};

struct DiscrepancyReport {
  std::string parameter;  // "N" | "T" | "var_x0"
  std::vector<DiscrepancyRow> rows;
  // Weighted-fit slopes of the coefficient columns, var_x0 sweeps only.
  bool has_slopes = false;
  double qm_slope = 0.0;
  double qm_slope_se = 0.0;
  double model_slope = 0.0;
  double model_slope_se = 0.0;
};

// One report row per swept value (at least 3). Monte Carlo rows use seed +
// row index, so repeating a value resamples rather than duplicates.
DiscrepancyReport sweep_compare(const ExperimentConfig& config,
                                const std::string& parameter,
                                const std::vector<double>& values);

// sweep_compare rendered as CSV; var_x0 sweeps add the coefficient slope
// summary to the preamble.
struct RunResult;
RunResult run_sweep(const ExperimentConfig& config, const std::string& parameter,
                    const std::vector<double>& values);

enum class OverlapEstimator { kTvHistogram, kBhattacharyyaGaussian };

struct OverlapResult {
  double overlap;     // in [0, 1]; 1 means indistinguishable
  double bias_bound;  // estimator bias bound at these sample counts
};

// Symmetric overlap of two sampled distributions: one minus the histogram
// total-variation distance (Freedman-Diaconis width on the pooled samples) or
// the Bhattacharyya coefficient of fitted normals. Needs 1000 samples a side.
OverlapResult distribution_overlap(const std::vector<double>& samples_a,
                                   const std::vector<double>& samples_b,
                                   OverlapEstimator estimator);

struct RunResult {
  std::string csv;  // preamble, header row, data rows
};

// Executes the configured experiment and renders the CSV. Identical
// (config, seed) pairs produce identical bytes except the timestamp line.
RunResult run_experiment(const ExperimentConfig& config);

// Drops preamble lines starting with "# timestamp:"; the determinism contract
// covers everything else.
std::string strip_timestamp(const std::string& csv);

void write_text(const std::string& path, const std::string& text);

// Minimal gnuplot script plotting the first two data columns of the CSV.
std::string plot_script(const ExperimentConfig& config, const std::string& csv_path);

}  // namespace pmsim
