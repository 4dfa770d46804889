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

#include "pmsim/epistemic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "pmsim/stats.hpp"

namespace pmsim {

namespace {

constexpr std::int64_t kChunkTrials = 65536;
constexpr std::uint32_t kStreamZpm = 1;
constexpr std::uint32_t kStreamApm = 2;

std::int64_t bin_of(double x, double width) {
  return static_cast<std::int64_t>(std::floor(x / width));
}

// Per-chunk partial results. Chunks are merged in index order afterwards, so
// the totals are bit-identical for any thread count.
struct TrialChunk {
  MomentAccumulator xf;
  std::map<std::int64_t, std::int64_t> xf_bins;
  std::map<std::int64_t, std::int64_t> shift_bins;
};

template <typename PerTrial>
std::vector<TrialChunk> run_trials(std::int64_t n_trials, int n_threads,
                                   const PerTrial& per_trial) {
  if (n_trials < 1000) {
    throw ConfigError("monte carlo: need at least 1000 trials, got " +
                      std::to_string(n_trials));
  }
  if (n_threads < 1) throw ConfigError("monte carlo: thread count must be positive");
  std::int64_t n_chunks = (n_trials + kChunkTrials - 1) / kChunkTrials;
  std::vector<TrialChunk> chunks(static_cast<std::size_t>(n_chunks));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (std::int64_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) {
      TrialChunk& chunk = chunks[static_cast<std::size_t>(c)];
      std::int64_t begin = c * kChunkTrials;
      std::int64_t end = std::min(n_trials, begin + kChunkTrials);
      for (std::int64_t t = begin; t < end; ++t) per_trial(t, chunk);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return chunks;
}

MomentAccumulator merge_moments(const std::vector<TrialChunk>& chunks) {
  MomentAccumulator acc;
  for (const TrialChunk& c : chunks) acc.merge(c.xf);
  return acc;
}

std::map<std::int64_t, std::int64_t> merge_bins(
    const std::vector<TrialChunk>& chunks, bool shift) {
  std::map<std::int64_t, std::int64_t> total;
  for (const TrialChunk& c : chunks) {
    for (const auto& [idx, count] : shift ? c.shift_bins : c.xf_bins) {
      total[idx] += count;
    }
  }
  return total;
}

Histogram counts_to_histogram(const std::map<std::int64_t, std::int64_t>& counts,
                              double width, std::int64_t n_samples) {
  Histogram h;
  h.width = width;
  h.lo_index = counts.begin()->first;
  h.n_samples = n_samples;
  h.mass.assign(static_cast<std::size_t>(counts.rbegin()->first - h.lo_index + 1),
                0.0);
  for (const auto& [idx, count] : counts) {
    h.mass[static_cast<std::size_t>(idx - h.lo_index)] =
        static_cast<double>(count) / static_cast<double>(n_samples);
  }
  return h;
}

// Bins the position marginal of a composite state on the shared bin width.
Histogram marginal_histogram(CompositeState state) {
  state.to_position();
  const PointerGrid& grid = state.grid();
  std::vector<double> positions(static_cast<std::size_t>(grid.n_points));
  std::vector<double> masses(static_cast<std::size_t>(grid.n_points));
  double total = state.amps().squaredNorm();
  for (int i = 0; i < grid.n_points; ++i) {
    positions[static_cast<std::size_t>(i)] = grid.position(i);
    masses[static_cast<std::size_t>(i)] = state.amps().row(i).squaredNorm() / total;
  }
  return histogram_density(positions, masses, grid.dx, kConsistencyBinWidth);
}

struct ModelEnsemble {
  MomentAccumulator moments;
  Histogram xf_hist;
  Histogram shift_hist;
};

template <typename PerTrial>
ModelEnsemble collect_ensemble(std::int64_t n_trials, int n_threads,
                               const PerTrial& per_trial) {
  std::vector<TrialChunk> chunks = run_trials(n_trials, n_threads, per_trial);
  ModelEnsemble e;
  e.moments = merge_moments(chunks);
  e.xf_hist = counts_to_histogram(merge_bins(chunks, false), kConsistencyBinWidth,
                                  n_trials);
  e.shift_hist = counts_to_histogram(merge_bins(chunks, true), kConsistencyBinWidth,
                                     n_trials);
  return e;
}

ConsistencyReport assemble_report(const ModelEnsemble& e, const Histogram& quantum,
                                  double ideal_shift, double quantum_mean,
                                  double quantum_variance, std::int64_t n_trials) {
  ConsistencyReport r{};
  r.n_trials = n_trials;
  r.tv_to_ideal = tv_distance_to_point(e.shift_hist, ideal_shift);
  r.tv_to_quantum = tv_distance(e.xf_hist, quantum);
  // Sampling bound on the TV estimate; the quantum side is exact.
  r.tv_noise_floor = 0.5 * std::sqrt(static_cast<double>(e.xf_hist.mass.size()) /
                                     static_cast<double>(n_trials));
  r.distribution_mismatch = r.tv_to_quantum > 3.0 * r.tv_noise_floor;
  r.model_mean = e.moments.mean();
  r.model_mean_se = e.moments.mean_se();
  r.model_variance = e.moments.variance();
  r.model_variance_se = e.moments.variance_se();
  r.quantum_mean = quantum_mean;
  r.quantum_variance = quantum_variance;
  r.variance_sigma = std::abs(r.model_variance - quantum_variance) /
                     r.model_variance_se;
  return r;
}

}  // namespace

ZpmSampler::ZpmSampler(const QuantumState& psi, const Observable& a, double bias) {
  VecR weights = born_weights(psi, a);
  double sum = weights.sum();
  if (std::abs(sum - 1.0) > 1e-10) {
    throw NumericalError("sampler: Born weights sum to " + std::to_string(sum));
  }
  if (bias < 0.0 || bias > weights[0]) {
    throw ConfigError("sampler: bias must lie within the lowest outcome's weight");
  }
  if (bias > 0.0) {
    weights[0] -= bias;
    weights[weights.size() - 1] += bias;
  }
  eigenvalues_ = a.eigenvalues();
  mean_ = weights.dot(eigenvalues_);
  variance_ = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    double d = eigenvalues_[k] - mean_;
    variance_ += weights[k] * d * d;
  }
  cumulative_.resize(static_cast<std::size_t>(weights.size()));
  double running = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    running += weights[k];
    cumulative_[static_cast<std::size_t>(k)] = running;
  }
  cumulative_.back() = 1.0;
}

OnticZSample ZpmSampler::sample(int n_rounds, TrialRng& rng) const {
  if (n_rounds < 1) throw ConfigError("sampler: need at least one round");
  OnticZSample s;
  s.draws.reserve(static_cast<std::size_t>(n_rounds));
  double sum = 0.0;
  for (int i = 0; i < n_rounds; ++i) {
    int idx = rng.discrete(cumulative_);
    s.draws.push_back(idx);
    sum += eigenvalues_[idx];
  }
  s.shift = sum / n_rounds;
  return s;
}

OnticZSample sample_zpm_run(const QuantumState& psi, const Observable& a,
                            int n_rounds, TrialRng& rng) {
  return ZpmSampler(psi, a).sample(n_rounds, rng);
}

OnticASample sample_apm_run(cxd alpha, double duration, double exp_a, double var_x0,
                            TrialRng& rng) {
  if (var_x0 < 0.0) throw ConfigError("apm sample: negative pointer variance");
  double q_mean = std::numbers::sqrt2 * alpha.real();
  double p_mean = std::numbers::sqrt2 * alpha.imag();
  double quad_sigma = 1.0 / std::numbers::sqrt2;
  OnticASample s;
  s.x0 = rng.normal() * std::sqrt(var_x0);
  s.q0 = q_mean + rng.normal() * quad_sigma;
  s.p0 = p_mean + rng.normal() * quad_sigma;
  s.x_f = s.x0 + heisenberg_pointer_mean(duration, duration, exp_a, s.q0, s.p0);
  return s;
}

ModelStats zpm_model_stats(const QuantumState& psi, const Observable& a, int n_rounds,
                           double var_x0, std::int64_t n_trials, std::uint64_t seed,
                           int n_threads, double bias) {
  if (n_rounds < 1) throw ConfigError("model stats: need at least one round");
  if (var_x0 < 0.0) throw ConfigError("model stats: negative pointer variance");
  ZpmSampler sampler(psi, a, bias);
  double x0_sigma = std::sqrt(var_x0);
  auto per_trial = [&](std::int64_t t, TrialChunk& chunk) {
    TrialRng rng(seed, kStreamZpm, static_cast<std::uint64_t>(t));
    double x0 = rng.normal() * x0_sigma;
    chunk.xf.add(x0 + sampler.sample(n_rounds, rng).shift);
  };
  MomentAccumulator acc = merge_moments(run_trials(n_trials, n_threads, per_trial));
  return ModelStats{sampler.mean(),
                    var_x0 + sampler.variance() / n_rounds,
                    acc.mean(),
                    acc.mean_se(),
                    acc.variance(),
                    acc.variance_se(),
                    n_trials};
}

ModelStats apm_model_stats(cxd alpha, double duration, double exp_a, double var_x0,
                           std::int64_t n_trials, std::uint64_t seed, int n_threads) {
  if (!(duration > 0.0)) throw ConfigError("model stats: duration must be positive");
  if (var_x0 < 0.0) throw ConfigError("model stats: negative pointer variance");
  auto per_trial = [&](std::int64_t t, TrialChunk& chunk) {
    TrialRng rng(seed, kStreamApm, static_cast<std::uint64_t>(t));
    chunk.xf.add(sample_apm_run(alpha, duration, exp_a, var_x0, rng).x_f);
  };
  MomentAccumulator acc = merge_moments(run_trials(n_trials, n_threads, per_trial));
  double s = std::sin(duration);
  double c = 1.0 - std::cos(duration);
  double mean = exp_a + (std::numbers::sqrt2 * alpha.real() * s +
                         std::numbers::sqrt2 * alpha.imag() * c) /
                            duration;
  double variance = var_x0 + (s * s + c * c) / (2.0 * duration * duration);
  return ModelStats{mean,          variance,       acc.mean(), acc.mean_se(),
                    acc.variance(), acc.variance_se(), n_trials};
}

ConsistencyReport consistency_check(const ZpmConfig& config, std::int64_t n_trials,
                                    std::uint64_t seed, int n_threads, double bias) {
  ZpmOutcome quantum = run_zpm(config);
  Histogram quantum_hist = marginal_histogram(quantum.branch_state);
  double ideal = expectation(config.system_state, config.measured);
  PacketMoments pointer = position_moments(config.pointer);
  ZpmSampler sampler(config.system_state, config.measured, bias);
  double x0_sigma = std::sqrt(pointer.variance);
  auto per_trial = [&](std::int64_t t, TrialChunk& chunk) {
    TrialRng rng(seed, kStreamZpm, static_cast<std::uint64_t>(t));
    double x0 = pointer.mean + rng.normal() * x0_sigma;
    OnticZSample s = sampler.sample(config.n_rounds, rng);
    double xf = x0 + s.shift;
    chunk.xf.add(xf);
    chunk.xf_bins[bin_of(xf, kConsistencyBinWidth)] += 1;
    chunk.shift_bins[bin_of(s.shift, kConsistencyBinWidth)] += 1;
  };
  ModelEnsemble e = collect_ensemble(n_trials, n_threads, per_trial);
  return assemble_report(e, quantum_hist, ideal, quantum.pointer_mean,
                         quantum.pointer_variance, n_trials);
}

ConsistencyReport consistency_check(const ApmConfig& config, std::int64_t n_trials,
                                    std::uint64_t seed, int n_threads) {
  ApmOutcome quantum = run_apm(config, apm_default_steps(config.duration));
  Histogram quantum_hist = marginal_histogram(quantum.final_state);
  PacketMoments final_moments = position_moments(quantum.final_state);
  double exp_a = expectation(config.system.ground, config.measured);
  PacketMoments pointer = position_moments(config.pointer);
  cxd alpha = config.system.alpha;
  auto per_trial = [&](std::int64_t t, TrialChunk& chunk) {
    TrialRng rng(seed, kStreamApm, static_cast<std::uint64_t>(t));
    OnticASample s = sample_apm_run(alpha, config.duration, exp_a, pointer.variance,
                                    rng);
    double xf = pointer.mean + s.x_f;
    chunk.xf.add(xf);
    chunk.xf_bins[bin_of(xf, kConsistencyBinWidth)] += 1;
    chunk.shift_bins[bin_of(s.x_f - s.x0, kConsistencyBinWidth)] += 1;
  };
  ModelEnsemble e = collect_ensemble(n_trials, n_threads, per_trial);
  return assemble_report(e, quantum_hist, exp_a, final_moments.mean,
                         final_moments.variance, n_trials);
}

}  // namespace pmsim
