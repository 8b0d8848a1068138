#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "trimer/accumulator.hpp"
#include "trimer/model.hpp"

namespace trimer {

struct IntegrationConfig {
  double dt = 1e-3;             // fixed Ito step in units of 1/J
  double t_final = 25.0;
  std::int64_t n_traj = 1000;
  std::uint64_t master_seed = 1;
  int sample_stride = 100;      // record moments every stride steps
  double divergence_threshold = 1e6;
  int n_batches = 100;          // trajectory batches for error bars
  TrajectoryState initial = TrajectoryState::vacuum();

  void validate() const;  // throws ConfigError

  std::int64_t n_steps() const;
  int n_samples() const;  // samples at steps stride, 2*stride, ...
  double sample_time(int s) const;
  int effective_batches() const;
  // Batch b holds trajectories [batch_begin(b), batch_begin(b + 1)).
  std::int64_t batch_begin(int b) const;
};

struct TrajectoryOutcome {
  bool diverged = false;
  std::optional<double> divergence_time;
  TrajectoryState final_state;  // last finite state
};

using SampleSink = std::function<void(int sample_index, const TrajectoryState&)>;

// Serial reference: explicit Euler-Maruyama for one trajectory. The noise of
// step n is keyed by (master_seed, traj_index, n) alone. The sink sees the
// state every sample_stride steps until the trajectory diverges.
TrajectoryOutcome integrate_trajectory(const SystemParams& params, const IntegrationConfig& cfg,
                                       std::int64_t traj_index, const SampleSink& sink);

struct EnsembleRunReport {
  std::int64_t n_traj = 0;
  std::int64_t n_completed = 0;
  std::int64_t n_diverged = 0;
  std::optional<double> first_divergence_time;
  std::vector<double> sample_times;
  std::vector<MomentAccumulator> samples;  // one per sample time, alive trajectories only

  std::int64_t alive_at(int s) const { return samples.at(s).count(); }
  // Indices of samples with t in [t_start, t_end].
  std::vector<int> window(double t_start, double t_end) const;
};

// Parallel ensemble: batches are distributed over OpenMP threads and each
// batch is stepped in SIMD lane blocks. threads <= 0 means the OpenMP default.
// The report is bit-identical for any thread count. Throws AllDiverged when
// no trajectory survives to the first sample.
EnsembleRunReport run_ensemble(const SystemParams& params, const IntegrationConfig& cfg,
                               int threads = 0);

// Single-threaded reference built on integrate_trajectory. Produces the same
// report as run_ensemble, bit for bit.
EnsembleRunReport run_ensemble_reference(const SystemParams& params, const IntegrationConfig& cfg);

}  // namespace trimer
