#include "trimer/integrator.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "trimer/detail/step_kernel.hpp"
#include "trimer/error.hpp"

namespace trimer {

namespace detail {

StepConstants make_step_constants(const SystemParams& p, double dt, double threshold,
                                  std::uint64_t seed) {
  const auto key = rng::key_from_seed(seed);
  return StepConstants{2.0 * p.chi,      std::sqrt(p.chi), p.j_tunnel,         p.gamma,
                       p.epsilon.real(), p.epsilon.imag(), dt,                 std::sqrt(dt),
                       threshold * threshold, key[0],       key[1]};
}

}  // namespace detail

void IntegrationConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be > 0");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (sample_stride < 1) throw ConfigError("sample_stride must be >= 1");
  if (n_batches < 1) throw ConfigError("n_batches must be >= 1");
  if (!(divergence_threshold > 0.0)) throw ConfigError("divergence_threshold must be > 0");
  if (!initial.is_finite()) throw ConfigError("initial state must be finite");
  if (n_samples() < 1) throw ConfigError("t_final shorter than one sample stride");
}

std::int64_t IntegrationConfig::n_steps() const { return std::llround(t_final / dt); }

int IntegrationConfig::n_samples() const {
  return static_cast<int>(n_steps() / sample_stride);
}

double IntegrationConfig::sample_time(int s) const {
  return static_cast<double>(static_cast<std::int64_t>(s + 1) * sample_stride) * dt;
}

int IntegrationConfig::effective_batches() const {
  return static_cast<int>(std::min<std::int64_t>(n_batches, n_traj));
}

std::int64_t IntegrationConfig::batch_begin(int b) const {
  const std::int64_t nb = effective_batches();
  return static_cast<std::int64_t>((static_cast<__int128>(b) * n_traj) / nb);
}

std::vector<int> EnsembleRunReport::window(double t_start, double t_end) const {
  std::vector<int> idx;
  constexpr double slack = 1e-9;
  for (int s = 0; s < static_cast<int>(sample_times.size()); ++s) {
    if (sample_times[s] >= t_start - slack && sample_times[s] <= t_end + slack) idx.push_back(s);
  }
  return idx;
}

TrajectoryOutcome integrate_trajectory(const SystemParams& params, const IntegrationConfig& cfg,
                                       std::int64_t traj_index, const SampleSink& sink) {
  const auto k = detail::make_step_constants(params, cfg.dt, cfg.divergence_threshold, cfg.master_seed);
  const std::int64_t n_steps = cfg.n_steps();
  const int stride = cfg.sample_stride;

  Vec6 v = cfg.initial.to_vec6();
  double x[12];
  for (int i = 0; i < 6; ++i) {
    x[2 * i] = v[i].real();
    x[2 * i + 1] = v[i].imag();
  }
  auto to_state = [&](const double* y, double t) {
    Vec6 w;
    for (int i = 0; i < 6; ++i) w[i] = cplx(y[2 * i], y[2 * i + 1]);
    return TrajectoryState::from_vec6(w, t);
  };

  TrajectoryOutcome out;
  double last[12];
  for (std::int64_t n = 1; n <= n_steps; ++n) {
    std::copy(x, x + 12, last);
    const bool ok = detail::euler_maruyama_step(k, static_cast<std::uint64_t>(traj_index),
                                                static_cast<std::uint64_t>(n), x[0], x[1], x[2], x[3],
                                                x[4], x[5], x[6], x[7], x[8], x[9], x[10], x[11]);
    if (!ok) {
      out.diverged = true;
      out.divergence_time = static_cast<double>(n) * cfg.dt;
      out.final_state = to_state(last, static_cast<double>(n - 1) * cfg.dt);
      return out;
    }
    if (n % stride == 0) {
      const int s = static_cast<int>(n / stride) - 1;
      if (s < cfg.n_samples() && sink) sink(s, to_state(x, static_cast<double>(n) * cfg.dt));
    }
  }
  out.final_state = to_state(x, static_cast<double>(n_steps) * cfg.dt);
  return out;
}

namespace {

struct BatchResult {
  std::vector<MonomialSums> samples;
  std::int64_t diverged = 0;
  double first_divergence = std::numeric_limits<double>::infinity();
};

void finish_report(EnsembleRunReport& rep, const IntegrationConfig& cfg,
                   std::vector<BatchResult>& batches) {
  const int n_samples = cfg.n_samples();
  rep.n_traj = cfg.n_traj;
  rep.sample_times.resize(n_samples);
  rep.samples.assign(n_samples, MomentAccumulator{});
  for (int s = 0; s < n_samples; ++s) rep.sample_times[s] = cfg.sample_time(s);
  double first = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < batches.size(); ++b) {
    rep.n_diverged += batches[b].diverged;
    first = std::min(first, batches[b].first_divergence);
    for (int s = 0; s < n_samples; ++s) {
      if (batches[b].samples[s].count > 0)
        rep.samples[s].add_sums(static_cast<std::uint32_t>(b), batches[b].samples[s]);
    }
  }
  rep.n_completed = rep.n_traj - rep.n_diverged;
  if (std::isfinite(first)) rep.first_divergence_time = first;
  if (rep.samples.front().count() == 0) {
    std::ostringstream msg;
    msg << "all " << rep.n_traj << " trajectories diverged before the first sample at Jt="
        << rep.sample_times.front();
    throw AllDiverged(msg.str());
  }
}

// Lanes stepped together; the SoA block of 12 x kLanes doubles stays in L1.
constexpr int kLanes = 64;

void run_batch_simd(const detail::StepConstants& k, const IntegrationConfig& cfg, std::int64_t begin,
                    std::int64_t end, BatchResult& res) {
  const std::int64_t n_steps = cfg.n_steps();
  const int stride = cfg.sample_stride;
  const int n_samples = cfg.n_samples();
  const Vec6 init = cfg.initial.to_vec6();

  alignas(64) double x[12][kLanes];
  alignas(64) std::int64_t alive[kLanes];
  alignas(64) std::int64_t died_at[kLanes];

  for (std::int64_t chunk = begin; chunk < end; chunk += kLanes) {
    const int width = static_cast<int>(std::min<std::int64_t>(kLanes, end - chunk));
    for (int l = 0; l < kLanes; ++l) {
      for (int i = 0; i < 6; ++i) {
        x[2 * i][l] = l < width ? init[i].real() : 0.0;
        x[2 * i + 1][l] = l < width ? init[i].imag() : 0.0;
      }
      alive[l] = l < width ? 1 : 0;
      died_at[l] = 0;
    }
    int n_alive = width;

    for (std::int64_t n = 1; n <= n_steps && n_alive > 0; ++n) {
      const auto step = static_cast<std::uint64_t>(n);
#pragma omp simd
      for (int l = 0; l < kLanes; ++l) {
        double y0 = x[0][l], y1 = x[1][l], y2 = x[2][l], y3 = x[3][l];
        double y4 = x[4][l], y5 = x[5][l], y6 = x[6][l], y7 = x[7][l];
        double y8 = x[8][l], y9 = x[9][l], y10 = x[10][l], y11 = x[11][l];
        const bool ok = detail::euler_maruyama_step(k, static_cast<std::uint64_t>(chunk + l), step, y0, y1,
                                                    y2, y3, y4, y5, y6, y7, y8, y9, y10, y11);
        const std::int64_t was = alive[l];
        const std::int64_t now = was & static_cast<std::int64_t>(ok);
        died_at[l] = (was & (1 - now)) != 0 ? static_cast<std::int64_t>(n) : died_at[l];
        alive[l] = now;
        // dead lanes are parked at the origin
        x[0][l] = now ? y0 : 0.0;
        x[1][l] = now ? y1 : 0.0;
        x[2][l] = now ? y2 : 0.0;
        x[3][l] = now ? y3 : 0.0;
        x[4][l] = now ? y4 : 0.0;
        x[5][l] = now ? y5 : 0.0;
        x[6][l] = now ? y6 : 0.0;
        x[7][l] = now ? y7 : 0.0;
        x[8][l] = now ? y8 : 0.0;
        x[9][l] = now ? y9 : 0.0;
        x[10][l] = now ? y10 : 0.0;
        x[11][l] = now ? y11 : 0.0;
      }
      if (n % stride == 0) {
        const int s = static_cast<int>(n / stride) - 1;
        n_alive = 0;
        for (int l = 0; l < width; ++l) {
          if (!alive[l]) continue;
          ++n_alive;
          if (s >= n_samples) continue;
          Vec6 w;
          for (int i = 0; i < 6; ++i) w[i] = cplx(x[2 * i][l], x[2 * i + 1][l]);
          res.samples[s].add(TrajectoryState::from_vec6(w, static_cast<double>(n) * cfg.dt));
        }
      }
    }
    for (int l = 0; l < width; ++l) {
      if (!alive[l]) {
        ++res.diverged;
        res.first_divergence = std::min(res.first_divergence, static_cast<double>(died_at[l]) * cfg.dt);
      }
    }
  }
}

}  // namespace

EnsembleRunReport run_ensemble(const SystemParams& params, const IntegrationConfig& cfg, int threads) {
  params.validate();
  cfg.validate();
  const auto k = detail::make_step_constants(params, cfg.dt, cfg.divergence_threshold, cfg.master_seed);
  const int nb = cfg.effective_batches();
  std::vector<BatchResult> batches(nb);
  for (auto& b : batches) b.samples.assign(cfg.n_samples(), MonomialSums{});

  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
  for (int b = 0; b < nb; ++b) {
    run_batch_simd(k, cfg, cfg.batch_begin(b), cfg.batch_begin(b + 1), batches[b]);
  }

  EnsembleRunReport rep;
  finish_report(rep, cfg, batches);
  return rep;
}

EnsembleRunReport run_ensemble_reference(const SystemParams& params, const IntegrationConfig& cfg) {
  params.validate();
  cfg.validate();
  const int nb = cfg.effective_batches();
  std::vector<BatchResult> batches(nb);
  for (auto& b : batches) b.samples.assign(cfg.n_samples(), MonomialSums{});

  for (int b = 0; b < nb; ++b) {
    BatchResult& res = batches[b];
    for (std::int64_t t = cfg.batch_begin(b); t < cfg.batch_begin(b + 1); ++t) {
      const auto outcome = integrate_trajectory(
          params, cfg, t, [&res](int s, const TrajectoryState& st) { res.samples[s].add(st); });
      if (outcome.diverged) {
        ++res.diverged;
        res.first_divergence = std::min(res.first_divergence, *outcome.divergence_time);
      }
    }
  }
  EnsembleRunReport rep;
  finish_report(rep, cfg, batches);
  return rep;
}

}  // namespace trimer
