#include <cmath>

#include "doctest.h"
#include "trimer/error.hpp"
#include "trimer/integrator.hpp"

using namespace trimer;

namespace {

constexpr cplx I{0.0, 1.0};

SystemParams params(double chi, double eps) {
  SystemParams p;
  p.chi = chi;
  p.epsilon = eps;
  return p;
}

IntegrationConfig short_run(std::int64_t n_traj, double t_final = 2.0) {
  IntegrationConfig c;
  c.dt = 1e-3;
  c.t_final = t_final;
  c.n_traj = n_traj;
  c.master_seed = 99;
  c.sample_stride = 250;
  return c;
}

}  // namespace

TEST_CASE("coherent trajectory relaxes to the linear fixed point") {
  IntegrationConfig c = short_run(1, 30.0);
  TrajectoryState last;
  const auto out = integrate_trajectory(params(0.0, 10.0), c, 0, [&](int, const TrajectoryState& s) { last = s; });
  CHECK_FALSE(out.diverged);
  const Vec6 want{5.0 * I, -5.0 * I, 5.0, 5.0, 5.0 * I, -5.0 * I};
  const Vec6 got = last.to_vec6();
  for (int k = 0; k < 6; ++k) CHECK(std::abs(got[k] - want[k]) < 1e-4);
  CHECK(last.t == doctest::Approx(30.0));
}

TEST_CASE("vacuum without pump stays zero") {
  const auto rep = run_ensemble(params(0.0, 0.0), short_run(10));
  for (const auto& acc : rep.samples) {
    for (const cplx m : acc.means().v) CHECK(m == cplx(0.0));
  }
}

TEST_CASE("noiseless ensemble has zero spread") {
  const auto rep = run_ensemble(params(0.0, 10.0), short_run(8));
  const MomentMeans m = rep.samples.back().means();
  for (int j = 0; j < kWells; ++j) CHECK(std::abs(m.n(j) - m.p(j) * m.a(j)) < 1e-12 * std::abs(m.n(j)));
}

TEST_CASE("parallel ensemble is bit-identical to the serial reference") {
  const auto p = params(1e-2, 10.0);
  const auto c = short_run(150);
  const auto ref = run_ensemble_reference(p, c);
  for (int threads : {1, 2, 8}) {
    const auto rep = run_ensemble(p, c, threads);
    CHECK(rep.samples == ref.samples);
    CHECK(rep.n_diverged == ref.n_diverged);
    CHECK(rep.sample_times == ref.sample_times);
  }
}

TEST_CASE("a trajectory's contribution does not depend on the ensemble around it") {
  const auto p = params(1e-2, 10.0);
  const auto one = run_ensemble(p, short_run(1), 1);
  const auto two = run_ensemble(p, short_run(2), 2);
  REQUIRE(one.samples.size() == two.samples.size());
  for (std::size_t s = 0; s < one.samples.size(); ++s) {
    CHECK(one.samples[s].batches().at(0) == two.samples[s].batches().at(0));
  }
}

TEST_CASE("sample times follow the stride") {
  const auto rep = run_ensemble(params(0.0, 1.0), short_run(3));
  REQUIRE(rep.sample_times.size() == 8);
  CHECK(rep.sample_times.front() == doctest::Approx(0.25));
  CHECK(rep.sample_times.back() == doctest::Approx(2.0));
  CHECK(rep.window(0.5, 1.0) == std::vector<int>{1, 2, 3});
}

TEST_CASE("divergence is detected and counted") {
  IntegrationConfig c = short_run(20);
  c.sample_stride = 100;
  c.divergence_threshold = 3.0;  // the pumped middle well passes |alpha|^2 = 9 near Jt = 0.3
  const auto rep = run_ensemble(params(1e-2, 10.0), c);
  CHECK(rep.n_diverged == 20);
  CHECK(rep.n_completed == 0);
  REQUIRE(rep.first_divergence_time.has_value());
  CHECK(*rep.first_divergence_time > 0.1);
  CHECK(*rep.first_divergence_time < 0.5);
  CHECK(rep.alive_at(0) == 20);
  CHECK(rep.alive_at(static_cast<int>(rep.samples.size()) - 1) == 0);

  c.sample_stride = 1000;
  CHECK_THROWS_AS(run_ensemble(params(1e-2, 10.0), c), AllDiverged);
}

TEST_CASE("integration config validation") {
  IntegrationConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = IntegrationConfig{};
  c.t_final = 0.05;
  c.sample_stride = 100;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = IntegrationConfig{};
  c.n_traj = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("batches partition the trajectories") {
  IntegrationConfig c;
  c.n_traj = 1234;
  c.n_batches = 100;
  CHECK(c.effective_batches() == 100);
  CHECK(c.batch_begin(0) == 0);
  CHECK(c.batch_begin(100) == 1234);
  c.n_traj = 7;
  CHECK(c.effective_batches() == 7);
}

TEST_CASE("halving the step leaves steady populations unchanged within error") {
  const auto p = params(1e-3, 10.0);
  IntegrationConfig c = short_run(2000, 15.0);
  c.sample_stride = 500;
  auto steady_n = [&](const IntegrationConfig& cfg, int j) {
    const auto rep = run_ensemble(p, cfg);
    MomentAccumulator acc;
    for (int s : rep.window(10.0, 15.0)) acc.merge(rep.samples[s]);
    const MomentMeans m = acc.means();
    double var = 0.0;
    const auto loo = acc.leave_one_out_means();
    double mean = 0.0;
    for (const auto& [b, r] : loo) mean += r.n(j).real() / loo.size();
    for (const auto& [b, r] : loo) var += (r.n(j).real() - mean) * (r.n(j).real() - mean);
    return std::pair{m.n(j).real(), std::sqrt(var * (loo.size() - 1) / loo.size())};
  };
  IntegrationConfig half = c;
  half.dt = c.dt / 2;
  half.sample_stride = 2 * c.sample_stride;
  for (int j : {0, 1}) {
    const auto [n1, e1] = steady_n(c, j);
    const auto [n2, e2] = steady_n(half, j);
    CHECK(std::abs(n1 - n2) < 3.0 * std::hypot(e1, e2));
  }
}
