#include "trimer/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trimer/error.hpp"

namespace trimer {

namespace {

constexpr cplx kI{0.0, 1.0};

double max_abs(const Wells& w) {
  double m = 0.0;
  for (const auto& z : w) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

void SystemParams::validate() const {
  const bool finite = std::isfinite(chi) && std::isfinite(j_tunnel) && std::isfinite(gamma) &&
                      std::isfinite(epsilon.real()) && std::isfinite(epsilon.imag());
  if (!finite) throw ConfigError("system parameters must be finite");
  if (!(j_tunnel > 0.0)) throw ConfigError("j_tunnel must be > 0");
  if (chi < 0.0) throw ConfigError("chi must be >= 0");
  if (gamma < 0.0) throw ConfigError("gamma must be >= 0");
}

TrajectoryState TrajectoryState::from_vec6(const Vec6& v, double t) {
  TrajectoryState s;
  for (int j = 0; j < kWells; ++j) {
    s.alpha[j] = v[2 * j];
    s.alpha_plus[j] = v[2 * j + 1];
  }
  s.t = t;
  return s;
}

Vec6 TrajectoryState::to_vec6() const {
  Vec6 v;
  for (int j = 0; j < kWells; ++j) {
    v[2 * j] = alpha[j];
    v[2 * j + 1] = alpha_plus[j];
  }
  return v;
}

bool TrajectoryState::is_finite() const {
  for (int j = 0; j < kWells; ++j) {
    for (const cplx& z : {alpha[j], alpha_plus[j]}) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
  }
  return true;
}

Vec6 drift(const TrajectoryState& s, const SystemParams& p) {
  const auto& a = s.alpha;
  const auto& ap = s.alpha_plus;
  const double g = p.gamma;
  const double jt = p.j_tunnel;
  const double chi = p.chi;
  Vec6 d;
  d[0] = -(g + 2.0 * kI * chi * ap[0] * a[0]) * a[0] + kI * jt * a[1];
  d[1] = -(g - 2.0 * kI * chi * ap[0] * a[0]) * ap[0] - kI * jt * ap[1];
  d[2] = p.epsilon - 2.0 * kI * chi * ap[1] * a[1] * a[1] + kI * jt * (a[0] + a[2]);
  d[3] = std::conj(p.epsilon) + 2.0 * kI * chi * ap[1] * ap[1] * a[1] - kI * jt * (ap[0] + ap[2]);
  d[4] = -(g + 2.0 * kI * chi * ap[2] * a[2]) * a[2] + kI * jt * a[1];
  d[5] = -(g - 2.0 * kI * chi * ap[2] * a[2]) * ap[2] - kI * jt * ap[1];
  return d;
}

Vec6 noise_amplitudes(const TrajectoryState& s, const SystemParams& p) {
  Vec6 b;
  for (int j = 0; j < kWells; ++j) {
    b[2 * j] = std::sqrt(-2.0 * kI * p.chi * s.alpha[j] * s.alpha[j]);
    b[2 * j + 1] = std::sqrt(2.0 * kI * p.chi * s.alpha_plus[j] * s.alpha_plus[j]);
  }
  return b;
}

Wells mean_field_drift(const Wells& a, const SystemParams& p) {
  const Vec6 d = drift(conjugate_state(a), p);
  return {d[0], d[2], d[4]};
}

TrajectoryState conjugate_state(const Wells& alpha, double t) {
  TrajectoryState s;
  for (int j = 0; j < kWells; ++j) {
    s.alpha[j] = alpha[j];
    s.alpha_plus[j] = std::conj(alpha[j]);
  }
  s.t = t;
  return s;
}

Wells semiclassical_steady_state(const SystemParams& p, const SteadyStateOptions& opts) {
  p.validate();
  if (p.chi == 0.0) {
    const double jt = p.j_tunnel;
    const cplx end = kI * p.epsilon / (2.0 * jt);
    return {end, p.gamma * p.epsilon / (2.0 * jt * jt), end};
  }

  Wells a{};
  const double h = opts.dt;
  const auto steps = static_cast<long>(std::ceil(opts.time_budget / h));
  auto axpy = [](const Wells& x, double s, const Wells& y) {
    Wells r;
    for (int j = 0; j < kWells; ++j) r[j] = x[j] + s * y[j];
    return r;
  };
  double residual = max_abs(mean_field_drift(a, p));
  for (long n = 0; n < steps; ++n) {
    if (residual < opts.tolerance) return a;
    const Wells k1 = mean_field_drift(a, p);
    const Wells k2 = mean_field_drift(axpy(a, h / 2, k1), p);
    const Wells k3 = mean_field_drift(axpy(a, h / 2, k2), p);
    const Wells k4 = mean_field_drift(axpy(a, h, k3), p);
    for (int j = 0; j < kWells; ++j) a[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    residual = max_abs(mean_field_drift(a, p));
    if (!std::isfinite(residual)) break;
  }
  if (residual < opts.tolerance) return a;
  std::ostringstream msg;
  msg << "mean-field relaxation did not converge within Jt=" << opts.time_budget
      << " (drift norm " << residual << ", chi=" << p.chi << ", epsilon=" << p.epsilon << ")";
  throw NonConvergence(msg.str());
}

}  // namespace trimer
