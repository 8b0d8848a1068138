#pragma once

#include <array>
#include <complex>

namespace trimer {

using cplx = std::complex<double>;

// Six phase-space variables in the fixed order
// (alpha1, alpha1+, alpha2, alpha2+, alpha3, alpha3+).
using Vec6 = std::array<cplx, 6>;
using Wells = std::array<cplx, 3>;

inline constexpr int kWells = 3;

// Physical constants of the pumped, damped inline trimer. Everything is
// dimensionless in units where the tunnelling rate is one; chi, gamma and the
// pump are then quoted in units of J.
struct SystemParams {
  double chi = 0.0;        // on-site collisional nonlinearity
  double j_tunnel = 1.0;   // nearest-neighbour tunnelling, sets the time scale
  double gamma = 1.0;      // loss rate at the two end wells
  cplx epsilon{0.0, 0.0};  // coherent pump into the middle well

  // Throws ConfigError unless j_tunnel > 0, chi >= 0, gamma >= 0 and every
  // field is finite.
  void validate() const;
};

// One positive-P trajectory. alpha_plus is an independent variable, not the
// conjugate of alpha.
struct TrajectoryState {
  Wells alpha{};
  Wells alpha_plus{};
  double t = 0.0;

  static TrajectoryState vacuum() { return {}; }
  static TrajectoryState from_vec6(const Vec6& v, double t = 0.0);
  Vec6 to_vec6() const;
  bool is_finite() const;
};

// Deterministic part of the Ito equations for all six variables.
Vec6 drift(const TrajectoryState& state, const SystemParams& params);

// Complex noise amplitudes b_k: variable k receives b_k * eta_k * sqrt(dt)
// with independent real standard normals eta_k. Principal square-root branch;
// the positive-P distribution does not depend on the sign of b_k.
Vec6 noise_amplitudes(const TrajectoryState& state, const SystemParams& params);

struct SteadyStateOptions {
  double tolerance = 1e-10;  // on the max-norm of the drift
  double time_budget = 200.0;
  double dt = 1e-2;          // RK4 relaxation step
};

// Mean-field fixed point (alpha1, alpha2, alpha3). Closed form for chi == 0;
// otherwise found by relaxing the noiseless equations with alpha+ = conj(alpha)
// from the vacuum. Throws NonConvergence if the drift does not fall below the
// tolerance inside the time budget.
Wells semiclassical_steady_state(const SystemParams& params,
                                 const SteadyStateOptions& opts = {});

// Noiseless mean-field drift restricted to the conjugate manifold.
Wells mean_field_drift(const Wells& alpha, const SystemParams& params);

// Lift mean-field amplitudes to a conjugate-symmetric phase-space point.
TrajectoryState conjugate_state(const Wells& alpha, double t = 0.0);

}  // namespace trimer
