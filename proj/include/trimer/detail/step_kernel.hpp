#pragma once

#include <cstdint>

#include "trimer/model.hpp"
#include "trimer/normal.hpp"

// One explicit Euler-Maruyama step of the positive-P equations written in
// real arithmetic on twelve doubles. Both the serial reference integrator and
// the SIMD lane kernel call this, so their trajectories agree bit for bit.
namespace trimer::detail {

struct StepConstants {
  double chi2;      // 2 chi
  double sqrt_chi;
  double jt;
  double gamma;
  double eps_re;
  double eps_im;
  double dt;
  double sqrt_dt;
  double threshold2;  // squared divergence threshold
  std::uint32_t key0;
  std::uint32_t key1;
};

StepConstants make_step_constants(const SystemParams& p, double dt, double threshold,
                                  std::uint64_t seed);

// Principal square root of (sqrt_chi * rot) * z where rot is (1 - i) for the
// alpha rows and (1 + i) for the alpha+ rows: the candidate root is linear in
// z and the principal branch is the one with non-negative real part.
[[gnu::always_inline]] inline void principal_branch(double& re, double& im) {
  const bool flip = (re < 0.0) | ((re == 0.0) & (im < 0.0));
  re = flip ? -re : re;
  im = flip ? -im : im;
}

// Advances x = (ar0, ai0, pr0, pi0, ar1, ..., pi2) by one step. Returns false
// when the new state is non-finite or any |variable|^2 exceeds threshold2.
[[gnu::always_inline]] inline bool euler_maruyama_step(const StepConstants& k, std::uint64_t traj, std::uint64_t step,
                                double& ar0, double& ai0, double& pr0, double& pi0,
                                double& ar1, double& ai1, double& pr1, double& pi1,
                                double& ar2, double& ai2, double& pr2, double& pi2) {
  double g[6];
  rng::step_normals(k.key0, k.key1, traj, step, g);

  // products n_j = alpha_j^+ alpha_j
  const double n0r = pr0 * ar0 - pi0 * ai0, n0i = pr0 * ai0 + pi0 * ar0;
  const double n1r = pr1 * ar1 - pi1 * ai1, n1i = pr1 * ai1 + pi1 * ar1;
  const double n2r = pr2 * ar2 - pi2 * ai2, n2i = pr2 * ai2 + pi2 * ar2;

  const double c = k.chi2;
  const double jt = k.jt;

  // end wells: -(gamma +/- i c n) x +/- i J x_middle
  const double ca0r = k.gamma - c * n0i, ca0i = c * n0r;
  const double cp0r = k.gamma + c * n0i, cp0i = -c * n0r;
  const double ca2r = k.gamma - c * n2i, ca2i = c * n2r;
  const double cp2r = k.gamma + c * n2i, cp2i = -c * n2r;

  const double da0r = -(ca0r * ar0 - ca0i * ai0) - jt * ai1;
  const double da0i = -(ca0r * ai0 + ca0i * ar0) + jt * ar1;
  const double dp0r = -(cp0r * pr0 - cp0i * pi0) + jt * pi1;
  const double dp0i = -(cp0r * pi0 + cp0i * pr0) - jt * pr1;
  const double da2r = -(ca2r * ar2 - ca2i * ai2) - jt * ai1;
  const double da2i = -(ca2r * ai2 + ca2i * ar2) + jt * ar1;
  const double dp2r = -(cp2r * pr2 - cp2i * pi2) + jt * pi1;
  const double dp2i = -(cp2r * pi2 + cp2i * pr2) - jt * pr1;

  // middle well: eps -/+ i c n x -/+ i J (x_1 + x_3)
  const double da1r = k.eps_re + c * (n1r * ai1 + n1i * ar1) - jt * (ai0 + ai2);
  const double da1i = k.eps_im - c * (n1r * ar1 - n1i * ai1) + jt * (ar0 + ar2);
  const double dp1r = k.eps_re - c * (n1r * pi1 + n1i * pr1) + jt * (pi0 + pi2);
  const double dp1i = -k.eps_im + c * (n1r * pr1 - n1i * pi1) - jt * (pr0 + pr2);

  // noise amplitudes: sqrt(-2i chi a^2) = +/- sqrt(chi)(1 - i) a,
  //                   sqrt(+2i chi p^2) = +/- sqrt(chi)(1 + i) p
  const double s = k.sqrt_chi;
  double ba0r = s * (ar0 + ai0), ba0i = s * (ai0 - ar0);
  double bp0r = s * (pr0 - pi0), bp0i = s * (pr0 + pi0);
  double ba1r = s * (ar1 + ai1), ba1i = s * (ai1 - ar1);
  double bp1r = s * (pr1 - pi1), bp1i = s * (pr1 + pi1);
  double ba2r = s * (ar2 + ai2), ba2i = s * (ai2 - ar2);
  double bp2r = s * (pr2 - pi2), bp2i = s * (pr2 + pi2);
  principal_branch(ba0r, ba0i);
  principal_branch(bp0r, bp0i);
  principal_branch(ba1r, ba1i);
  principal_branch(bp1r, bp1i);
  principal_branch(ba2r, ba2i);
  principal_branch(bp2r, bp2i);

  const double dt = k.dt;
  const double w0 = g[0] * k.sqrt_dt, w1 = g[1] * k.sqrt_dt, w2 = g[2] * k.sqrt_dt;
  const double w3 = g[3] * k.sqrt_dt, w4 = g[4] * k.sqrt_dt, w5 = g[5] * k.sqrt_dt;

  ar0 = ar0 + (da0r * dt + ba0r * w0);
  ai0 = ai0 + (da0i * dt + ba0i * w0);
  pr0 = pr0 + (dp0r * dt + bp0r * w1);
  pi0 = pi0 + (dp0i * dt + bp0i * w1);
  ar1 = ar1 + (da1r * dt + ba1r * w2);
  ai1 = ai1 + (da1i * dt + ba1i * w2);
  pr1 = pr1 + (dp1r * dt + bp1r * w3);
  pi1 = pi1 + (dp1i * dt + bp1i * w3);
  ar2 = ar2 + (da2r * dt + ba2r * w4);
  ai2 = ai2 + (da2i * dt + ba2i * w4);
  pr2 = pr2 + (dp2r * dt + bp2r * w5);
  pi2 = pi2 + (dp2i * dt + bp2i * w5);

  const double m0 = ar0 * ar0 + ai0 * ai0, m1 = pr0 * pr0 + pi0 * pi0;
  const double m2 = ar1 * ar1 + ai1 * ai1, m3 = pr1 * pr1 + pi1 * pi1;
  const double m4 = ar2 * ar2 + ai2 * ai2, m5 = pr2 * pr2 + pi2 * pi2;
  // written so that NaN fails every comparison
  return (m0 <= k.threshold2) & (m1 <= k.threshold2) & (m2 <= k.threshold2) &
         (m3 <= k.threshold2) & (m4 <= k.threshold2) & (m5 <= k.threshold2);
}

}  // namespace trimer::detail
