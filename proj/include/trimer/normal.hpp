#pragma once

#include <bit>
#include <cstdint>

#include "trimer/philox.hpp"

// Standard normal draws from Philox words through a fixed Box-Muller
// transform. log and sin/cos are evaluated with local polynomial kernels
// built only from +, -, *, / and sqrt so that a vectorised loop and a scalar
// call produce bit-identical doubles (libm and libmvec do not).
namespace trimer::rng {

namespace detail {

inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kHalfPi = 1.57079632679489661923;
inline constexpr double kTwoPow32Inv = 1.0 / 4294967296.0;
inline constexpr double kTwoPow30Inv = 1.0 / 1073741824.0;

}  // namespace detail

// Natural log of a positive, normal, finite double. Relative error ~1e-16.
[[gnu::always_inline]] inline double log_positive(double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  auto e = static_cast<std::int64_t>((bits >> 52) & 0x7ffu) - 1023;
  double m = std::bit_cast<double>((bits & 0x000fffffffffffffull) | 0x3ff0000000000000ull);
  const bool big = m > detail::kSqrt2;
  m = m * (big ? 0.5 : 1.0);
  e = big ? e + 1 : e;
  // log m = 2 atanh(s), |s| <= 0.1716 on [sqrt(1/2), sqrt(2)].
  const double s = (m - 1.0) / (m + 1.0);
  const double z = s * s;
  double poly = 1.0 / 25.0;
  poly = poly * z + 1.0 / 23.0;
  poly = poly * z + 1.0 / 21.0;
  poly = poly * z + 1.0 / 19.0;
  poly = poly * z + 1.0 / 17.0;
  poly = poly * z + 1.0 / 15.0;
  poly = poly * z + 1.0 / 13.0;
  poly = poly * z + 1.0 / 11.0;
  poly = poly * z + 1.0 / 9.0;
  poly = poly * z + 1.0 / 7.0;
  poly = poly * z + 1.0 / 5.0;
  poly = poly * z + 1.0 / 3.0;
  poly = poly * z + 1.0;
  return static_cast<double>(e) * detail::kLn2 + 2.0 * s * poly;
}

// sin and cos of x in [0, pi/2], Taylor to x^22; absolute error < 1e-16.
[[gnu::always_inline]] inline void sincos_quadrant(double x, double& s, double& c) {
  const double z = x * x;
  double ps = -1.0 / 51090942171709440000.0;  // -1/21!
  ps = ps * z + 1.0 / 121645100408832000.0;   //  1/19!
  ps = ps * z - 1.0 / 355687428096000.0;      // -1/17!
  ps = ps * z + 1.0 / 1307674368000.0;        //  1/15!
  ps = ps * z - 1.0 / 6227020800.0;           // -1/13!
  ps = ps * z + 1.0 / 39916800.0;             //  1/11!
  ps = ps * z - 1.0 / 362880.0;               // -1/9!
  ps = ps * z + 1.0 / 5040.0;                 //  1/7!
  ps = ps * z - 1.0 / 120.0;                  // -1/5!
  ps = ps * z + 1.0 / 6.0;                    //  1/3!
  s = x - x * z * ps;

  double pc = 1.0 / 1124000727777607680000.0;  //  1/22!
  pc = pc * z - 1.0 / 2432902008176640000.0;   // -1/20!
  pc = pc * z + 1.0 / 6402373705728000.0;      //  1/18!
  pc = pc * z - 1.0 / 20922789888000.0;        // -1/16!
  pc = pc * z + 1.0 / 87178291200.0;           //  1/14!
  pc = pc * z - 1.0 / 479001600.0;             // -1/12!
  pc = pc * z + 1.0 / 3628800.0;               //  1/10!
  pc = pc * z - 1.0 / 40320.0;                 // -1/8!
  pc = pc * z + 1.0 / 720.0;                   //  1/6!
  pc = pc * z - 1.0 / 24.0;                    // -1/4!
  pc = pc * z + 0.5;                           //  1/2!
  c = 1.0 - z * pc;
}

// Box-Muller on two 32-bit words. The radius word maps to u = (w + 1/2) 2^-32
// in (0, 1); the angle word's top two bits pick the quadrant and the low 30
// bits the offset inside it.
[[gnu::always_inline]] inline void box_muller(std::uint32_t w_radius, std::uint32_t w_angle, double& n0, double& n1) {
  const double u = (static_cast<double>(w_radius) + 0.5) * detail::kTwoPow32Inv;
  const double r = __builtin_sqrt(-2.0 * log_positive(u));
  const std::uint32_t quadrant = w_angle >> 30;
  const double f = (static_cast<double>(w_angle & 0x3fffffffu) + 0.5) * detail::kTwoPow30Inv;
  double s, c;
  sincos_quadrant(f * detail::kHalfPi, s, c);
  // rotate (cos, sin) by quadrant * pi/2: odd quadrants swap the pair,
  // quadrants 1 and 2 negate the cosine, quadrants 2 and 3 the sine
  const bool swap = (quadrant & 1u) != 0;
  const bool neg_c = (((quadrant + 1u) >> 1) & 1u) != 0;
  const bool neg_s = (quadrant >> 1) != 0;
  const double cs = swap ? s : c;
  const double ss = swap ? c : s;
  const double cq = neg_c ? -cs : cs;
  const double sq = neg_s ? -ss : ss;
  n0 = r * cq;
  n1 = r * sq;
}

// Six independent standard normals for one Euler-Maruyama step of one
// trajectory. Counter layout: (step low word, block | step high word << 1,
// trajectory low word, trajectory high word); two blocks per step.
[[gnu::always_inline]] inline void step_normals(std::uint32_t key0, std::uint32_t key1, std::uint64_t traj, std::uint64_t step,
                         double out[6]) {
  const auto step_lo = static_cast<std::uint32_t>(step);
  const auto step_hi = static_cast<std::uint32_t>(step >> 32) << 1;
  const auto tr_lo = static_cast<std::uint32_t>(traj);
  const auto tr_hi = static_cast<std::uint32_t>(traj >> 32);

  std::uint32_t a0 = step_lo, a1 = step_hi, a2 = tr_lo, a3 = tr_hi;
  philox4x32_10(a0, a1, a2, a3, key0, key1);
  std::uint32_t b0 = step_lo, b1 = step_hi | 1u, b2 = tr_lo, b3 = tr_hi;
  philox4x32_10(b0, b1, b2, b3, key0, key1);

  box_muller(a0, a1, out[0], out[1]);
  box_muller(a2, a3, out[2], out[3]);
  box_muller(b0, b1, out[4], out[5]);
}

}  // namespace trimer::rng
