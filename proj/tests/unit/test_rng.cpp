#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "trimer/normal.hpp"
#include "trimer/philox.hpp"

using namespace trimer::rng;

// Known-answer vectors published with the Random123 library.
TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10(Counter{0, 0, 0, 0}, Key{0, 0}) ==
        Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10(Counter{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, Key{0xffffffffu, 0xffffffffu}) ==
        Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10(Counter{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, Key{0xa4093822u, 0x299f31d0u}) ==
        Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("seed splits into two key words") {
  const Key k = key_from_seed(0x0123456789abcdefull);
  CHECK(k[0] == 0x89abcdefu);
  CHECK(k[1] == 0x01234567u);
}

TEST_CASE("log_positive tracks std::log") {
  double worst = 0.0;
  for (int k = 0; k < 200000; ++k) {
    const double u = (k + 0.5) / 200000.0;
    worst = std::max(worst, std::abs(log_positive(u) - std::log(u)));
  }
  for (double u : {std::ldexp(0.5, -32), 1e-300, 0.7071067811865476, 0.7071067811865475, 1.0 - 1e-16})
    worst = std::max(worst, std::abs(log_positive(u) - std::log(u)) / std::max(1.0, std::abs(std::log(u))));
  CHECK(worst < 1e-14);
}

TEST_CASE("quadrant sine and cosine track the library") {
  double worst = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    const double x = 1.5707963267948966 * k / 100000.0;
    double s, c;
    sincos_quadrant(x, s, c);
    worst = std::max({worst, std::abs(s - std::sin(x)), std::abs(c - std::cos(x))});
  }
  CHECK(worst < 1e-15);
}

TEST_CASE("Box-Muller covers all four quadrants") {
  double n0, n1;
  const std::uint32_t half = 0x20000000u;  // middle of a quadrant
  const double r = std::sqrt(-2.0 * std::log((0x80000000u + 0.5) / 4294967296.0));
  for (std::uint32_t q = 0; q < 4; ++q) {
    box_muller(0x80000000u, (q << 30) | half, n0, n1);
    const double ang = (q + 0.5) * 1.5707963267948966 + 0.5 / 1073741824.0 * 1.5707963267948966;
    CHECK(n0 == doctest::Approx(r * std::cos(ang)).epsilon(1e-12));
    CHECK(n1 == doctest::Approx(r * std::sin(ang)).epsilon(1e-12));
  }
}

TEST_CASE("step normals have unit variance and no correlation") {
  const Key key = key_from_seed(2024);
  const int n = 200000;
  double sum[6] = {}, sq[6] = {}, cross = 0.0, kurt = 0.0;
  for (int s = 0; s < n; ++s) {
    double g[6];
    step_normals(key[0], key[1], 17, s, g);
    for (int k = 0; k < 6; ++k) {
      sum[k] += g[k];
      sq[k] += g[k] * g[k];
    }
    cross += g[0] * g[3];
    kurt += g[2] * g[2] * g[2] * g[2];
  }
  const double se = 1.0 / std::sqrt(n);
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(sum[k] / n) < 5 * se);
    CHECK(std::abs(sq[k] / n - 1.0) < 5 * std::sqrt(2.0) * se);
  }
  CHECK(std::abs(cross / n) < 5 * se);
  CHECK(std::abs(kurt / n - 3.0) < 5 * std::sqrt(96.0) * se);
}

TEST_CASE("different trajectories and steps draw different numbers") {
  double a[6], b[6], c[6];
  step_normals(1, 0, 0, 0, a);
  step_normals(1, 0, 1, 0, b);
  step_normals(1, 0, 0, 1, c);
  CHECK(a[0] != b[0]);
  CHECK(a[0] != c[0]);
  CHECK(a[5] != c[5]);
}
