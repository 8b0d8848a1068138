#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "trimer/error.hpp"
#include "trimer/estimators.hpp"

using namespace trimer;

namespace {

using Sample = TrajectoryState;

std::vector<Sample> random_samples(int n, unsigned seed, double spread) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Sample> out(n);
  const Wells centre{cplx(0.3, 2.0), cplx(2.5, 0.1), cplx(0.2, 1.9)};
  for (auto& s : out) {
    const double common = g(gen);  // correlates wells 1 and 3
    for (int j = 0; j < kWells; ++j) {
      const double c = j == 1 ? 0.0 : common;
      s.alpha[j] = centre[j] + spread * cplx(g(gen) + 0.6 * c, g(gen));
      s.alpha_plus[j] = std::conj(centre[j]) + spread * cplx(g(gen) - 0.4 * c, g(gen));
    }
  }
  return out;
}

MomentAccumulator accumulate(const std::vector<Sample>& xs, int n_batches) {
  MomentAccumulator acc;
  for (std::size_t k = 0; k < xs.size(); ++k) acc.add(static_cast<std::uint32_t>(k * n_batches / xs.size()), xs[k]);
  return acc;
}

template <typename F>
cplx mean_of(const std::vector<Sample>& xs, F f) {
  cplx s = 0.0;
  for (const auto& x : xs) s += f(x);
  return s / static_cast<double>(xs.size());
}

cplx quad(const Sample& s, int j, double th) {
  return s.alpha[j] * std::polar(1.0, -th) + s.alpha_plus[j] * std::polar(1.0, th);
}

// Direct c-number formulas on a sample list.
struct Direct {
  const std::vector<Sample>& xs;

  cplx n(int j) const { return mean_of(xs, [&](const Sample& s) { return s.alpha_plus[j] * s.alpha[j]; }); }
  cplx g2(int i, int j) const {
    return mean_of(xs, [&](const Sample& s) { return s.alpha_plus[i] * s.alpha[i] * s.alpha_plus[j] * s.alpha[j]; }) /
           (n(i) * n(j));
  }
  cplx cov(int i, int j, double th) const {
    return mean_of(xs, [&](const Sample& s) { return quad(s, i, th) * quad(s, j, th); }) -
           mean_of(xs, [&](const Sample& s) { return quad(s, i, th); }) *
               mean_of(xs, [&](const Sample& s) { return quad(s, j, th); });
  }
  cplx var(int j, double th) const { return 1.0 + cov(j, j, th); }
  cplx fano() const {
    auto d = [](const Sample& s) { return s.alpha_plus[0] * s.alpha[0] - s.alpha_plus[2] * s.alpha[2]; };
    const cplx m = mean_of(xs, d);
    const cplx v = mean_of(xs, [&](const Sample& s) { return d(s) * d(s); }) - m * m + n(0) + n(2);
    return v / (n(0) + n(2));
  }
  cplx ds(double th) const {
    const double ph = th + std::numbers::pi / 2;
    return var(0, th) + var(2, th) + 2.0 * cov(0, 2, th) + var(0, ph) + var(2, ph) - 2.0 * cov(0, 2, ph);
  }
  cplx epr(int i, int j, double th) const {
    const double ph = th + std::numbers::pi / 2;
    const cplx cx = cov(i, j, th), cy = cov(i, j, ph);
    return (var(i, th) - cx * cx / var(j, th)) * (var(i, ph) - cy * cy / var(j, ph));
  }
};

void check_close(cplx got, cplx want) {
  CHECK(got.real() == doctest::Approx(want.real()).epsilon(1e-10));
  CHECK(got.imag() == doctest::Approx(want.imag()).epsilon(1e-8).scale(std::abs(want)));
}

}  // namespace

TEST_CASE("closed forms agree with direct sample formulas") {
  const auto xs = random_samples(3000, 5, 0.4);
  const MomentMeans m = accumulate(xs, 10).means();
  const Direct d{xs};
  for (int j = 0; j < kWells; ++j) check_close(moments::population(m, j), d.n(j));
  for (int i = 0; i < kWells; ++i)
    for (int j = 0; j < kWells; ++j) check_close(moments::g2(m, i, j), d.g2(i, j));
  check_close(moments::fano_number_difference(m), d.fano());
  for (double th : {0.0, 0.4, 1.3, 2.2, 3.0}) {
    for (int j = 0; j < kWells; ++j) check_close(moments::quadrature_variance(m, j, th), d.var(j, th));
    check_close(moments::quadrature_covariance(m, 0, 2, th), d.cov(0, 2, th));
    check_close(moments::duan_simon(m, th), d.ds(th));
    check_close(moments::reid_epr(m, 0, 2, th), d.epr(0, 2, th));
    check_close(moments::reid_epr(m, 2, 0, th), d.epr(2, 0, th));
  }
}

TEST_CASE("quadrature at theta + 90 degrees is the conjugate quadrature") {
  const auto xs = random_samples(500, 8, 0.7);
  const MomentMeans m = accumulate(xs, 5).means();
  for (double th : {0.1, 1.0, 2.5}) {
    const double ph = th + std::numbers::pi / 2;
    const cplx y = 1.0 + mean_of(xs, [&](const Sample& s) {
                     const cplx q = -cplx(0, 1) * s.alpha[0] * std::polar(1.0, -th) +
                                    cplx(0, 1) * s.alpha_plus[0] * std::polar(1.0, th);
                     return q * q;
                   }) -
                   std::pow(mean_of(xs, [&](const Sample& s) {
                              return -cplx(0, 1) * s.alpha[0] * std::polar(1.0, -th) +
                                     cplx(0, 1) * s.alpha_plus[0] * std::polar(1.0, th);
                            }),
                            2);
    check_close(moments::quadrature_variance(m, 0, ph), y);
  }
}

TEST_CASE("a single fixed amplitude is a coherent state") {
  MomentAccumulator acc;
  Sample s;
  s.alpha = {cplx(0.0, 5.0), 5.0, cplx(0.0, 5.0)};
  for (int j = 0; j < kWells; ++j) s.alpha_plus[j] = std::conj(s.alpha[j]);
  acc.add(0, s);
  const JackknifeMeans jm(acc);
  for (int i = 0; i < kWells; ++i)
    for (int j = 0; j < kWells; ++j) CHECK(g2(jm, i, j).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fano_number_difference(jm).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(duan_simon(jm, 0.7).value == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(reid_epr(jm, 0, 2, 0.7).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(g2(jm, 0, 1).has_error);
}

TEST_CASE("uncorrelated wells give a product of local variances") {
  MomentMeans m;
  // squeezed well 1, vacuum-like well 3, no cross moments beyond products of means
  m.slot(Mono::kAA, 0) = cplx(0.0, 0.2);
  m.slot(Mono::kPP, 0) = cplx(0.0, -0.2);
  m.slot(Mono::kN, 0) = 0.05;
  const double th = 0.3;
  const cplx v = moments::quadrature_variance(m, 0, th);
  const cplx w = moments::quadrature_variance(m, 0, th + std::numbers::pi / 2);
  const cplx e = moments::reid_epr(m, 0, 2, th);
  CHECK(e.real() == doctest::Approx((v * w).real()).epsilon(1e-14));
  CHECK(e.real() >= 1.0);
}

TEST_CASE("jackknife error matches a brute-force leave-one-out") {
  const auto xs = random_samples(400, 11, 0.5);
  const int nb = 8;
  const auto acc = accumulate(xs, nb);
  const double th = 2.0;
  const auto f = [&](const MomentMeans& m) { return moments::reid_epr(m, 0, 2, th); };
  const Estimate e = estimate(acc, f);

  std::vector<double> r;
  for (int b = 0; b < nb; ++b) {
    std::vector<Sample> rest;
    for (std::size_t k = 0; k < xs.size(); ++k)
      if (static_cast<int>(k * nb / xs.size()) != b) rest.push_back(xs[k]);
    r.push_back(Direct{rest}.epr(0, 2, th).real());
  }
  double mean = 0.0, ss = 0.0;
  for (double x : r) mean += x / nb;
  for (double x : r) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss * (nb - 1) / nb);
  CHECK(e.has_error);
  CHECK(e.value == doctest::Approx(Direct{xs}.epr(0, 2, th).real()).epsilon(1e-11));
  CHECK(e.err == doctest::Approx(se).epsilon(1e-7));
}

TEST_CASE("window estimates average the observable over sample times") {
  const auto x1 = random_samples(300, 21, 0.5);
  const auto x2 = random_samples(300, 22, 0.9);
  const int nb = 6;
  const auto a1 = accumulate(x1, nb), a2 = accumulate(x2, nb);
  const JackknifeMeans jm(std::vector<const MomentAccumulator*>{&a1, &a2});
  const double th = 0.8;
  const Estimate v = quadrature_variance(jm, 0, th);
  CHECK(v.value == doctest::Approx(0.5 * (Direct{x1}.var(0, th) + Direct{x2}.var(0, th)).real()).epsilon(1e-12));

  std::vector<double> r;
  for (int b = 0; b < nb; ++b) {
    std::vector<Sample> r1, r2;
    for (std::size_t k = 0; k < x1.size(); ++k) {
      if (static_cast<int>(k * nb / x1.size()) == b) continue;
      r1.push_back(x1[k]);
      r2.push_back(x2[k]);
    }
    r.push_back(0.5 * (Direct{r1}.var(0, th) + Direct{r2}.var(0, th)).real());
  }
  double mean = 0.0, ss = 0.0;
  for (double x : r) mean += x / nb;
  for (double x : r) ss += (x - mean) * (x - mean);
  CHECK(v.err == doctest::Approx(std::sqrt(ss * (nb - 1) / nb)).epsilon(1e-7));

  const MomentMeans avg = jm.averaged();
  CHECK(std::abs(avg.a(1) - 0.5 * (a1.means().a(1) + a2.means().a(1))) < 1e-14);
}

TEST_CASE("merge over disjoint batches equals a single pass") {
  const auto xs = random_samples(600, 3, 0.5);
  const auto whole = accumulate(xs, 12);
  MomentAccumulator lo, hi, mid;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto b = static_cast<std::uint32_t>(k * 12 / xs.size());
    (b < 4 ? lo : b < 8 ? mid : hi).add(b, xs[k]);
  }
  MomentAccumulator left = lo;
  left.merge(mid).merge(hi);
  MomentAccumulator right = hi;
  MomentAccumulator tail = mid;
  tail.merge(lo);
  right.merge(tail);
  CHECK(left == whole);
  CHECK(right == whole);
  CHECK(left.means().v == whole.means().v);
  MomentAccumulator empty;
  MomentAccumulator same = whole;
  same.merge(empty);
  CHECK(same == whole);
  CHECK(empty.merge(whole) == whole);
  CHECK(whole.count() == 600);
}

TEST_CASE("checked estimators refuse degenerate input") {
  MomentAccumulator empty;
  CHECK_THROWS_AS(JackknifeMeans{empty}, EmptyAccumulator);
  MomentAccumulator vac;
  vac.add(0, Sample{});
  vac.add(1, Sample{});
  const JackknifeMeans jm(vac);
  CHECK(population(jm, 1).value == 0.0);
  CHECK_THROWS_AS(g2(jm, 0, 2), ZeroPopulation);
  CHECK_THROWS_AS(fano_number_difference(jm), ZeroPopulation);
  CHECK(quadrature_variance(jm, 0, 1.0).value == 1.0);
  CHECK(duan_simon(jm, 1.0).value == 4.0);
}

TEST_CASE("angle scan") {
  SUBCASE("flat for a coherent product") {
    MomentAccumulator acc;
    Sample s;
    s.alpha = {cplx(0.0, 5.0), 5.0, cplx(0.0, 5.0)};
    for (int j = 0; j < kWells; ++j) s.alpha_plus[j] = std::conj(s.alpha[j]);
    for (std::uint32_t b = 0; b < 4; ++b) acc.add(b, s);
    const AngleScan sc = scan_angles(JackknifeMeans(acc), AngleGrid{});
    CHECK(sc.theta_deg.size() == 180);
    CHECK(sc.min_vx1.flat);
    CHECK(sc.min_ds13.flat);
    CHECK(sc.min_vx1.value.value == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("finds the squeezed angle") {
    const auto xs = random_samples(2000, 4, 0.5);
    const auto acc = accumulate(xs, 10);
    const AngleScan sc = scan_angles(JackknifeMeans(acc), AngleGrid{0.0, 180.0, 0.5});
    double best = 1e9, arg = 0.0;
    for (int k = 0; k < 360; ++k) {
      const double v = Direct{xs}.var(1, k * 0.5 * std::numbers::pi / 180).real();
      if (v < best) best = v, arg = k * 0.5;
    }
    CHECK(sc.min_vx2.theta_deg == arg);
    CHECK(sc.min_vx2.value.value == doctest::Approx(best).epsilon(1e-10));
    for (std::size_t k = 0; k < sc.theta_deg.size(); ++k) {
      const std::size_t k90 = (k + 180) % 360;
      if (k < 180) CHECK(sc.vy1[k].value == doctest::Approx(sc.vx1[k90].value).epsilon(1e-12));
    }
  }
  SUBCASE("grid validation") {
    CHECK_THROWS_AS((AngleGrid{0.0, 90.0, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((AngleGrid{0.0, 180.0, 0.0}.validate()), ConfigError);
  }
}
