#include "trimer/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "trimer/error.hpp"

namespace trimer {

bool Estimate::noisy_imaginary() const { return std::abs(imag) > 1e-2 * std::abs(value); }

namespace moments {

namespace {

cplx rot(double theta) { return std::polar(1.0, -theta); }  // e^{-i theta}

}  // namespace

cplx population(const MomentMeans& m, int j) { return m.n(j); }

cplx g2(const MomentMeans& m, int i, int j) {
  if (i == j) return m.nn(j) / (m.n(j) * m.n(j));
  return m.ninj(i, j) / (m.n(i) * m.n(j));
}

cplx number_variance(const MomentMeans& m, int j) { return m.nn(j) + m.n(j) - m.n(j) * m.n(j); }

cplx fano_number_difference(const MomentMeans& m) {
  const cplx cov = m.ninj(0, 2) - m.n(0) * m.n(2);
  return (number_variance(m, 0) + number_variance(m, 2) - 2.0 * cov) / (m.n(0) + m.n(2));
}

cplx quadrature_variance(const MomentMeans& m, int j, double theta) {
  const cplx e = rot(theta);
  return 1.0 + e * e * (m.aa(j) - m.a(j) * m.a(j)) + std::conj(e * e) * (m.pp(j) - m.p(j) * m.p(j)) +
         2.0 * (m.n(j) - m.p(j) * m.a(j));
}

cplx quadrature_covariance(const MomentMeans& m, int i, int j, double theta) {
  if (i == j) return quadrature_variance(m, j, theta);
  const cplx e = rot(theta);
  return e * e * (m.aiaj(i, j) - m.a(i) * m.a(j)) + std::conj(e * e) * (m.pipj(i, j) - m.p(i) * m.p(j)) +
         (m.piaj(j, i) - m.p(j) * m.a(i)) + (m.piaj(i, j) - m.p(i) * m.a(j));
}

cplx duan_simon(const MomentMeans& m, double theta) {
  const double phi = theta + std::numbers::pi / 2;
  const cplx vx = quadrature_variance(m, 0, theta) + quadrature_variance(m, 2, theta) +
                  2.0 * quadrature_covariance(m, 0, 2, theta);
  const cplx vy = quadrature_variance(m, 0, phi) + quadrature_variance(m, 2, phi) -
                  2.0 * quadrature_covariance(m, 0, 2, phi);
  return vx + vy;
}

cplx reid_epr(const MomentMeans& m, int i, int j, double theta) {
  const double phi = theta + std::numbers::pi / 2;
  const cplx cx = quadrature_covariance(m, i, j, theta);
  const cplx cy = quadrature_covariance(m, i, j, phi);
  const cplx vx = quadrature_variance(m, i, theta) - cx * cx / quadrature_variance(m, j, theta);
  const cplx vy = quadrature_variance(m, i, phi) - cy * cy / quadrature_variance(m, j, phi);
  return vx * vy;
}

}  // namespace moments

JackknifeMeans::JackknifeMeans(const MomentAccumulator& acc)
    : JackknifeMeans(std::vector<const MomentAccumulator*>{&acc}) {}

JackknifeMeans::JackknifeMeans(const std::vector<const MomentAccumulator*>& window) {
  std::vector<std::map<std::uint32_t, MomentMeans>> loo;
  std::set<std::uint32_t> keys;
  for (const auto* acc : window) {
    if (acc->empty()) continue;
    full.push_back(acc->means());
    loo.push_back(acc->leave_one_out_means());
    for (const auto& [key, sums] : acc->batches())
      if (sums.count > 0) keys.insert(key);
  }
  if (full.empty()) throw EmptyAccumulator("no samples to estimate from");
  if (keys.size() < 2) return;
  // A batch absent at some time leaves that time unchanged.
  for (const auto key : keys) {
    std::vector<MomentMeans> r(full.size());
    for (std::size_t t = 0; t < full.size(); ++t) {
      const auto it = loo[t].find(key);
      r[t] = it == loo[t].end() ? full[t] : it->second;
    }
    replicas.push_back(std::move(r));
  }
}

namespace {

cplx time_average(const std::vector<MomentMeans>& slices, const MomentFunction& f) {
  cplx sum = 0.0;
  for (const auto& m : slices) sum += f(m);
  return sum / static_cast<double>(slices.size());
}

}  // namespace

Estimate JackknifeMeans::operator()(const MomentFunction& f) const {
  const cplx v = time_average(full, f);
  Estimate e{v.real(), 0.0, v.imag(), false};
  const auto b = replicas.size();
  if (b < 2) return e;
  std::vector<double> r(b);
  double mean = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    r[k] = time_average(replicas[k], f).real();
    mean += r[k];
  }
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  e.err = std::sqrt(ss * static_cast<double>(b - 1) / static_cast<double>(b));
  e.has_error = true;
  return e;
}

MomentMeans JackknifeMeans::averaged() const {
  MomentMeans m;
  for (const auto& s : full)
    for (int k = 0; k < kMonomials; ++k) m.v[k] += s.v[k];
  for (auto& x : m.v) x /= static_cast<double>(full.size());
  return m;
}

Estimate estimate(const MomentAccumulator& acc, const MomentFunction& f) { return JackknifeMeans(acc)(f); }

namespace {

// Zero, or within three standard errors of it.
bool consistent_with_zero(const Estimate& e) {
  return e.value <= 0.0 || (e.has_error && e.value <= 3.0 * e.err);
}

void require_population(const JackknifeMeans& jm, int j) {
  const Estimate n = population(jm, j);
  if (consistent_with_zero(n)) {
    std::ostringstream msg;
    msg << "population of well " << j + 1 << " is consistent with zero (" << n.value << " +/- " << n.err << ")";
    throw ZeroPopulation(msg.str());
  }
}

}  // namespace

Estimate population(const JackknifeMeans& jm, int j) {
  return jm([j](const MomentMeans& m) { return moments::population(m, j); });
}

Estimate g2(const JackknifeMeans& jm, int i, int j) {
  require_population(jm, i);
  if (j != i) require_population(jm, j);
  return jm([i, j](const MomentMeans& m) { return moments::g2(m, i, j); });
}

Estimate fano_number_difference(const JackknifeMeans& jm) {
  const Estimate total = jm([](const MomentMeans& m) { return m.n(0) + m.n(2); });
  if (consistent_with_zero(total)) throw ZeroPopulation("N1 + N3 is consistent with zero");
  return jm([](const MomentMeans& m) { return moments::fano_number_difference(m); });
}

Estimate quadrature_variance(const JackknifeMeans& jm, int j, double theta) {
  return jm([j, theta](const MomentMeans& m) { return moments::quadrature_variance(m, j, theta); });
}

Estimate duan_simon(const JackknifeMeans& jm, double theta) {
  return jm([theta](const MomentMeans& m) { return moments::duan_simon(m, theta); });
}

Estimate reid_epr(const JackknifeMeans& jm, int i, int j, double theta) {
  for (const double a : {theta, theta + std::numbers::pi / 2}) {
    const Estimate v = quadrature_variance(jm, j, a);
    if (consistent_with_zero(v)) {
      std::ostringstream msg;
      msg << "conditioning variance of well " << j + 1 << " is consistent with zero at theta="
          << a * 180.0 / std::numbers::pi << " deg";
      throw DegenerateInference(msg.str());
    }
  }
  return jm([i, j, theta](const MomentMeans& m) { return moments::reid_epr(m, i, j, theta); });
}

void AngleGrid::validate() const {
  if (!(step_deg > 0.0) || !std::isfinite(start_deg) || !std::isfinite(stop_deg) || !(stop_deg > start_deg))
    throw ConfigError("angle grid needs finite start < stop and step > 0");
  if (stop_deg - start_deg < 180.0 - 1e-9) throw ConfigError("angle grid must span 180 degrees");
}

std::vector<double> AngleGrid::angles_deg() const {
  validate();
  std::vector<double> out;
  const auto n = static_cast<std::int64_t>(std::ceil((stop_deg - start_deg) / step_deg - 1e-9));
  out.reserve(n);
  for (std::int64_t k = 0; k < n; ++k) out.push_back(start_deg + static_cast<double>(k) * step_deg);
  return out;
}

ScanMinimum find_minimum(const std::vector<double>& theta_deg, const std::vector<Estimate>& curve) {
  ScanMinimum best;
  if (curve.empty()) return best;
  std::size_t arg = 0;
  double hi = curve[0].value, max_err = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (curve[k].value < curve[arg].value) arg = k;
    hi = std::max(hi, curve[k].value);
    max_err = std::max(max_err, curve[k].err);
  }
  best.theta_deg = theta_deg[arg];
  best.value = curve[arg];
  const double range = hi - curve[arg].value;
  best.flat = range <= 3.0 * max_err + 1e-9 * std::max(1.0, std::abs(hi));
  return best;
}

AngleScan scan_angles(const JackknifeMeans& jm, const AngleGrid& grid) {
  AngleScan s;
  s.theta_deg = grid.angles_deg();
  const double deg = std::numbers::pi / 180.0;
  for (double t : s.theta_deg) {
    const double th = t * deg;
    s.vx1.push_back(quadrature_variance(jm, 0, th));
    s.vx2.push_back(quadrature_variance(jm, 1, th));
    s.vx3.push_back(quadrature_variance(jm, 2, th));
    s.vy1.push_back(quadrature_variance(jm, 0, th + std::numbers::pi / 2));
    s.ds13.push_back(duan_simon(jm, th));
    s.epr13.push_back(reid_epr(jm, 0, 2, th));
    s.epr31.push_back(reid_epr(jm, 2, 0, th));
  }
  s.min_vx1 = find_minimum(s.theta_deg, s.vx1);
  s.min_vx2 = find_minimum(s.theta_deg, s.vx2);
  s.min_vx3 = find_minimum(s.theta_deg, s.vx3);
  s.min_ds13 = find_minimum(s.theta_deg, s.ds13);
  s.min_epr13 = find_minimum(s.theta_deg, s.epr13);
  s.min_epr31 = find_minimum(s.theta_deg, s.epr31);
  return s;
}

CorrelationReport correlation_report(const JackknifeMeans& jm, double t, std::int64_t count) {
  CorrelationReport r;
  r.t = t;
  r.count = count;
  for (int j = 0; j < kWells; ++j) r.n[j] = population(jm, j);
  for (int i = 0; i < kWells; ++i)
    for (int j = 0; j < kWells; ++j) r.g2[i][j] = g2(jm, i, j);
  r.fano13 = fano_number_difference(jm);
  return r;
}

}  // namespace trimer
