#include "trimer/spectra.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "trimer/error.hpp"

namespace trimer::spectra {

Vec6 steady_means_from_moments(const MomentMeans& m) {
  Vec6 s;
  for (int j = 0; j < kWells; ++j) {
    const cplx a = 0.5 * (m.a(j) + std::conj(m.p(j)));
    s[2 * j] = a;
    s[2 * j + 1] = std::conj(a);
  }
  return s;
}

Vec6 steady_means_from_fixed_point(const SystemParams& params) {
  const Wells a = semiclassical_steady_state(params);
  Vec6 s;
  for (int j = 0; j < kWells; ++j) {
    s[2 * j] = a[j];
    s[2 * j + 1] = std::conj(a[j]);
  }
  return s;
}

double anharmonicity_ratio(const SystemParams& params, const Vec6& steady) {
  double n_max = 0.0;
  for (int j = 0; j < kWells; ++j) n_max = std::max(n_max, std::abs(steady[2 * j + 1] * steady[2 * j]));
  return 2.0 * params.chi * n_max / params.gamma;
}

Eigen::Matrix<cplx, 6, 1> drift_eigenvalues(const Mat6& a) {
  Eigen::ComplexEigenSolver<Mat6> es(a, false);
  return es.eigenvalues();
}

SpectralModel build_spectral_model(const SystemParams& params, const Vec6& steady, const SpectralOptions& opts) {
  params.validate();
  if (params.gamma <= 0.0) throw ConfigError("output spectra need gamma > 0");
  const double ratio = anharmonicity_ratio(params, steady);
  if (ratio >= 1.0 && !opts.override_gaussian_guard) {
    std::ostringstream msg;
    msg << "linearised output treatment refused: 2 chi max N / gamma = " << ratio
        << " >= 1 (pass the override to compute anyway)";
    throw GaussianGuardViolation(msg.str());
  }

  SpectralModel m;
  m.params = params;
  m.steady = steady;
  m.form = opts.form;
  m.a.setZero();
  m.d.setZero();
  const cplx i1(0.0, 1.0);
  const double chi = params.chi;
  const double jt = params.j_tunnel;
  const double k = opts.form == DriftForm::kJacobian ? 4.0 : 2.0;
  for (int j = 0; j < kWells; ++j) {
    const int ra = 2 * j, rp = 2 * j + 1;
    const cplx a = steady[ra], p = steady[rp];
    const cplx n = p * a;
    const double g = j == 1 ? 0.0 : params.gamma;
    m.a(ra, ra) = g + k * i1 * chi * n;
    m.a(ra, rp) = 2.0 * i1 * chi * a * a;
    m.a(rp, ra) = -2.0 * i1 * chi * p * p;
    m.a(rp, rp) = g - k * i1 * chi * n;
    m.d(ra, ra) = -2.0 * i1 * chi * a * a;
    m.d(rp, rp) = 2.0 * i1 * chi * p * p;
  }
  for (const int end : {0, 4}) {
    m.a(end, 2) = m.a(2, end) = -i1 * jt;
    m.a(end + 1, 3) = m.a(3, end + 1) = i1 * jt;
  }

  const auto ev = drift_eigenvalues(m.a);
  for (int e = 0; e < 6; ++e) {
    if (!(ev[e].real() > 0.0)) {
      std::ostringstream msg;
      msg << "drift matrix has eigenvalue " << ev[e].real() << (ev[e].imag() < 0 ? " - " : " + ")
          << std::abs(ev[e].imag()) << "i with non-positive real part";
      throw UnstableDriftMatrix(msg.str());
    }
  }
  return m;
}

Mat6 spectral_matrix(const SpectralModel& model, double omega) {
  const Mat6 id = Mat6::Identity();
  const cplx iw(0.0, omega);
  // X (A^T - iw)^-1 = ((A - iw)^-1 X^T)^T
  Eigen::FullPivLU<Mat6> left(model.a + iw * id);
  Eigen::FullPivLU<Mat6> right_t(model.a - iw * id);
  if (!left.isInvertible() || !right_t.isInvertible()) {
    std::ostringstream msg;
    msg << "A + i w is singular at w=" << omega;
    throw SingularAtFrequency(msg.str());
  }
  const Mat6 x = left.solve(model.d);
  return right_t.solve(x.transpose()).transpose();
}

namespace {

Eigen::Matrix<cplx, 6, 1> quadrature_vector(int well, double theta) {
  Eigen::Matrix<cplx, 6, 1> u = Eigen::Matrix<cplx, 6, 1>::Zero();
  u[2 * well] = std::polar(1.0, -theta);
  u[2 * well + 1] = std::polar(1.0, theta);
  return u;
}

}  // namespace

double OutputQuadratures::duan_simon() const { return x11 + x33 + 2.0 * x13 + y11 + y33 - 2.0 * y13; }

double OutputQuadratures::reid_epr() const { return (x11 - x13 * x13 / x33) * (y11 - y13 * y13 / y33); }

OutputQuadratures output_quadrature_spectra(const SpectralModel& model, double omega, double theta) {
  const Mat6 s = spectral_matrix(model, omega);
  const double g = model.params.gamma;
  OutputQuadratures q;
  auto out = [&](int i, int j, double th) {
    const auto ui = quadrature_vector(i, th);
    const auto uj = quadrature_vector(j, th);
    const cplx sij = (ui.transpose() * s * uj)(0, 0);
    const cplx sji = (uj.transpose() * s * ui)(0, 0);
    const cplx v = (i == j ? 1.0 : 0.0) + g * (sij + sji);
    q.max_imag = std::max(q.max_imag, std::abs(v.imag()));
    return v.real();
  };
  const double phi = theta + std::numbers::pi / 2;
  q.x11 = out(0, 0, theta);
  q.x13 = out(0, 2, theta);
  q.x33 = out(2, 2, theta);
  q.y11 = out(0, 0, phi);
  q.y13 = out(0, 2, phi);
  q.y33 = out(2, 2, phi);
  return q;
}

void OmegaGrid::validate() const {
  if (n < 2 || !std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
    throw ConfigError("omega grid needs finite lo < hi and at least 2 points");
}

std::vector<double> OmegaGrid::points() const {
  validate();
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) w[k] = lo + (hi - lo) * k / (n - 1);
  return w;
}

ViolationBand violation_band(const std::vector<double>& omega, const std::vector<double>& curve, double bound) {
  ViolationBand b;
  if (curve.empty()) return b;
  const auto arg = static_cast<std::size_t>(std::min_element(curve.begin(), curve.end()) - curve.begin());
  b.min_value = curve[arg];
  b.omega_at_min = omega[arg];
  if (!(curve[arg] < bound)) return b;
  b.violated = true;
  std::size_t lo = arg, hi = arg;
  while (lo > 0 && curve[lo - 1] < bound) --lo;
  while (hi + 1 < curve.size() && curve[hi + 1] < bound) ++hi;
  b.lo = omega[lo];
  b.hi = omega[hi];
  b.finite = lo > 0 && hi + 1 < curve.size();
  return b;
}

EntanglementSpectra output_entanglement_spectra(const SpectralModel& model, const OmegaGrid& grid, double theta) {
  EntanglementSpectra e;
  e.theta = theta;
  e.omega = grid.points();
  for (double w : e.omega) {
    const auto q = output_quadrature_spectra(model, w, theta);
    e.quadratures.push_back(q);
    e.ds.push_back(q.duan_simon());
    e.epr.push_back(q.reid_epr());
    e.max_imag = std::max(e.max_imag, q.max_imag);
  }
  e.ds_band = violation_band(e.omega, e.ds, 4.0);
  e.epr_band = violation_band(e.omega, e.epr, 1.0);
  return e;
}

Mat6 lyapunov_covariance(const SpectralModel& model) {
  // column-major vec: vec(A C) = (I (x) A) vec C, vec(C A^T) = (A (x) I) vec C
  Eigen::Matrix<cplx, 36, 36> big = Eigen::Matrix<cplx, 36, 36>::Zero();
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      for (int k = 0; k < 6; ++k) {
        big(6 * k + r, 6 * k + c) += model.a(r, c);
        big(6 * r + k, 6 * c + k) += model.a(r, c);
      }
    }
  }
  Eigen::Matrix<cplx, 36, 1> rhs;
  for (int c = 0; c < 6; ++c)
    for (int r = 0; r < 6; ++r) rhs[6 * c + r] = model.d(r, c);
  const Eigen::Matrix<cplx, 36, 1> x = big.fullPivLu().solve(rhs);
  Mat6 cov;
  for (int c = 0; c < 6; ++c)
    for (int r = 0; r < 6; ++r) cov(r, c) = x[6 * c + r];
  return cov;
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

Mat6 integrated_spectrum(const SpectralModel& model, int panels, int order, double scale) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  Mat6 sum = Mat6::Zero();
  const double half_pi = std::numbers::pi / 2;
  const double width = 2.0 * half_pi / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -half_pi + (p + 0.5) * width;
    for (int k = 0; k < order; ++k) {
      const double phi = mid + 0.5 * width * x[k];
      const double c = std::cos(phi);
      const double omega = scale * std::tan(phi);
      sum += (0.5 * width * w[k] * scale / (c * c)) * spectral_matrix(model, omega);
    }
  }
  return sum / (2.0 * std::numbers::pi);
}

}  // namespace trimer::spectra
