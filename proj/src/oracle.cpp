#include "trimer/oracle.hpp"

#include <omp.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "trimer/error.hpp"

namespace trimer::oracle {

void FockConfig::validate() const {
  if (n_cut < 2) throw ConfigError("oracle n_cut must be >= 2");
  if (!(dt > 0.0) || !(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("oracle needs dt > 0 and t_final > 0");
  if (!(tail_threshold > 0.0)) throw ConfigError("oracle tail threshold must be positive");
  double last = 0.0;
  for (double t : sample_times) {
    if (!(t > last) || t > t_final + 1e-12) throw ConfigError("oracle sample times must increase within (0, t_final]");
    const double k = t / dt;
    if (std::abs(k - std::round(k)) > 1e-6) throw ConfigError("oracle sample times must be multiples of dt");
    last = t;
  }
}

DensityMatrix::DensityMatrix(int n_cut)
    : n_cut_(n_cut), dim_(n_cut * n_cut * n_cut), data_(static_cast<std::size_t>(dim_) * dim_) {}

DensityMatrix DensityMatrix::vacuum(int n_cut) { return fock(n_cut, 0, 0, 0); }

DensityMatrix DensityMatrix::fock(int n_cut, int n1, int n2, int n3) {
  DensityMatrix rho(n_cut);
  const int k = rho.index(n1, n2, n3);
  rho(k, k) = 1.0;
  return rho;
}

DensityMatrix DensityMatrix::coherent(int n_cut, const Wells& alpha) {
  DensityMatrix rho(n_cut);
  std::vector<std::vector<cplx>> amp(kWells, std::vector<cplx>(n_cut));
  for (int j = 0; j < kWells; ++j) {
    cplx c = std::exp(-0.5 * std::norm(alpha[j]));
    for (int n = 0; n < n_cut; ++n) {
      amp[j][n] = c;
      c *= alpha[j] / std::sqrt(static_cast<double>(n + 1));
    }
  }
  std::vector<cplx> psi(rho.dim());
  double norm = 0.0;
  for (int r = 0; r < rho.dim(); ++r) {
    psi[r] = amp[0][rho.occupation(r, 0)] * amp[1][rho.occupation(r, 1)] * amp[2][rho.occupation(r, 2)];
    norm += std::norm(psi[r]);
  }
  for (int r = 0; r < rho.dim(); ++r)
    for (int c = 0; c < rho.dim(); ++c) rho(r, c) = psi[r] * std::conj(psi[c]) / norm;
  return rho;
}

int DensityMatrix::occupation(int r, int mode) const {
  if (mode == 0) return r / (n_cut_ * n_cut_);
  if (mode == 1) return (r / n_cut_) % n_cut_;
  return r % n_cut_;
}

cplx DensityMatrix::trace() const {
  cplx t = 0.0;
  for (int r = 0; r < dim_; ++r) t += (*this)(r, r);
  return t;
}

double DensityMatrix::hermiticity_error() const {
  double e = 0.0;
  for (int r = 0; r < dim_; ++r)
    for (int c = r; c < dim_; ++c) e = std::max(e, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
  return e;
}

double DensityMatrix::tail_population() const {
  double p = 0.0;
  for (int r = 0; r < dim_; ++r) {
    const bool top = occupation(r, 0) == n_cut_ - 1 || occupation(r, 1) == n_cut_ - 1 || occupation(r, 2) == n_cut_ - 1;
    if (top) p += (*this)(r, r).real();
  }
  return p;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::MatrixXcd m(dim_, dim_);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) m(r, c) = (*this)(r, c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

cplx DensityMatrix::expectation(const std::array<int, 3>& create, const std::array<int, 3>& annihilate) const {
  // M|c> = coef |t(c)>, so Tr(rho M) = sum_c coef(c) rho(c, t(c)).
  cplx sum = 0.0;
  for (int c = 0; c < dim_; ++c) {
    double coef = 1.0;
    int occ[3];
    bool inside = true;
    for (int j = 0; j < kWells && inside; ++j) {
      int n = occupation(c, j);
      for (int q = 0; q < annihilate[j]; ++q) {
        if (n == 0) {
          inside = false;
          break;
        }
        coef *= std::sqrt(static_cast<double>(n));
        --n;
      }
      for (int p = 0; p < create[j] && inside; ++p) {
        ++n;
        coef *= std::sqrt(static_cast<double>(n));
      }
      if (n >= n_cut_) inside = false;
      occ[j] = n;
    }
    if (!inside) continue;
    sum += coef * (*this)(c, index(occ[0], occ[1], occ[2]));
  }
  return sum;
}

MomentMeans DensityMatrix::moments() const {
  using P = std::array<int, 3>;
  auto unit = [](int j, int k) {
    P v{0, 0, 0};
    v[j] = k;
    return v;
  };
  auto two = [](int i, int j) {
    P v{0, 0, 0};
    v[i] += 1;
    v[j] += 1;
    return v;
  };
  const P none{0, 0, 0};
  MomentMeans m;
  for (int j = 0; j < kWells; ++j) {
    m.slot(Mono::kA, j) = expectation(none, unit(j, 1));
    m.slot(Mono::kP, j) = expectation(unit(j, 1), none);
    m.slot(Mono::kAA, j) = expectation(none, unit(j, 2));
    m.slot(Mono::kPP, j) = expectation(unit(j, 2), none);
    m.slot(Mono::kN, j) = expectation(unit(j, 1), unit(j, 1));
    m.slot(Mono::kNN, j) = expectation(unit(j, 2), unit(j, 2));
  }
  for (int i = 0; i < kWells; ++i) {
    for (int j = i + 1; j < kWells; ++j) {
      const int k = pair_index(i, j);
      m.slot(Mono::kNiNj, k) = expectation(two(i, j), two(i, j));
      m.slot(Mono::kAiAj, k) = expectation(none, two(i, j));
      m.slot(Mono::kPiPj, k) = expectation(two(i, j), none);
    }
  }
  for (int i = 0; i < kWells; ++i)
    for (int j = 0; j < kWells; ++j)
      if (i != j) m.slot(Mono::kPiAj, ordered_pair_index(i, j)) = expectation(unit(i, 1), unit(j, 1));
  return m;
}

Liouvillian::Liouvillian(const SystemParams& params, int n_cut)
    : n_cut_(n_cut), dim_(n_cut * n_cut * n_cut), gamma_(params.gamma) {
  params.validate();
  if (n_cut < 2) throw ConfigError("oracle n_cut must be >= 2");
  auto idx = [n_cut](int a, int b, int c) { return (a * n_cut + b) * n_cut + c; };
  const cplx i1(0.0, 1.0);
  const double jt = params.j_tunnel;
  const cplx eps = params.epsilon;
  const int s1 = n_cut * n_cut - n_cut;  // one boson from well 2 to well 1
  const int s3 = n_cut - 1;              // one boson from well 3 to well 2
  offsets_ = {-s1, -s3, -n_cut, 0, n_cut, s3, s1};
  std::sort(offsets_.begin(), offsets_.end());
  offsets_.erase(std::unique(offsets_.begin(), offsets_.end()), offsets_.end());
  const auto nd = offsets_.size();
  h_re_.assign(nd * dim_, 0.0);
  h_im_.assign(nd * dim_, 0.0);
  auto put = [&](int r, int c, cplx v) {
    const auto o = std::find(offsets_.begin(), offsets_.end(), c - r) - offsets_.begin();
    h_re_[o * dim_ + r] += v.real();
    h_im_[o * dim_ + r] += v.imag();
  };
  jump1_.assign(dim_, 0.0);
  jump3_.assign(dim_, 0.0);
  for (int n1 = 0; n1 < n_cut; ++n1) {
    for (int n2 = 0; n2 < n_cut; ++n2) {
      for (int n3 = 0; n3 < n_cut; ++n3) {
        const int r = idx(n1, n2, n3);
        const double diag = params.chi * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0) + n3 * (n3 - 1.0));
        put(r, r, cplx(diag, -params.gamma * (n1 + n3)));
        // -J a_m^dagger a2 and its adjoint, m = 1, 3
        if (n1 > 0 && n2 + 1 < n_cut) put(r, idx(n1 - 1, n2 + 1, n3), -jt * std::sqrt(n1 * (n2 + 1.0)));
        if (n3 > 0 && n2 + 1 < n_cut) put(r, idx(n1, n2 + 1, n3 - 1), -jt * std::sqrt(n3 * (n2 + 1.0)));
        if (n2 > 0 && n1 + 1 < n_cut) put(r, idx(n1 + 1, n2 - 1, n3), -jt * std::sqrt(n2 * (n1 + 1.0)));
        if (n2 > 0 && n3 + 1 < n_cut) put(r, idx(n1, n2 - 1, n3 + 1), -jt * std::sqrt(n2 * (n3 + 1.0)));
        // i (eps a2^dagger - eps* a2)
        if (n2 > 0) put(r, idx(n1, n2 - 1, n3), i1 * eps * std::sqrt(static_cast<double>(n2)));
        if (n2 + 1 < n_cut) put(r, idx(n1, n2 + 1, n3), -i1 * std::conj(eps) * std::sqrt(n2 + 1.0));
        if (n1 + 1 < n_cut) jump1_[r] = std::sqrt(n1 + 1.0);
        if (n3 + 1 < n_cut) jump3_[r] = std::sqrt(n3 + 1.0);
      }
    }
  }
}

cplx Liouvillian::h_eff(int r, int c) const {
  const auto it = std::find(offsets_.begin(), offsets_.end(), c - r);
  if (it == offsets_.end()) return 0.0;
  const auto o = it - offsets_.begin();
  return {h_re_[o * dim_ + r], h_im_[o * dim_ + r]};
}

namespace {

constexpr int kColBlock = 128;
constexpr int kRowBlock = 64;
constexpr int kMirrorTile = 32;

}  // namespace

void Liouvillian::apply(const DensityMatrix& rho, DensityMatrix& out, int threads) const {
  // Complex arithmetic is spelled out on interleaved doubles: std::complex
  // products go through the NaN-recovering library call and do not vectorise.
  const int d = dim_;
  const int nd = static_cast<int>(offsets_.size());
  const auto* in = reinterpret_cast<const double*>(rho.data().data());
  auto* o = reinterpret_cast<double*>(out.data().data());
  const int nthreads = threads == 1 ? 1 : (threads > 0 ? threads : omp_get_max_threads());
  const std::ptrdiff_t row = 2 * static_cast<std::ptrdiff_t>(d);
  const int s1 = n_cut_ * n_cut_;
  const double g2 = 2.0 * gamma_;
  const int col_blocks = (d + kColBlock - 1) / kColBlock;
  const int row_blocks = (d + kRowBlock - 1) / kRowBlock;

#pragma omp parallel for collapse(2) schedule(static) num_threads(nthreads)
  for (int cb = 0; cb < col_blocks; ++cb) {
    for (int rb = 0; rb < row_blocks; ++rb) {
      const int c0 = cb * kColBlock, c1 = std::min(d, c0 + kColBlock);
      const int r1 = std::min({d, (rb + 1) * kRowBlock, c1});
      alignas(64) double acc[2 * kColBlock];
      // upper triangle only; the rest is filled by Hermitian symmetry below
      for (int r = rb * kRowBlock; r < r1; ++r) {
        const int cs = std::max(c0, r);
        std::fill(acc, acc + 2 * (c1 - c0), 0.0);
        double* a = acc - 2 * c0;
        for (int k = 0; k < nd; ++k) {
          const int off = offsets_[k];
          // -i H_eff(r, r + off) rho(r + off, c); -i (x + iy) = y - ix
          const double hr = h_im_[k * d + r], hi = -h_re_[k * d + r];
          const int rr = r + off;
          if ((hr != 0.0 || hi != 0.0) && rr >= 0 && rr < d) {
            const double* src = in + rr * row;
#pragma omp simd
            for (int c = cs; c < c1; ++c) {
              const double sr = src[2 * c], si = src[2 * c + 1];
              a[2 * c] += hr * sr - hi * si;
              a[2 * c + 1] += hr * si + hi * sr;
            }
          }
          // +i rho(r, c + off) conj(H_eff(c, c + off)); i conj(x + iy) = y + ix
          const double* hre = h_re_.data() + k * d;
          const double* him = h_im_.data() + k * d;
          const double* src = in + r * row + 2 * off;
          const int lo = std::max(cs, -off), hi_c = std::min(c1, d - off);
#pragma omp simd
          for (int c = lo; c < hi_c; ++c) {
            const double xr = him[c], xi = hre[c];
            const double sr = src[2 * c], si = src[2 * c + 1];
            a[2 * c] += xr * sr - xi * si;
            a[2 * c + 1] += xr * si + xi * sr;
          }
        }
        // 2 gamma a_m rho a_m^dagger
        if (jump1_[r] != 0.0) {
          const double f = g2 * jump1_[r];
          const double* src = in + (r + s1) * row + 2 * s1;
          const int hi_c = std::min(c1, d - s1);
#pragma omp simd
          for (int c = cs; c < hi_c; ++c) {
            a[2 * c] += (f * jump1_[c]) * src[2 * c];
            a[2 * c + 1] += (f * jump1_[c]) * src[2 * c + 1];
          }
        }
        if (jump3_[r] != 0.0) {
          const double f = g2 * jump3_[r];
          const double* src = in + (r + 1) * row + 2;
          const int hi_c = std::min(c1, d - 1);
#pragma omp simd
          for (int c = cs; c < hi_c; ++c) {
            a[2 * c] += (f * jump3_[c]) * src[2 * c];
            a[2 * c + 1] += (f * jump3_[c]) * src[2 * c + 1];
          }
        }
        std::copy(acc + 2 * (cs - c0), acc + 2 * (c1 - c0), o + r * row + 2 * cs);
      }
    }
  }

  const int tiles = (d + kMirrorTile - 1) / kMirrorTile;
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (int tr = 0; tr < tiles; ++tr) {
    for (int tc = 0; tc <= tr; ++tc) {
      const int r0 = tr * kMirrorTile, r1 = std::min(d, r0 + kMirrorTile);
      const int c0 = tc * kMirrorTile, c1 = std::min(d, c0 + kMirrorTile);
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < std::min(c1, r); ++c) {
          o[r * row + 2 * c] = o[c * row + 2 * r];
          o[r * row + 2 * c + 1] = -o[c * row + 2 * r + 1];
        }
      }
    }
  }
}

OracleRun evolve_master_equation(const SystemParams& params, const FockConfig& cfg) {
  cfg.validate();
  const Liouvillian L(params, cfg.n_cut);
  DensityMatrix rho = DensityMatrix::vacuum(cfg.n_cut);
  DensityMatrix acc(cfg.n_cut), tmp(cfg.n_cut), k(cfg.n_cut);
  const std::size_t size = 2 * rho.data().size();
  const double dt = cfg.dt;

  OracleRun run;
  const auto n_steps = std::llround(cfg.t_final / dt);
  std::size_t next = 0;
  for (long long n = 1; n <= n_steps; ++n) {
    auto* y = reinterpret_cast<double*>(rho.data().data());
    auto* a = reinterpret_cast<double*>(acc.data().data());
    auto* t = reinterpret_cast<double*>(tmp.data().data());
    const auto* kd = reinterpret_cast<const double*>(k.data().data());
    // classic RK4: acc collects y + dt/6 (k1 + 2 k2 + 2 k3 + k4)
    L.apply(rho, k, cfg.threads);
    for (std::size_t i = 0; i < size; ++i) {
      a[i] = y[i] + (dt / 6.0) * kd[i];
      t[i] = y[i] + (dt / 2.0) * kd[i];
    }
    L.apply(tmp, k, cfg.threads);
    for (std::size_t i = 0; i < size; ++i) {
      a[i] += (dt / 3.0) * kd[i];
      t[i] = y[i] + (dt / 2.0) * kd[i];
    }
    L.apply(tmp, k, cfg.threads);
    for (std::size_t i = 0; i < size; ++i) {
      a[i] += (dt / 3.0) * kd[i];
      t[i] = y[i] + dt * kd[i];
    }
    L.apply(tmp, k, cfg.threads);
    for (std::size_t i = 0; i < size; ++i) y[i] = a[i] + (dt / 6.0) * kd[i];

    const double tail = rho.tail_population();
    run.max_tail_population = std::max(run.max_tail_population, tail);
    const double time = static_cast<double>(n) * dt;
    if (tail > cfg.tail_threshold) {
      std::ostringstream msg;
      msg << "top Fock level holds population " << tail << " at Jt=" << time << " (n_cut=" << cfg.n_cut
          << ", threshold " << cfg.tail_threshold << ")";
      throw TruncationOverflow(msg.str());
    }
    if (next < cfg.sample_times.size() && std::abs(time - cfg.sample_times[next]) < 0.5 * dt) {
      run.sample_times.push_back(cfg.sample_times[next]);
      run.moments.push_back(rho.moments());
      run.max_trace_error = std::max(run.max_trace_error, std::abs(rho.trace() - 1.0));
      run.max_hermiticity_error = std::max(run.max_hermiticity_error, rho.hermiticity_error());
      ++next;
    }
  }
  run.min_eigenvalue = rho.min_eigenvalue();
  run.final_state = std::move(rho);
  return run;
}

}  // namespace trimer::oracle
