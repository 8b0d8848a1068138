#pragma once

#include <Eigen/Core>
#include <vector>

#include "trimer/accumulator.hpp"
#include "trimer/model.hpp"

// Linearised fluctuations about the steady state and the output spectra of
// the two damped wells.
namespace trimer::spectra {

using Mat6 = Eigen::Matrix<cplx, 6, 6>;

enum class DriftForm {
  kJacobian,   // minus the Jacobian of the drift: 4 i chi N on the diagonal
  kPublished,  // the printed matrix, 2 i chi N on the diagonal
};

struct SpectralOptions {
  DriftForm form = DriftForm::kJacobian;
  bool override_gaussian_guard = false;
};

struct SpectralModel {
  SystemParams params;
  Vec6 steady{};  // (a1, a1*, a2, a2*, a3, a3*)
  Mat6 a;         // drift matrix of the fluctuations, d dx = -a dx dt + noise
  Mat6 d;         // diffusion matrix (diagonal)
  DriftForm form = DriftForm::kJacobian;
};

// Steady amplitudes from ensemble moments: a_j = (<a_j> + conj <a_j^+>) / 2.
Vec6 steady_means_from_moments(const MomentMeans& m);
// Steady amplitudes from the noiseless fixed point.
Vec6 steady_means_from_fixed_point(const SystemParams& params);

// Largest anharmonic shift 2 chi N_j against the damping: the Gaussian
// output treatment is refused when 2 chi max N_j >= gamma.
double anharmonicity_ratio(const SystemParams& params, const Vec6& steady);

// Throws GaussianGuardViolation (unless overridden) and UnstableDriftMatrix.
SpectralModel build_spectral_model(const SystemParams& params, const Vec6& steady,
                                   const SpectralOptions& opts = {});

Eigen::Matrix<cplx, 6, 1> drift_eigenvalues(const Mat6& a);

// S(w) = (A + i w)^-1 D (A^T - i w)^-1. Throws SingularAtFrequency.
Mat6 spectral_matrix(const SpectralModel& model, double omega);

// Output spectra of the rotated quadratures X_j = a_j e^{-i theta} + a_j^+ e^{i theta}
// of wells 1 and 3, Y_j at theta + 90 degrees. Vacuum-normalised: 1 at chi = 0.
struct OutputQuadratures {
  double x11 = 0.0, x13 = 0.0, x33 = 0.0;
  double y11 = 0.0, y13 = 0.0, y33 = 0.0;
  double max_imag = 0.0;  // largest imaginary residue before taking real parts

  double duan_simon() const;  // V(X1 + X3) + V(Y1 - Y3)
  double reid_epr() const;    // inferred product, well 1 from well 3
};

OutputQuadratures output_quadrature_spectra(const SpectralModel& model, double omega, double theta);

struct OmegaGrid {
  double lo = -6.0;
  double hi = 6.0;
  int n = 512;

  void validate() const;  // throws ConfigError
  std::vector<double> points() const;
};

// Contiguous stretch of the grid below a classical bound, around the minimum.
struct ViolationBand {
  bool violated = false;
  double min_value = 0.0;
  double omega_at_min = 0.0;
  double lo = 0.0, hi = 0.0;  // outermost grid points still below the bound
  bool finite = false;        // the band ends inside the grid on both sides
};

ViolationBand violation_band(const std::vector<double>& omega, const std::vector<double>& curve, double bound);

struct EntanglementSpectra {
  double theta = 0.0;
  std::vector<double> omega;
  std::vector<OutputQuadratures> quadratures;
  std::vector<double> ds, epr;
  ViolationBand ds_band, epr_band;
  double max_imag = 0.0;
};

EntanglementSpectra output_entanglement_spectra(const SpectralModel& model, const OmegaGrid& grid, double theta);

// Stationary covariance C of the fluctuations: A C + C A^T = D.
Mat6 lyapunov_covariance(const SpectralModel& model);
// (1 / 2 pi) * integral of S(w) over the real line, by Gauss-Legendre panels
// on w = scale * tan(phi).
Mat6 integrated_spectrum(const SpectralModel& model, int panels = 64, int order = 16, double scale = 1.0);

// Nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace trimer::spectra
