#pragma once

#include <vector>

#include "trimer/accumulator.hpp"
#include "trimer/model.hpp"

// Brute-force master equation for the trimer in a truncated Fock space.
namespace trimer::oracle {

struct FockConfig {
  int n_cut = 10;        // Fock states 0 .. n_cut-1 per mode
  double dt = 0.01;      // RK4 step
  double t_final = 4.0;
  std::vector<double> sample_times{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  double tail_threshold = 1e-6;  // population allowed in the top Fock level
  int threads = 0;               // <= 0: OpenMP default; 1: serial kernel

  void validate() const;  // throws ConfigError
};

// Dense rho over |n1 n2 n3>, row-major, basis index (n1 * n_cut + n2) * n_cut + n3.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(int n_cut);
  static DensityMatrix vacuum(int n_cut);
  // Product of coherent states, normalised inside the truncated space.
  static DensityMatrix coherent(int n_cut, const Wells& alpha);
  // Product of Fock states.
  static DensityMatrix fock(int n_cut, int n1, int n2, int n3);

  int n_cut() const { return n_cut_; }
  int dim() const { return dim_; }
  cplx& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * dim_ + c]; }
  const cplx& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * dim_ + c]; }
  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  int index(int n1, int n2, int n3) const { return (n1 * n_cut_ + n2) * n_cut_ + n3; }
  int occupation(int r, int mode) const;

  cplx trace() const;
  double hermiticity_error() const;  // max |rho - rho^dagger|
  // Probability that any mode sits in its top Fock level.
  double tail_population() const;
  double min_eigenvalue() const;

  // Normally ordered monomial prod_j a_j^dagger^{p_j} a_j^{q_j}.
  cplx expectation(const std::array<int, 3>& create, const std::array<int, 3>& annihilate) const;
  // Every moment the estimators read, as exact traces.
  MomentMeans moments() const;

 private:
  int n_cut_ = 0;
  int dim_ = 0;
  std::vector<cplx> data_;
};

// Right-hand side of the Lindblad equation,
//   d rho / dt = -i H_eff rho + i rho H_eff^dagger + 2 gamma sum_{m=1,3} a_m rho a_m^dagger,
// with H_eff = H - i gamma (n1 + n3). In the product basis H_eff is banded:
// every entry sits on one of seven fixed diagonals.
class Liouvillian {
 public:
  Liouvillian(const SystemParams& params, int n_cut);
  // out = L(rho). threads == 1 runs serially; any other value splits the
  // output tiles over OpenMP threads. Each output element is computed the
  // same way either way, so the results are identical.
  void apply(const DensityMatrix& rho, DensityMatrix& out, int threads = 0) const;
  int dim() const { return dim_; }
  const std::vector<int>& offsets() const { return offsets_; }
  cplx h_eff(int r, int c) const;

 private:
  int n_cut_;
  int dim_;
  double gamma_;
  std::vector<int> offsets_;           // column minus row of each diagonal
  std::vector<double> h_re_, h_im_;    // [diagonal][row]
  std::vector<double> jump1_, jump3_;  // sqrt(n_m + 1), zero at the top level
};

struct OracleRun {
  std::vector<double> sample_times;
  std::vector<MomentMeans> moments;  // at each sample time
  DensityMatrix final_state;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double max_tail_population = 0.0;
  double min_eigenvalue = 0.0;  // of final_state
};

// RK4 from the vacuum. Throws TruncationOverflow as soon as the tail
// population exceeds cfg.tail_threshold.
OracleRun evolve_master_equation(const SystemParams& params, const FockConfig& cfg);

}  // namespace trimer::oracle
