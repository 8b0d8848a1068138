#pragma once

#include <functional>
#include <vector>

#include "trimer/accumulator.hpp"

namespace trimer {

// A nominally real observable. imag is the imaginary residue of the
// estimator, kept as a sampling diagnostic.
struct Estimate {
  double value = 0.0;
  double err = 0.0;  // one standard error
  double imag = 0.0;
  bool has_error = false;  // false for exact (trace) moments or < 2 batches

  // |Im| above 1% of |Re|.
  bool noisy_imaginary() const;
};

// Closed-form observables on a set of moments. Wells are 0-based. Angles in
// radians. These throw nothing; the accumulator overloads below add the
// consistency checks that need error bars.
namespace moments {

cplx population(const MomentMeans& m, int j);
cplx g2(const MomentMeans& m, int i, int j);
cplx number_variance(const MomentMeans& m, int j);
cplx fano_number_difference(const MomentMeans& m);  // wells 1 and 3
cplx quadrature_variance(const MomentMeans& m, int j, double theta);
cplx quadrature_covariance(const MomentMeans& m, int i, int j, double theta);
// V(X1 + X3) + V(Y1 - Y3)
cplx duan_simon(const MomentMeans& m, double theta);
// V_inf(X_i) V_inf(Y_i) with well j as the conditioning mode
cplx reid_epr(const MomentMeans& m, int i, int j, double theta);

}  // namespace moments

using MomentFunction = std::function<cplx(const MomentMeans&)>;

// Evaluates f on the pooled means; the error bar is the jackknife over
// trajectory batches.
Estimate estimate(const MomentAccumulator& acc, const MomentFunction& f);

// Precomputed full and leave-one-batch-out means, reused across many
// observables. Over a window of sample times an observable is evaluated at
// each time and averaged; replica b leaves batch b out at every time.
struct JackknifeMeans {
  std::vector<MomentMeans> full;                   // one per sample time
  std::vector<std::vector<MomentMeans>> replicas;  // [batch][sample time]

  explicit JackknifeMeans(const MomentAccumulator& acc);  // throws EmptyAccumulator
  explicit JackknifeMeans(const std::vector<const MomentAccumulator*>& window);
  // Exact moments, no error bars.
  explicit JackknifeMeans(const MomentMeans& exact) : full{exact} {}

  Estimate operator()(const MomentFunction& f) const;
  // Moments averaged over the sample times.
  MomentMeans averaged() const;
};

Estimate population(const JackknifeMeans& jm, int j);
Estimate g2(const JackknifeMeans& jm, int i, int j);  // throws ZeroPopulation
Estimate fano_number_difference(const JackknifeMeans& jm);  // throws ZeroPopulation
Estimate quadrature_variance(const JackknifeMeans& jm, int j, double theta);
Estimate duan_simon(const JackknifeMeans& jm, double theta);
Estimate reid_epr(const JackknifeMeans& jm, int i, int j, double theta);  // throws DegenerateInference

// Angles in degrees, [start, stop) with the given step.
struct AngleGrid {
  double start_deg = 0.0;
  double stop_deg = 180.0;
  double step_deg = 1.0;

  void validate() const;  // throws ConfigError
  std::vector<double> angles_deg() const;
};

struct ScanMinimum {
  double theta_deg = 0.0;
  Estimate value;
  bool flat = false;  // the curve is constant within its error bars
};

struct AngleScan {
  std::vector<double> theta_deg;
  std::vector<Estimate> vx1, vx2, vx3;
  std::vector<Estimate> vy1;  // V(Y1) = V(X1 at theta + 90)
  std::vector<Estimate> ds13;
  std::vector<Estimate> epr13, epr31;

  ScanMinimum min_vx1, min_vx2, min_vx3, min_ds13, min_epr13, min_epr31;
};

AngleScan scan_angles(const JackknifeMeans& jm, const AngleGrid& grid);

ScanMinimum find_minimum(const std::vector<double>& theta_deg, const std::vector<Estimate>& curve);

// Number statistics at one sample time.
struct CorrelationReport {
  double t = 0.0;
  std::int64_t count = 0;
  Estimate n[3];
  Estimate g2[3][3];
  Estimate fano13;
};

CorrelationReport correlation_report(const JackknifeMeans& jm, double t, std::int64_t count);

}  // namespace trimer
