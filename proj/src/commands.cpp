#include "trimer/commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "trimer/error.hpp"

namespace trimer {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void say(const CommandOptions& opts, const std::string& line) {
  if (opts.log) *opts.log << line << '\n' << std::flush;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t k = 0; k < header.size(); ++k) text_ += (k ? "," : "") + header[k];
    text_ += '\n';
  }
  CsvWriter& cell(double x) {
    if (!first_) text_ += ',';
    text_ += format_double(x);
    first_ = false;
    return *this;
  }
  CsvWriter& cell(std::int64_t x) {
    if (!first_) text_ += ',';
    text_ += std::to_string(x);
    first_ = false;
    return *this;
  }
  CsvWriter& cell(const Estimate& e) { return cell(e.value).cell(e.has_error ? e.err : 0.0); }
  void end_row() {
    text_ += '\n';
    first_ = true;
  }
  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text_;
  }

 private:
  std::string text_;
  bool first_ = true;
};

void save_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json estimate_json(const Estimate& e) {
  json j = {{"value", e.value}, {"imag", e.imag}};
  j["err"] = e.has_error ? json(e.err) : json(nullptr);
  return j;
}

json minimum_json(const ScanMinimum& m) {
  return {{"theta_deg", m.theta_deg}, {"value", m.value.value}, {"err", m.value.err}, {"flat", m.flat}};
}

// Estimate that is NaN when a population is consistent with zero.
template <typename F>
Estimate guarded(F&& f) {
  try {
    return f();
  } catch (const ZeroPopulation&) {
    return {std::nan(""), std::nan(""), 0.0, false};
  } catch (const DegenerateInference&) {
    return {std::nan(""), std::nan(""), 0.0, false};
  }
}

}  // namespace

SteadyAnalysis analyse_steady_window(const RunConfig& cfg, const EnsembleRunReport& run) {
  SteadyAnalysis s;
  s.t_start = cfg.window_start;
  s.t_end = cfg.window_end;
  std::vector<const MomentAccumulator*> slices;
  for (int k : run.window(cfg.window_start, cfg.window_end)) {
    slices.push_back(&run.samples[k]);
    s.count += run.samples[k].count();
  }
  if (s.count == 0) throw EmptyAccumulator("no samples inside the steady window");
  const JackknifeMeans jm(slices);
  s.numbers = correlation_report(jm, 0.5 * (cfg.window_start + cfg.window_end), s.count);
  s.scan = scan_angles(jm, cfg.theta_grid);
  s.steady_means = spectra::steady_means_from_moments(jm.averaged());
  return s;
}

SimulateResult cmd_simulate(const RunConfig& cfg, const CommandOptions& opts) {
  cfg.validate();
  std::ostringstream msg;
  msg << "simulate " << cfg.run_label << ": " << cfg.integration.n_traj << " trajectories to Jt="
      << cfg.integration.t_final;
  say(opts, msg.str());
  SimulateResult r;
  r.run = run_ensemble(cfg.params, cfg.integration, opts.threads);
  say(opts, "  diverged: " + std::to_string(r.run.n_diverged));
  r.steady = analyse_steady_window(cfg, r.run);
  write_simulation_outputs(cfg, r);
  return r;
}

void write_simulation_outputs(const RunConfig& cfg, const SimulateResult& r) {
  const auto& dir = cfg.outputs_dir;
  ensure_dir(dir);

  CsvWriter pops({"t", "N1", "N1_err", "N2", "N2_err", "N3", "N3_err", "n_alive"});
  CsvWriter nums({"t", "F13", "F13_err", "g2_13", "g2_13_err"});
  for (std::size_t s = 0; s < r.run.samples.size(); ++s) {
    const auto& acc = r.run.samples[s];
    const double t = r.run.sample_times[s];
    pops.cell(t);
    nums.cell(t);
    if (acc.empty()) {
      for (int k = 0; k < 6; ++k) pops.cell(std::nan(""));
      for (int k = 0; k < 4; ++k) nums.cell(std::nan(""));
    } else {
      const JackknifeMeans jm(acc);
      for (int j = 0; j < kWells; ++j) pops.cell(population(jm, j));
      nums.cell(guarded([&] { return fano_number_difference(jm); }));
      nums.cell(guarded([&] { return g2(jm, 0, 2); }));
    }
    pops.cell(acc.count());
    pops.end_row();
    nums.end_row();
  }
  pops.save(dir / "populations.csv");
  nums.save(dir / "number_stats.csv");

  const auto& sc = r.steady.scan;
  CsvWriter angles({"theta_deg", "VX1", "VX1_err", "VX2", "VX2_err", "DS13", "DS13_err", "EPR13", "EPR13_err", "VX3",
                    "VX3_err", "VY1", "VY1_err", "EPR31", "EPR31_err"});
  for (std::size_t k = 0; k < sc.theta_deg.size(); ++k) {
    angles.cell(sc.theta_deg[k]).cell(sc.vx1[k]).cell(sc.vx2[k]).cell(sc.ds13[k]).cell(sc.epr13[k]);
    angles.cell(sc.vx3[k]).cell(sc.vy1[k]).cell(sc.epr31[k]);
    angles.end_row();
  }
  angles.save(dir / "angle_scan.csv");

  const auto& n = r.steady.numbers;
  json rep;
  rep["run_label"] = cfg.run_label;
  rep["steady_window"] = {r.steady.t_start, r.steady.t_end};
  rep["window_samples"] = r.steady.count;
  rep["populations"] = json::array();
  for (int j = 0; j < kWells; ++j) rep["populations"].push_back(estimate_json(n.n[j]));
  rep["g2"] = json::array();
  for (int i = 0; i < kWells; ++i) {
    json row = json::array();
    for (int j = 0; j < kWells; ++j) row.push_back(estimate_json(n.g2[i][j]));
    rep["g2"].push_back(row);
  }
  rep["fano13"] = estimate_json(n.fano13);
  rep["minima"] = {{"VX1", minimum_json(sc.min_vx1)},   {"VX2", minimum_json(sc.min_vx2)},
                   {"VX3", minimum_json(sc.min_vx3)},   {"DS13", minimum_json(sc.min_ds13)},
                   {"EPR13", minimum_json(sc.min_epr13)}, {"EPR31", minimum_json(sc.min_epr31)}};
  rep["steady_means"] = json::array();
  for (int j = 0; j < kWells; ++j) rep["steady_means"].push_back(complex_json(r.steady.steady_means[2 * j]));
  bool noisy = n.fano13.noisy_imaginary();
  for (int j = 0; j < kWells; ++j) noisy = noisy || n.n[j].noisy_imaginary();
  rep["imaginary_residue_warning"] = noisy;
  rep["n_diverged"] = r.run.n_diverged;
  save_json(dir / "steady_report.json", rep);

  json meta;
  meta["run_label"] = cfg.run_label;
  meta["code_version"] = kCodeVersion;
  meta["master_seed"] = cfg.integration.master_seed;
  meta["dt"] = cfg.integration.dt;
  meta["t_final"] = cfg.integration.t_final;
  meta["n_traj"] = r.run.n_traj;
  meta["n_completed"] = r.run.n_completed;
  meta["n_diverged"] = r.run.n_diverged;
  meta["first_divergence_time"] = r.run.first_divergence_time ? json(*r.run.first_divergence_time) : json(nullptr);
  meta["config"] = to_json(cfg);
  save_json(dir / "run_meta.json", meta);
}

Vec6 resolve_steady_means(const RunConfig& cfg) {
  switch (cfg.spectra.means) {
    case MeansSource::kFixedPoint:
      return spectra::steady_means_from_fixed_point(cfg.params);
    case MeansSource::kExplicit: {
      Vec6 s;
      for (int j = 0; j < kWells; ++j) {
        s[2 * j] = cfg.spectra.explicit_means[j];
        s[2 * j + 1] = std::conj(cfg.spectra.explicit_means[j]);
      }
      return s;
    }
    case MeansSource::kSimulation:
      break;
  }
  const auto path = cfg.outputs_dir / "steady_report.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("steady means come from a simulate run, but " + path.string() + " is missing");
  Vec6 s;
  try {
    const json rep = json::parse(in);
    const json& m = rep.at("steady_means");
    for (int j = 0; j < kWells; ++j) {
      const cplx a(m.at(j).at(0).get<double>(), m.at(j).at(1).get<double>());
      s[2 * j] = a;
      s[2 * j + 1] = std::conj(a);
    }
  } catch (const json::exception& e) {
    throw ConfigError("cannot read steady means from " + path.string() + ": " + e.what());
  }
  return s;
}

SpectraResult cmd_spectra(const RunConfig& cfg, const CommandOptions& opts) {
  cfg.validate();
  SpectraResult r;
  const Vec6 means = resolve_steady_means(cfg);
  r.model = spectra::build_spectral_model(cfg.params, means,
                                          {cfg.spectra.form, cfg.spectra.override_gaussian_guard});
  r.spectra = spectra::output_entanglement_spectra(r.model, cfg.omega_grid, cfg.spectra.theta_deg * kDeg);
  say(opts, "spectra " + cfg.run_label + ": min DS_out " + format_double(r.spectra.ds_band.min_value) +
                ", min EPR_out " + format_double(r.spectra.epr_band.min_value));

  ensure_dir(cfg.outputs_dir);
  CsvWriter csv({"omega", "DS_out", "EPR_out", "S_out(X1X1)", "S_out(X1X3)", "S_out(Y1Y1)", "S_out(Y1Y3)"});
  for (std::size_t k = 0; k < r.spectra.omega.size(); ++k) {
    const auto& q = r.spectra.quadratures[k];
    csv.cell(r.spectra.omega[k]).cell(r.spectra.ds[k]).cell(r.spectra.epr[k]);
    csv.cell(q.x11).cell(q.x13).cell(q.y11).cell(q.y13);
    csv.end_row();
  }
  csv.save(cfg.outputs_dir / "spectra.csv");

  auto band_json = [](const spectra::ViolationBand& b) {
    return json{{"violated", b.violated}, {"min_value", b.min_value}, {"omega_at_min", b.omega_at_min},
                {"lo", b.lo},             {"hi", b.hi},               {"finite", b.finite}};
  };
  json rep;
  rep["run_label"] = cfg.run_label;
  rep["theta_deg"] = cfg.spectra.theta_deg;
  rep["drift_form"] = cfg.spectra.form == spectra::DriftForm::kJacobian ? "jacobian" : "published";
  rep["steady_means"] = json::array();
  for (int j = 0; j < kWells; ++j) rep["steady_means"].push_back(complex_json(means[2 * j]));
  rep["anharmonicity_ratio"] = spectra::anharmonicity_ratio(cfg.params, means);
  rep["drift_eigenvalues"] = json::array();
  for (const cplx ev : spectra::drift_eigenvalues(r.model.a)) rep["drift_eigenvalues"].push_back(complex_json(ev));
  rep["ds_band"] = band_json(r.spectra.ds_band);
  rep["epr_band"] = band_json(r.spectra.epr_band);
  rep["max_imaginary_residue"] = r.spectra.max_imag;
  save_json(cfg.outputs_dir / "spectra_report.json", rep);
  return r;
}

namespace {

// Sample stride (in steps) that lands on every requested time.
int stride_for(const std::vector<double>& times, double dt) {
  long long g = 0;
  for (double t : times) {
    const double k = t / dt;
    const auto n = std::llround(k);
    if (std::abs(k - static_cast<double>(n)) > 1e-6 || n <= 0)
      throw ConfigError("oracle sample times must be positive multiples of the integration dt");
    g = std::gcd(g, n);
  }
  return static_cast<int>(g);
}

struct Observable {
  std::string name;
  MomentFunction f;
};

std::vector<Observable> oracle_observables(const OracleConfig& o) {
  std::vector<Observable> obs;
  for (int j = 0; j < kWells; ++j)
    obs.push_back({"N" + std::to_string(j + 1), [j](const MomentMeans& m) { return moments::population(m, j); }});
  const std::pair<int, int> pairs[] = {{0, 0}, {1, 1}, {0, 1}, {0, 2}};
  for (const auto& [i, j] : pairs)
    obs.push_back({"g2_" + std::to_string(i + 1) + std::to_string(j + 1),
                   [i, j](const MomentMeans& m) { return moments::g2(m, i, j); }});
  obs.push_back({"F13", [](const MomentMeans& m) { return moments::fano_number_difference(m); }});
  for (int j = 0; j < kWells; ++j) {
    for (double th : o.theta_deg) {
      obs.push_back({"VX" + std::to_string(j + 1) + "(" + format_double(th) + ")",
                     [j, th](const MomentMeans& m) { return moments::quadrature_variance(m, j, th * kDeg); }});
    }
  }
  return obs;
}

}  // namespace

OracleResult cmd_oracle(const RunConfig& cfg, const CommandOptions& opts) {
  cfg.validate();
  OracleResult r;
  const auto& oc = cfg.oracle;

  oracle::FockConfig fock = oc.fock;
  fock.threads = opts.threads;
  say(opts, "oracle: master equation at n_cut=" + std::to_string(fock.n_cut));
  r.run = oracle::evolve_master_equation(cfg.params, fock);
  fock.n_cut = oc.n_cut_check;
  say(opts, "oracle: master equation at n_cut=" + std::to_string(fock.n_cut));
  r.check_run = oracle::evolve_master_equation(cfg.params, fock);

  IntegrationConfig ic = cfg.integration;
  ic.t_final = oc.fock.t_final;
  ic.sample_stride = stride_for(oc.fock.sample_times, ic.dt);
  say(opts, "oracle: positive-P ensemble of " + std::to_string(ic.n_traj));
  r.ensemble = run_ensemble(cfg.params, ic, opts.threads);

  const auto obs = oracle_observables(oc);
  json comps = json::array();
  bool agree_all = true;
  for (std::size_t s = 0; s < r.run.sample_times.size(); ++s) {
    const double t = r.run.sample_times[s];
    const int idx = static_cast<int>(std::llround(t / (ic.dt * ic.sample_stride))) - 1;
    const JackknifeMeans pp(r.ensemble.samples.at(idx));
    for (const auto& o : obs) {
      OracleComparison c;
      c.t = t;
      c.observable = o.name;
      c.oracle = o.f(r.run.moments[s]).real();
      c.truncation_diff = std::abs(c.oracle - o.f(r.check_run.moments[s]).real());
      c.positive_p = pp(o.f);
      r.max_truncation_diff = std::max(r.max_truncation_diff, c.truncation_diff);
      const double sigma = std::hypot(c.positive_p.err, c.truncation_diff);
      // an observable undefined on both sides (0/0 in the vacuum) agrees
      const bool both_undefined = std::isnan(c.oracle) && std::isnan(c.positive_p.value);
      c.agree = both_undefined || std::abs(c.positive_p.value - c.oracle) <= oc.n_sigma * sigma + oc.discretization_tolerance;
      agree_all = agree_all && c.agree;
      comps.push_back({{"t", t},
                       {"observable", c.observable},
                       {"oracle", c.oracle},
                       {"truncation_diff", c.truncation_diff},
                       {"positive_p", c.positive_p.value},
                       {"positive_p_err", c.positive_p.err},
                       {"agree", c.agree}});
      r.comparisons.push_back(c);
    }
  }

  const bool trace_ok = r.run.max_trace_error < 1e-8 && r.check_run.max_trace_error < 1e-8;
  const bool herm_ok = r.run.max_hermiticity_error < 1e-10 && r.check_run.max_hermiticity_error < 1e-10;
  const bool trunc_ok = r.max_truncation_diff <= oc.truncation_tolerance;
  const bool pos_ok = r.run.min_eigenvalue > -1e-8;
  r.checks_pass = trace_ok && herm_ok && trunc_ok && pos_ok;
  r.all_agree = agree_all;

  json& rep = r.report;
  rep["run_label"] = cfg.run_label;
  rep["params"] = to_json(cfg)["params"];
  rep["n_traj"] = r.ensemble.n_traj;
  rep["n_diverged"] = r.ensemble.n_diverged;
  rep["n_cut"] = oc.fock.n_cut;
  rep["n_cut_check"] = oc.n_cut_check;
  rep["checks"] = {{"max_trace_error", r.run.max_trace_error},
                   {"max_hermiticity_error", r.run.max_hermiticity_error},
                   {"max_tail_population", r.run.max_tail_population},
                   {"min_eigenvalue", r.run.min_eigenvalue},
                   {"max_truncation_diff", r.max_truncation_diff},
                   {"trace_ok", trace_ok},
                   {"hermiticity_ok", herm_ok},
                   {"truncation_ok", trunc_ok},
                   {"positivity_ok", pos_ok}};
  rep["n_sigma"] = oc.n_sigma;
  rep["discretization_tolerance"] = oc.discretization_tolerance;
  rep["comparisons"] = comps;
  std::size_t bad = 0;
  for (const auto& c : r.comparisons) bad += c.agree ? 0 : 1;
  rep["n_compared"] = r.comparisons.size();
  rep["n_disagree"] = bad;
  rep["all_agree"] = r.all_agree;
  rep["checks_pass"] = r.checks_pass;
  ensure_dir(cfg.outputs_dir);
  save_json(cfg.outputs_dir / "oracle_report.json", rep);
  say(opts, "oracle: " + std::to_string(bad) + " of " + std::to_string(r.comparisons.size()) + " comparisons outside " +
                format_double(oc.n_sigma) + " sigma");
  return r;
}

json cmd_steady(const RunConfig& cfg, const CommandOptions& opts) {
  cfg.validate();
  const Vec6 means = spectra::steady_means_from_fixed_point(cfg.params);
  spectra::SpectralOptions so;
  so.form = cfg.spectra.form;
  so.override_gaussian_guard = true;  // intra-well statistics only; reported below
  const auto model = spectra::build_spectral_model(cfg.params, means, so);
  const auto cov = spectra::lyapunov_covariance(model);

  json rep;
  rep["run_label"] = cfg.run_label;
  rep["amplitudes"] = json::array();
  rep["populations"] = json::array();
  for (int j = 0; j < kWells; ++j) {
    rep["amplitudes"].push_back(complex_json(means[2 * j]));
    rep["populations"].push_back(std::norm(means[2 * j]));
  }
  rep["anharmonicity_ratio"] = spectra::anharmonicity_ratio(cfg.params, means);
  rep["drift_eigenvalues"] = json::array();
  for (const cplx ev : spectra::drift_eigenvalues(model.a)) rep["drift_eigenvalues"].push_back(complex_json(ev));
  json minima;
  for (int j = 0; j < kWells; ++j) {
    double best = 1e300, arg = 0.0;
    for (double th : cfg.theta_grid.angles_deg()) {
      const cplx e = std::polar(1.0, -th * kDeg);
      const double v =
          (1.0 + e * e * cov(2 * j, 2 * j) + std::conj(e * e) * cov(2 * j + 1, 2 * j + 1) + 2.0 * cov(2 * j + 1, 2 * j))
              .real();
      if (v < best) {
        best = v;
        arg = th;
      }
    }
    minima["VX" + std::to_string(j + 1)] = {{"theta_deg", arg}, {"value", best}};
  }
  rep["linearised_minima"] = minima;
  ensure_dir(cfg.outputs_dir);
  save_json(cfg.outputs_dir / "steady_state.json", rep);
  say(opts, "steady " + cfg.run_label + ": written steady_state.json");
  return rep;
}

}  // namespace trimer
