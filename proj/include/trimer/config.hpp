#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "trimer/estimators.hpp"
#include "trimer/integrator.hpp"
#include "trimer/oracle.hpp"
#include "trimer/spectra.hpp"

namespace trimer {

enum class MeansSource {
  kSimulation,  // steady_report.json of a finished simulate run in the output dir
  kFixedPoint,  // noiseless fixed point
  kExplicit,    // given in the config
};

struct SpectraConfig {
  double theta_deg = 129.0;
  spectra::DriftForm form = spectra::DriftForm::kJacobian;
  MeansSource means = MeansSource::kSimulation;
  Wells explicit_means{};
  bool override_gaussian_guard = false;
};

struct OracleConfig {
  oracle::FockConfig fock{13, 0.02, 4.0, {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}};
  int n_cut_check = 15;  // second truncation for the convergence check
  double truncation_tolerance = 1e-6;
  std::vector<double> theta_deg{0.0, 45.0, 90.0, 135.0};
  double n_sigma = 3.0;
  // Absolute allowance for time-step error, added to n_sigma combined
  // sigmas. Zero unless both sides are noiseless.
  double discretization_tolerance = 0.0;
};

struct RunConfig {
  std::string run_label = "run";
  SystemParams params;
  IntegrationConfig integration;
  AngleGrid theta_grid;
  double window_start = 15.0;
  double window_end = 25.0;
  spectra::OmegaGrid omega_grid;
  SpectraConfig spectra;
  OracleConfig oracle;
  std::filesystem::path outputs_dir = "out";

  void validate() const;  // throws ConfigError
};

// Missing keys keep their defaults; unknown keys and malformed values throw
// ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace trimer
