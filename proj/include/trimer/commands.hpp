#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "trimer/config.hpp"

// The four batch subcommands. Each writes its artifacts under
// cfg.outputs_dir and returns what it wrote for programmatic use.
namespace trimer {

inline constexpr const char* kCodeVersion = "0.1.0";

struct CommandOptions {
  int threads = 0;              // <= 0: OpenMP default
  std::ostream* log = nullptr;  // progress lines, if set
};

struct SteadyAnalysis {
  double t_start = 0.0, t_end = 0.0;
  std::int64_t count = 0;  // samples summed over the window
  CorrelationReport numbers;
  AngleScan scan;
  Vec6 steady_means{};
};

struct SimulateResult {
  EnsembleRunReport run;
  SteadyAnalysis steady;
};

// Time-averages every intra-well observable over the steady window.
SteadyAnalysis analyse_steady_window(const RunConfig& cfg, const EnsembleRunReport& run);

SimulateResult cmd_simulate(const RunConfig& cfg, const CommandOptions& opts = {});
void write_simulation_outputs(const RunConfig& cfg, const SimulateResult& result);

struct SpectraResult {
  spectra::SpectralModel model;
  spectra::EntanglementSpectra spectra;
};

// Steady means as configured; kSimulation reads steady_report.json from
// the output directory.
Vec6 resolve_steady_means(const RunConfig& cfg);
SpectraResult cmd_spectra(const RunConfig& cfg, const CommandOptions& opts = {});

struct OracleComparison {
  double t = 0.0;
  std::string observable;
  double oracle = 0.0;
  double truncation_diff = 0.0;  // |value(n_cut) - value(n_cut_check)|
  Estimate positive_p;
  bool agree = false;
};

struct OracleResult {
  oracle::OracleRun run;
  oracle::OracleRun check_run;
  EnsembleRunReport ensemble;
  std::vector<OracleComparison> comparisons;
  double max_truncation_diff = 0.0;
  bool checks_pass = false;  // trace, Hermiticity, truncation, positivity
  bool all_agree = false;
  nlohmann::json report;
};

// Oracle against positive-P. opts.threads also sets the oracle kernel threads.
OracleResult cmd_oracle(const RunConfig& cfg, const CommandOptions& opts = {});

// Noiseless fixed point and its linearised intra-well statistics.
nlohmann::json cmd_steady(const RunConfig& cfg, const CommandOptions& opts = {});

// Shortest round-trip decimal, independent of the global locale.
std::string format_double(double x);

}  // namespace trimer
