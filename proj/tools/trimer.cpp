#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "trimer/commands.hpp"
#include "trimer/error.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kMismatch = 4 };

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> n_traj;
  std::string threads = "auto";
  bool override_guard = false;
};

int parse_threads(const std::string& s) {
  if (s == "auto") return 0;
  try {
    std::size_t used = 0;
    const int n = std::stoi(s, &used);
    if (used == s.size() && n > 0) return n;
  } catch (const std::exception&) {
  }
  throw trimer::ConfigError("--threads takes a positive integer or 'auto'");
}

trimer::RunConfig load(const Flags& f) {
  trimer::RunConfig cfg = trimer::load_config(f.config);
  if (!f.out.empty()) cfg.outputs_dir = f.out;
  if (f.seed) cfg.integration.master_seed = *f.seed;
  if (f.n_traj) cfg.integration.n_traj = *f.n_traj;
  if (f.override_guard) cfg.spectra.override_gaussian_guard = true;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory (overrides outputs_dir)");
  sub->add_option("--seed", f.seed, "master seed override");
  sub->add_option("--n-traj", f.n_traj, "trajectory count override");
  sub->add_option("--threads", f.threads, "worker threads, or auto");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-P ensembles, master-equation oracle and output spectra for a driven dissipative trimer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", trimer::kCodeVersion);

  Flags f;
  auto* simulate = app.add_subcommand("simulate", "run the stochastic ensemble and analyse the steady window");
  auto* spectra = app.add_subcommand("spectra", "linearised output entanglement spectra");
  auto* oracle = app.add_subcommand("oracle", "compare positive-P against the truncated master equation");
  auto* steady = app.add_subcommand("steady", "noiseless fixed point and its linearised statistics");
  for (auto* sub : {simulate, spectra, oracle, steady}) add_common(sub, f);
  spectra->add_flag("--override-gaussian-guard", f.override_guard,
                    "compute spectra even when 2 chi N / gamma >= 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    trimer::CommandOptions opts;
    opts.threads = parse_threads(f.threads);
    opts.log = &std::cerr;
    const trimer::RunConfig cfg = load(f);
    if (simulate->parsed()) {
      trimer::cmd_simulate(cfg, opts);
    } else if (spectra->parsed()) {
      trimer::cmd_spectra(cfg, opts);
    } else if (oracle->parsed()) {
      const auto r = trimer::cmd_oracle(cfg, opts);
      if (!r.checks_pass || !r.all_agree) {
        std::cerr << "oracle validation mismatch, see " << (cfg.outputs_dir / "oracle_report.json").string() << '\n';
        return kMismatch;
      }
    } else if (steady->parsed()) {
      trimer::cmd_steady(cfg, opts);
    }
  } catch (const trimer::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const trimer::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
