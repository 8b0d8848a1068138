#include "trimer/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "trimer/error.hpp"

namespace trimer {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

cplx read_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where + " must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

spectra::DriftForm parse_form(const std::string& s) {
  if (s == "jacobian") return spectra::DriftForm::kJacobian;
  if (s == "published") return spectra::DriftForm::kPublished;
  throw ConfigError("spectra.drift_form must be \"jacobian\" or \"published\"");
}

std::string form_name(spectra::DriftForm f) { return f == spectra::DriftForm::kJacobian ? "jacobian" : "published"; }

void parse_params(const json& j, SystemParams& p) {
  require_object(j, "params");
  reject_unknown(j, {"chi", "J", "gamma", "epsilon"}, "params");
  read(j, "chi", p.chi);
  read(j, "J", p.j_tunnel);
  read(j, "gamma", p.gamma);
  if (j.contains("epsilon")) p.epsilon = read_complex(j.at("epsilon"), "params.epsilon");
}

void parse_integration(const json& j, IntegrationConfig& c) {
  require_object(j, "integration");
  reject_unknown(j,
                 {"dt", "t_final", "n_traj", "master_seed", "sample_stride", "divergence_threshold", "n_batches"},
                 "integration");
  read(j, "dt", c.dt);
  read(j, "t_final", c.t_final);
  read(j, "n_traj", c.n_traj);
  read(j, "master_seed", c.master_seed);
  read(j, "sample_stride", c.sample_stride);
  read(j, "divergence_threshold", c.divergence_threshold);
  read(j, "n_batches", c.n_batches);
}

void parse_spectra(const json& j, SpectraConfig& s) {
  require_object(j, "spectra");
  reject_unknown(j, {"theta_deg", "drift_form", "steady_means", "override_gaussian_guard"}, "spectra");
  read(j, "theta_deg", s.theta_deg);
  if (j.contains("drift_form")) s.form = parse_form(j.at("drift_form").get<std::string>());
  read(j, "override_gaussian_guard", s.override_gaussian_guard);
  if (j.contains("steady_means")) {
    const json& m = j.at("steady_means");
    if (m.is_string()) {
      const auto v = m.get<std::string>();
      if (v == "simulation") s.means = MeansSource::kSimulation;
      else if (v == "fixed_point") s.means = MeansSource::kFixedPoint;
      else throw ConfigError("spectra.steady_means must be \"simulation\", \"fixed_point\" or three [re, im] pairs");
    } else {
      if (!m.is_array() || m.size() != 3) throw ConfigError("spectra.steady_means needs three [re, im] pairs");
      for (int k = 0; k < kWells; ++k) s.explicit_means[k] = read_complex(m[k], "spectra.steady_means");
      s.means = MeansSource::kExplicit;
    }
  }
}

void parse_oracle(const json& j, OracleConfig& o) {
  require_object(j, "oracle");
  reject_unknown(j,
                 {"n_cut", "n_cut_check", "dt", "t_final", "sample_times", "tail_threshold", "truncation_tolerance",
                  "theta_deg", "n_sigma", "discretization_tolerance"},
                 "oracle");
  read(j, "n_cut", o.fock.n_cut);
  read(j, "n_cut_check", o.n_cut_check);
  read(j, "dt", o.fock.dt);
  read(j, "t_final", o.fock.t_final);
  read(j, "sample_times", o.fock.sample_times);
  read(j, "tail_threshold", o.fock.tail_threshold);
  read(j, "truncation_tolerance", o.truncation_tolerance);
  read(j, "theta_deg", o.theta_deg);
  read(j, "n_sigma", o.n_sigma);
  read(j, "discretization_tolerance", o.discretization_tolerance);
}

}  // namespace

void RunConfig::validate() const {
  params.validate();
  integration.validate();
  theta_grid.validate();
  omega_grid.validate();
  if (!(window_start >= 0.0) || !(window_end > window_start) || window_end > integration.t_final + 1e-12)
    throw ConfigError("steady_window must satisfy 0 <= start < end <= t_final");
  if (!std::isfinite(spectra.theta_deg)) throw ConfigError("spectra.theta_deg must be finite");
  oracle.fock.validate();
  if (oracle.n_cut_check <= oracle.fock.n_cut) throw ConfigError("oracle.n_cut_check must exceed oracle.n_cut");
  if (!(oracle.n_sigma > 0.0)) throw ConfigError("oracle.n_sigma must be positive");
  if (!(oracle.discretization_tolerance >= 0.0))
    throw ConfigError("oracle.discretization_tolerance must be >= 0");
  if (run_label.empty()) throw ConfigError("run_label must not be empty");
}

RunConfig parse_config(const json& doc) {
  RunConfig c;
  try {
    require_object(doc, "config");
    reject_unknown(doc,
                   {"run_label", "params", "integration", "theta_grid", "steady_window", "omega_grid", "spectra",
                    "oracle", "outputs_dir"},
                   "config");
    read(doc, "run_label", c.run_label);
    if (doc.contains("params")) parse_params(doc.at("params"), c.params);
    if (doc.contains("integration")) parse_integration(doc.at("integration"), c.integration);
    if (doc.contains("theta_grid")) {
      const json& g = doc.at("theta_grid");
      require_object(g, "theta_grid");
      reject_unknown(g, {"start_deg", "stop_deg", "step_deg"}, "theta_grid");
      read(g, "start_deg", c.theta_grid.start_deg);
      read(g, "stop_deg", c.theta_grid.stop_deg);
      read(g, "step_deg", c.theta_grid.step_deg);
    }
    if (doc.contains("steady_window")) {
      const json& w = doc.at("steady_window");
      if (!w.is_array() || w.size() != 2) throw ConfigError("steady_window must be [t_start, t_end]");
      c.window_start = w[0].get<double>();
      c.window_end = w[1].get<double>();
    }
    if (doc.contains("omega_grid")) {
      const json& g = doc.at("omega_grid");
      require_object(g, "omega_grid");
      reject_unknown(g, {"lo", "hi", "n"}, "omega_grid");
      read(g, "lo", c.omega_grid.lo);
      read(g, "hi", c.omega_grid.hi);
      read(g, "n", c.omega_grid.n);
    }
    if (doc.contains("spectra")) parse_spectra(doc.at("spectra"), c.spectra);
    if (doc.contains("oracle")) parse_oracle(doc.at("oracle"), c.oracle);
    if (doc.contains("outputs_dir")) c.outputs_dir = doc.at("outputs_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json j;
  j["run_label"] = c.run_label;
  j["params"] = {{"chi", c.params.chi},
                 {"J", c.params.j_tunnel},
                 {"gamma", c.params.gamma},
                 {"epsilon", complex_json(c.params.epsilon)}};
  const auto& g = c.integration;
  j["integration"] = {{"dt", g.dt},
                      {"t_final", g.t_final},
                      {"n_traj", g.n_traj},
                      {"master_seed", g.master_seed},
                      {"sample_stride", g.sample_stride},
                      {"divergence_threshold", g.divergence_threshold},
                      {"n_batches", g.n_batches}};
  j["theta_grid"] = {{"start_deg", c.theta_grid.start_deg},
                     {"stop_deg", c.theta_grid.stop_deg},
                     {"step_deg", c.theta_grid.step_deg}};
  j["steady_window"] = {c.window_start, c.window_end};
  j["omega_grid"] = {{"lo", c.omega_grid.lo}, {"hi", c.omega_grid.hi}, {"n", c.omega_grid.n}};
  json sp = {{"theta_deg", c.spectra.theta_deg},
             {"drift_form", form_name(c.spectra.form)},
             {"override_gaussian_guard", c.spectra.override_gaussian_guard}};
  if (c.spectra.means == MeansSource::kSimulation) sp["steady_means"] = "simulation";
  else if (c.spectra.means == MeansSource::kFixedPoint) sp["steady_means"] = "fixed_point";
  else {
    sp["steady_means"] = json::array();
    for (const cplx z : c.spectra.explicit_means) sp["steady_means"].push_back(complex_json(z));
  }
  j["spectra"] = sp;
  const auto& o = c.oracle;
  j["oracle"] = {{"n_cut", o.fock.n_cut},
                 {"n_cut_check", o.n_cut_check},
                 {"dt", o.fock.dt},
                 {"t_final", o.fock.t_final},
                 {"sample_times", o.fock.sample_times},
                 {"tail_threshold", o.fock.tail_threshold},
                 {"truncation_tolerance", o.truncation_tolerance},
                 {"theta_deg", o.theta_deg},
                 {"n_sigma", o.n_sigma},
                 {"discretization_tolerance", o.discretization_tolerance}};
  j["outputs_dir"] = c.outputs_dir.string();
  return j;
}

}  // namespace trimer
