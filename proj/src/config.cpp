#include "misac/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "misac/types.hpp"
#include "misac/units.hpp"

namespace misac {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument("invalid config: " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Splits "12.5 dBm" into (12.5, "dBm").
std::pair<double, std::string> split_quantity(const std::string& text) {
  std::istringstream in(text);
  double value = 0.0;
  if (!(in >> value)) throw std::invalid_argument("cannot parse quantity '" + text + "'");
  std::string unit;
  std::getline(in, unit);
  return {value, trim(unit)};
}

InterferenceModel parse_interference_model(const std::string& s) {
  if (s == "clutter_crosstalk") return InterferenceModel::kClutterCrosstalk;
  if (s == "total_minus_desired") return InterferenceModel::kTotalMinusDesired;
  throw std::invalid_argument("unknown interference_model '" + s + "'");
}

}  // namespace

std::string to_string(InterferenceModel m) {
  switch (m) {
    case InterferenceModel::kClutterCrosstalk:
      return "clutter_crosstalk";
    case InterferenceModel::kTotalMinusDesired:
      return "total_minus_desired";
  }
  return "unknown";
}

double parse_power(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw std::invalid_argument("power must be a number or string");
  const auto [value, unit] = split_quantity(v.get<std::string>());
  if (unit == "dBm") return dbm_to_watt(value);
  if (unit == "W" || unit.empty()) return value;
  if (unit == "mW") return value * 1e-3;
  throw std::invalid_argument("unknown power unit '" + unit + "'");
}

double parse_ratio(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw std::invalid_argument("ratio must be a number or string");
  const auto [value, unit] = split_quantity(v.get<std::string>());
  if (unit == "dB") return db_to_linear(value);
  if (unit.empty()) return value;
  throw std::invalid_argument("unknown ratio unit '" + unit + "'");
}

double SystemConfig::target_rcs(int j) const {
  if (rcs.size() == 1) return rcs.front();
  return rcs.at(static_cast<std::size_t>(j));
}

void SystemConfig::validate() const {
  require(num_bs >= 2, "num_bs >= 2");
  require(antennas_per_bs >= 1, "antennas_per_bs >= 1");
  require(num_users >= 1, "num_users >= 1");
  require(num_clutter_targets >= 0, "num_clutter_targets >= 0");
  require(grid_size >= 2, "grid_size >= 2");
  require(selection_weight > 0.0 && selection_weight < 1.0, "0 < selection_weight < 1");
  require(cell_radius > 0.0, "cell_radius > 0");
  require(mu > 0.0, "mu > 0");
  require(antenna_spacing > 0.0, "antenna_spacing > 0");
  require(beamwidth >= 0.0, "beamwidth >= 0");
  require(per_bs_power_budget > 0.0, "per_bs_power_budget > 0");
  require(echo_power_req > 0.0, "echo_power_req > 0");
  require(interference_tol > 0.0, "interference_tol > 0");
  require(sinr_req > 0.0, "sinr_req > 0");
  require(user_noise > 0.0, "user_noise > 0");
  require(receiver_noise > 0.0, "receiver_noise > 0");
  require(rician_factor >= 0.0, "rician_factor >= 0");
  require(si_cancellation >= 0.0 && si_cancellation <= 1.0, "0 <= si_cancellation <= 1");
  require(pathloss_exp_user > 0.0 && pathloss_exp_other > 0.0, "path-loss exponents > 0");
  require(ao_tolerance > 0.0, "ao_tolerance > 0");
  require(ao_max_iters >= 1, "ao_max_iters >= 1");
  require(rcs.size() == 1 || static_cast<int>(rcs.size()) == num_targets(),
          "rcs has one entry or J + 1 entries");
  for (double g : rcs) require(g > 0.0, "rcs > 0");
  require(solver.method == "interior_point" || solver.method == "splitting", "solver method");
  require(solver.eps_abs > 0.0 && solver.eps_rel >= 0.0 && solver.max_iters >= 1,
          "solver tolerances");
  require(feasibility_rel_tol >= 0.0, "feasibility_rel_tol >= 0");
  require(monostatic_node >= -1 && monostatic_node < num_bs, "monostatic_node in [-1, M)");
}

SystemConfig config_from_json(const nlohmann::json& j) {
  SystemConfig c;
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "num_bs") c.num_bs = v.get<int>();
    else if (key == "antennas_per_bs") c.antennas_per_bs = v.get<int>();
    else if (key == "num_users") c.num_users = v.get<int>();
    else if (key == "num_clutter_targets") c.num_clutter_targets = v.get<int>();
    else if (key == "cell_radius") c.cell_radius = v.get<double>();
    else if (key == "mu") c.mu = parse_ratio(v);
    else if (key == "antenna_spacing") c.antenna_spacing = v.get<double>();
    else if (key == "beamwidth_deg") c.beamwidth = deg_to_rad(v.get<double>());
    else if (key == "selection_weight") c.selection_weight = v.get<double>();
    else if (key == "grid_size") c.grid_size = v.get<int>();
    else if (key == "per_bs_power_budget") c.per_bs_power_budget = parse_power(v);
    else if (key == "echo_power_req") c.echo_power_req = parse_power(v);
    else if (key == "interference_tol") c.interference_tol = parse_power(v);
    else if (key == "sinr_req") c.sinr_req = parse_ratio(v);
    else if (key == "user_noise") c.user_noise = parse_power(v);
    else if (key == "receiver_noise") c.receiver_noise = parse_power(v);
    else if (key == "rcs") {
      c.rcs = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
    } else if (key == "pathloss_exp_user") c.pathloss_exp_user = v.get<double>();
    else if (key == "pathloss_exp_other") c.pathloss_exp_other = v.get<double>();
    else if (key == "rician_factor") c.rician_factor = parse_ratio(v);
    else if (key == "si_cancellation") c.si_cancellation = parse_ratio(v);
    else if (key == "ao_tolerance") c.ao_tolerance = v.get<double>();
    else if (key == "ao_max_iters") c.ao_max_iters = v.get<int>();
    else if (key == "rng_seed") c.rng_seed = v.get<std::uint64_t>();
    else if (key == "interference_model") c.interference_model = parse_interference_model(v.get<std::string>());
    else if (key == "solver_method") c.solver.method = v.get<std::string>();
    else if (key == "solver_eps_abs") c.solver.eps_abs = v.get<double>();
    else if (key == "solver_eps_rel") c.solver.eps_rel = v.get<double>();
    else if (key == "solver_max_iters") c.solver.max_iters = v.get<int>();
    else if (key == "feasibility_rel_tol") c.feasibility_rel_tol = v.get<double>();
    else if (key == "trial_timeout_s") c.trial_timeout_s = v.get<double>();
    else if (key == "monostatic_node") c.monostatic_node = v.get<int>();
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const SystemConfig& c) {
  auto dbm = [](double w) {
    std::ostringstream os;
    os.precision(17);
    os << watt_to_dbm(w) << " dBm";
    return os.str();
  };
  return nlohmann::json{
      {"num_bs", c.num_bs},
      {"antennas_per_bs", c.antennas_per_bs},
      {"num_users", c.num_users},
      {"num_clutter_targets", c.num_clutter_targets},
      {"cell_radius", c.cell_radius},
      {"mu", c.mu},
      {"antenna_spacing", c.antenna_spacing},
      {"beamwidth_deg", rad_to_deg(c.beamwidth)},
      {"selection_weight", c.selection_weight},
      {"grid_size", c.grid_size},
      {"per_bs_power_budget", dbm(c.per_bs_power_budget)},
      {"echo_power_req", dbm(c.echo_power_req)},
      {"interference_tol", dbm(c.interference_tol)},
      {"sinr_req", c.sinr_req},
      {"user_noise", dbm(c.user_noise)},
      {"receiver_noise", dbm(c.receiver_noise)},
      {"rcs", c.rcs},
      {"pathloss_exp_user", c.pathloss_exp_user},
      {"pathloss_exp_other", c.pathloss_exp_other},
      {"rician_factor", c.rician_factor},
      {"si_cancellation", c.si_cancellation},
      {"ao_tolerance", c.ao_tolerance},
      {"ao_max_iters", c.ao_max_iters},
      {"rng_seed", c.rng_seed},
      {"interference_model", to_string(c.interference_model)},
      {"solver_method", c.solver.method},
      {"solver_eps_abs", c.solver.eps_abs},
      {"solver_eps_rel", c.solver.eps_rel},
      {"solver_max_iters", c.solver.max_iters},
      {"feasibility_rel_tol", c.feasibility_rel_tol},
      {"trial_timeout_s", c.trial_timeout_s},
      {"monostatic_node", c.monostatic_node},
  };
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

}  // namespace misac
