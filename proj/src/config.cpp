#include "qwork/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace qwork::app {

using nlohmann::json;

double TemperatureSetting::sigma_beta() const {
  if (kT_khz == 0.0 || std::isinf(kT_khz)) return 0.0;
  return sigma_khz / (kT_khz * kT_khz);
}

NoiseModel default_noise(int samples, double rate_khz) {
  NoiseModel n;
  const double window = samples > 1 ? (samples - 1) / rate_khz : 1.0;
  n.gamma_b = -std::log(0.8) / window;
  n.gamma_f = n.gamma_b / 4.0;
  return n;
}

std::vector<TemperatureSetting> default_temperatures() {
  const double inf = std::numeric_limits<double>::infinity();
  return {{"zero", 0.0, 0.0}, {"1.9", 1.9, 0.1}, {"3.1", 3.1, 0.2}, {"6", 6.0, 0.7}, {"infinite", inf, 0.0}};
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.temperatures = default_temperatures();
  c.noise = default_noise(c.samples, c.rate_khz);
  return c;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw SchemaError("config field '" + field + "': " + what);
  };
  require(std::isfinite(nu1_khz) && nu1_khz > 0.0, "nu1_khz", "must be a positive number");
  require(std::isfinite(nu2_khz) && nu2_khz > 0.0, "nu2_khz", "must be a positive number");
  require(std::isfinite(tau_ms) && tau_ms > 0.0, "tau_ms", "must be a positive number");
  require(!temperatures.empty(), "temperatures", "must be a non-empty list");
  for (std::size_t i = 0; i < temperatures.size(); ++i) {
    const auto& t = temperatures[i];
    const std::string f = "temperatures[" + std::to_string(i) + "]";
    require(t.kT_khz >= 0.0 && !std::isnan(t.kT_khz), f, "kT must be >= 0");
    require(std::isfinite(t.sigma_khz) && t.sigma_khz >= 0.0, f + ".sigma_khz", "must be >= 0");
  }
  require(samples >= 2, "samples", "must be >= 2");
  require(std::isfinite(rate_khz) && rate_khz > 0.0, "rate_khz", "must be a positive number");
  require(mc_trials >= 100, "mc_trials", "must be >= 100");
  try {
    noise.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("config field 'noise': ") + e.what());
  }
}

namespace {

double number_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_number()) throw SchemaError("config field '" + path + key + "': expected a number");
  return j.get<double>();
}

TemperatureSetting parse_temperature(const json& j, std::size_t index) {
  const std::string f = "temperatures[" + std::to_string(index) + "]";
  const double inf = std::numeric_limits<double>::infinity();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "zero") return {"zero", 0.0, 0.0};
    if (s == "infinite") return {"infinite", inf, 0.0};
    throw SchemaError("config field '" + f + "': expected a number, \"zero\" or \"infinite\"");
  }
  TemperatureSetting t;
  if (j.is_number()) {
    t.kT_khz = j.get<double>();
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items())
      if (k != "kT_over_h_khz" && k != "sigma_khz") throw SchemaError("config field '" + f + "." + k + "': unknown");
    if (!j.contains("kT_over_h_khz")) throw SchemaError("config field '" + f + ".kT_over_h_khz': missing");
    t.kT_khz = number_field(j["kT_over_h_khz"], "kT_over_h_khz", f + ".");
    if (j.contains("sigma_khz")) t.sigma_khz = number_field(j["sigma_khz"], "sigma_khz", f + ".");
  } else {
    throw SchemaError("config field '" + f + "': expected a number, string or object");
  }
  if (!(t.kT_khz > 0.0) || !std::isfinite(t.kT_khz))
    throw SchemaError("config field '" + f + "': kT must be positive and finite (use \"zero\"/\"infinite\")");
  std::ostringstream label;
  label << t.kT_khz;
  t.label = label.str();
  return t;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("config: top level must be an object");
  static const std::set<std::string> known = {"nu1_khz", "nu2_khz", "tau_ms",    "temperatures", "samples",
                                              "rate_khz", "noise",   "mc_trials", "seed"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw SchemaError("config field '" + k + "': unknown");

  ExperimentConfig c = default_config();
  if (j.contains("nu1_khz")) c.nu1_khz = number_field(j["nu1_khz"], "nu1_khz", "");
  if (j.contains("nu2_khz")) c.nu2_khz = number_field(j["nu2_khz"], "nu2_khz", "");
  if (j.contains("tau_ms")) c.tau_ms = number_field(j["tau_ms"], "tau_ms", "");
  if (j.contains("samples")) {
    if (!j["samples"].is_number_integer()) throw SchemaError("config field 'samples': expected an integer");
    c.samples = j["samples"].get<int>();
  }
  if (j.contains("rate_khz")) c.rate_khz = number_field(j["rate_khz"], "rate_khz", "");
  if (j.contains("mc_trials")) {
    if (!j["mc_trials"].is_number_integer()) throw SchemaError("config field 'mc_trials': expected an integer");
    c.mc_trials = j["mc_trials"].get<int>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw SchemaError("config field 'seed': expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("temperatures")) {
    const auto& t = j["temperatures"];
    if (!t.is_array()) throw SchemaError("config field 'temperatures': expected a list");
    c.temperatures.clear();
    for (std::size_t i = 0; i < t.size(); ++i) c.temperatures.push_back(parse_temperature(t[i], i));
  }
  // Decay defaults follow the configured acquisition window.
  c.noise = default_noise(c.samples, c.rate_khz);
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    if (!n.is_object()) throw SchemaError("config field 'noise': expected an object");
    for (const auto& [k, v] : n.items()) {
      double* target = k == "gamma_f_per_ms"  ? &c.noise.gamma_f
                       : k == "gamma_b_per_ms" ? &c.noise.gamma_b
                       : k == "rf_sigma"       ? &c.noise.rf_sigma
                       : k == "c_dephasing"    ? &c.noise.c_dephasing
                       : k == "readout_sigma"  ? &c.noise.readout_sigma
                                               : nullptr;
      if (!target) throw SchemaError("config field 'noise." + k + "': unknown");
      *target = number_field(v, k, "noise.");
    }
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json temps = json::array();
  for (const auto& t : c.temperatures) {
    if (t.label == "zero" || t.label == "infinite")
      temps.push_back(t.label);
    else
      temps.push_back({{"kT_over_h_khz", t.kT_khz}, {"sigma_khz", t.sigma_khz}});
  }
  return {{"nu1_khz", c.nu1_khz},
          {"nu2_khz", c.nu2_khz},
          {"tau_ms", c.tau_ms},
          {"temperatures", temps},
          {"samples", c.samples},
          {"rate_khz", c.rate_khz},
          {"noise",
           {{"gamma_f_per_ms", c.noise.gamma_f},
            {"gamma_b_per_ms", c.noise.gamma_b},
            {"rf_sigma", c.noise.rf_sigma},
            {"c_dephasing", c.noise.c_dephasing},
            {"readout_sigma", c.noise.readout_sigma}}},
          {"mc_trials", c.mc_trials},
          {"seed", c.seed}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

std::string config_digest(const ExperimentConfig& c) { return sha256_hex(config_to_json(c).dump()); }

}  // namespace qwork::app
