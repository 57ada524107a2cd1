#pragma once

// Experiment configuration: JSON schema, defaults and digest.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwork/interferometer.hpp"

namespace qwork::app {

inline constexpr const char* kToolVersion = "1.0.0";

// Invalid input files; the message names the offending field or line.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TemperatureSetting {
  std::string label;      // "zero", "infinite" or the numeric kT/h in kHz
  double kT_khz = 0.0;    // 0 for "zero", +inf for "infinite"
  double sigma_khz = 0.0;

  InverseTemperature beta() const { return InverseTemperature::from_kT(kT_khz); }
  // First-order sigma of beta = 1/kT; zero at the two limits.
  double sigma_beta() const;
};

struct ExperimentConfig {
  double nu1_khz = 2.5;
  double nu2_khz = 1.0;
  double tau_ms = 0.1;
  std::vector<TemperatureSetting> temperatures;
  int samples = kDefaultSamples;
  double rate_khz = kDefaultRateKhz;
  NoiseModel noise;
  int mc_trials = 1000;
  std::uint64_t seed = 0;

  // Throws SchemaError naming the field.
  void validate() const;
  QuenchProtocol protocol(Direction d) const { return make_protocol(nu1_khz, nu2_khz, tau_ms, d); }
  double window_ms() const { return (samples - 1) / rate_khz; }
};

// Backward envelope loses 20% over the window; forward decays 4x slower.
NoiseModel default_noise(int samples, double rate_khz);
std::vector<TemperatureSetting> default_temperatures();
ExperimentConfig default_config();

// Missing fields take their defaults; unknown fields are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& data);
// Digest of the canonical JSON dump.
std::string config_digest(const ExperimentConfig& c);

}  // namespace qwork::app
