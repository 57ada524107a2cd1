#pragma once

// End-to-end experiment stages over a run directory:
// simulate -> fit -> verify, plus process tomography and the summary report.

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwork/config.hpp"
#include "qwork/fluct.hpp"
#include "qwork/spectral.hpp"

namespace qwork::app {

// A stage could not complete for domain reasons (fit failure, missing stage).
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeriesId {
  Direction direction = Direction::Forward;
  int temperature = 0;

  std::string stem() const;  // e.g. "F_T0"
};

std::string series_file(const SeriesId& id);  // series_F_T0.csv
std::string fit_file(const SeriesId& id);     // fit_F_T0.json
std::string verify_file(int temperature);     // verify_T0.json
std::string crooks_file(int temperature);     // crooks_points_T0.csv
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kManifestFile = "manifest.json";
// Wall-clock timings live apart from the manifest so that everything else
// in a run directory is a pure function of (config, seed).
inline constexpr const char* kTimingFile = "timing.json";
inline constexpr const char* kQptFile = "qpt.json";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";

std::vector<SeriesId> all_series(const ExperimentConfig& c);

// Runs fn(0..n-1) on up to `threads` workers; rethrows the first failure
// by index after all work finished.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// Fit seeded from the data; falls back to `fallback` seeds when that fails.
FitModel fit_series(const MagnetizationSeries& s,
                    const std::optional<std::array<double, kTones>>& fallback = std::nullopt);
// Tone frequencies implied by the protocol's spectra.
std::array<double, kTones> protocol_omegas(const QuenchProtocol& p);

// Crooks line and, for finite temperatures, the Jarzynski report.
nlohmann::json verify_pair(const FitModel& forward, const FitModel& backward, const QuenchProtocol& forward_protocol,
                           const std::optional<TemperatureSetting>& temperature, int trials, std::uint64_t seed,
                           std::vector<CrooksPoint>* points_out);

nlohmann::json qpt_summary(const ExperimentConfig& c);

ExperimentConfig run_config(const std::filesystem::path& run);

std::vector<std::string> simulate_stage(const ExperimentConfig& c, const std::filesystem::path& out, int threads);
std::vector<std::string> fit_stage(const std::filesystem::path& run, int threads);
std::vector<std::string> verify_stage(const std::filesystem::path& run);
std::vector<std::string> qpt_stage(const ExperimentConfig& c, const std::filesystem::path& out);
// Throws StageError listing missing stages after writing what it can.
std::vector<std::string> report_stage(const std::filesystem::path& run);

// Records a finished stage in the manifest and its timing in timing.json.
void record_stage(const std::filesystem::path& run, const ExperimentConfig& c, const std::string& stage,
                  const std::vector<std::string>& artifacts, double seconds);

// All five stages in order.
void run_all(const ExperimentConfig& c, const std::filesystem::path& out, int threads);

}  // namespace qwork::app
