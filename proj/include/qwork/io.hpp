#pragma once

// File formats: series CSV, fit and report JSON, atomic writes.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwork/config.hpp"
#include "qwork/fluct.hpp"
#include "qwork/qpt.hpp"
#include "qwork/spectral.hpp"

namespace qwork::app {

// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Header `u_ms,re,im`, 17 significant digits, '\n' line ends.
std::string series_to_csv(const MagnetizationSeries& s);
// Throws SchemaError (empty input, bad header, malformed row with its line
// number, non-uniform grid).
MagnetizationSeries series_from_csv(const std::string& text);
MagnetizationSeries load_series(const std::filesystem::path& path);

nlohmann::json fit_to_json(const FitModel& m);
FitModel fit_from_json(const nlohmann::json& j);
FitModel load_fit(const std::filesystem::path& path);
nlohmann::json distribution_to_json(const ReconstructedDistribution& d);

std::string crooks_points_to_csv(const std::vector<CrooksPoint>& pts);
nlohmann::json crooks_to_json(const CrooksFit& f);
nlohmann::json jarzynski_to_json(const JarzynskiReport& r);
nlohmann::json process_to_json(const ProcessMatrix& xi);

// Pretty JSON with a trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace qwork::app
