#include "qwork/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qwork::app {

using nlohmann::json;
namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, std::size_t line) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (field.empty() || end != begin + field.size() || errno == ERANGE || !std::isfinite(v))
    throw SchemaError("series line " + std::to_string(line) + ": '" + field + "' is not a finite number");
  return v;
}

}  // namespace

std::string series_to_csv(const MagnetizationSeries& s) {
  std::string out = "u_ms,re,im\n";
  for (std::size_t j = 0; j < s.samples.size(); ++j)
    out += fmt17(s.u_grid[j]) + "," + fmt17(s.samples[j].real()) + "," + fmt17(s.samples[j].imag()) + "\n";
  return out;
}

MagnetizationSeries series_from_csv(const std::string& text) {
  if (text.empty()) throw SchemaError("series: empty file");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "u_ms,re,im") throw SchemaError("series line 1: expected header 'u_ms,re,im'");
  MagnetizationSeries s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 3) throw SchemaError("series line " + std::to_string(lineno) + ": expected 3 columns");
    s.u_grid.push_back(parse_double(fields[0], lineno));
    s.samples.emplace_back(parse_double(fields[1], lineno), parse_double(fields[2], lineno));
  }
  if (s.samples.empty()) throw SchemaError("series: no data rows");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("series: ") + e.what());
  }
  if (s.samples.size() > 1) s.meta.rate_khz = 1.0 / s.spacing();
  return s;
}

MagnetizationSeries load_series(const fs::path& path) {
  try {
    return series_from_csv(read_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

json distribution_to_json(const ReconstructedDistribution& d) {
  json atoms = json::array();
  for (const auto& a : d.atoms)
    atoms.push_back({{"w_khz", a.w}, {"prob", a.prob}, {"sigma_w_khz", a.sigma_w}, {"sigma_prob", a.sigma_prob}});
  return atoms;
}

json fit_to_json(const FitModel& m) {
  json tones = json::array();
  for (const auto& t : m.tones)
    tones.push_back({{"omega_khz", t.omega}, {"alpha_re", t.alpha.real()}, {"alpha_im", t.alpha.imag()}});
  json cov = json::array();
  for (const auto& row : m.covariance) cov.push_back(row);
  json order = json::array({"gamma_per_ms"});
  for (int k = 1; k <= kTones; ++k) order.push_back("omega" + std::to_string(k) + "_khz");
  for (int k = 1; k <= kTones; ++k) {
    order.push_back("alpha" + std::to_string(k) + "_re");
    order.push_back("alpha" + std::to_string(k) + "_im");
  }
  return {{"gamma_per_ms", m.gamma},   {"tones", tones},           {"covariance", cov},
          {"covariance_order", order}, {"residual_rms", m.residual_rms}, {"iterations", m.iterations},
          {"samples", m.samples}};
}

FitModel fit_from_json(const json& j) {
  try {
    FitModel m;
    m.gamma = j.at("gamma_per_ms").get<double>();
    const auto& tones = j.at("tones");
    if (!tones.is_array() || tones.size() != kTones) throw SchemaError("fit: 'tones' must hold 4 entries");
    for (int k = 0; k < kTones; ++k)
      m.tones[k] = {tones[k].at("omega_khz").get<double>(),
                    {tones[k].at("alpha_re").get<double>(), tones[k].at("alpha_im").get<double>()}};
    const auto& cov = j.at("covariance");
    if (!cov.is_array() || cov.size() != kFitParams) throw SchemaError("fit: 'covariance' must be 13 x 13");
    for (int i = 0; i < kFitParams; ++i) {
      if (!cov[i].is_array() || cov[i].size() != kFitParams) throw SchemaError("fit: 'covariance' must be 13 x 13");
      for (int k = 0; k < kFitParams; ++k) m.covariance[i][k] = cov[i][k].get<double>();
    }
    m.residual_rms = j.at("residual_rms").get<double>();
    m.iterations = j.at("iterations").get<int>();
    m.samples = j.at("samples").get<int>();
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("fit: ") + e.what());
  } catch (const SchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("fit: ") + e.what());
  }
}

FitModel load_fit(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return fit_from_json(j.contains("fit") ? j["fit"] : j);
}

std::string crooks_points_to_csv(const std::vector<CrooksPoint>& pts) {
  std::string out = "W_khz,ln_ratio,sigma\n";
  for (const auto& p : pts) out += fmt17(p.w) + "," + fmt17(p.ln_ratio) + "," + fmt17(p.sigma) + "\n";
  return out;
}

json crooks_to_json(const CrooksFit& f) {
  json pts = json::array();
  for (const auto& p : f.points) pts.push_back({{"w_khz", p.w}, {"ln_ratio", p.ln_ratio}, {"sigma", p.sigma}});
  json j = {{"beta_per_khz", f.beta_est},
            {"sigma_beta_per_khz", f.sigma_beta},
            {"delta_f_khz", f.delta_f_est},
            {"sigma_delta_f_khz", f.sigma_delta_f},
            {"intercept", f.intercept},
            {"sigma_intercept", f.sigma_intercept},
            {"cov_intercept_slope", f.cov_intercept_slope},
            {"degenerate_temperature", f.degenerate_temperature},
            {"points", pts}};
  if (f.degenerate_temperature) j["warning"] = "Crooks slope indistinguishable from zero (degenerate temperature)";
  return j;
}

json jarzynski_to_json(const JarzynskiReport& r) {
  auto est = [](const Estimate& e) { return json{{"value", e.value}, {"sigma", e.sigma}}; };
  return {{"beta_per_khz", r.beta},
          {"sigma_beta_per_khz", r.sigma_beta},
          {"lhs_continuation", est(r.lhs_continuation)},
          {"rhs_crooks", est(r.rhs_crooks)},
          {"rhs_theory", est(r.rhs_theory)},
          {"flags",
           {{"lhs_vs_crooks", r.lhs_vs_crooks},
            {"lhs_vs_theory", r.lhs_vs_theory},
            {"crooks_vs_theory", r.crooks_vs_theory}}}};
}

json process_to_json(const ProcessMatrix& xi) {
  json re = json::array(), im = json::array();
  for (int k = 0; k < 4; ++k) {
    json rr = json::array(), ii = json::array();
    for (int l = 0; l < 4; ++l) {
      rr.push_back(xi.xi(k, l).real());
      ii.push_back(xi.xi(k, l).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"basis", {"i*1", "X", "Y", "Z"}}, {"xi_re", re}, {"xi_im", im}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace qwork::app
