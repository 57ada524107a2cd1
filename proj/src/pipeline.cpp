#include "qwork/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "qwork/io.hpp"
#include "qwork/qpt.hpp"

namespace qwork::app {

using nlohmann::json;
namespace fs = std::filesystem;

std::string SeriesId::stem() const { return std::string(direction_label(direction)) + "_T" + std::to_string(temperature); }
std::string series_file(const SeriesId& id) { return "series_" + id.stem() + ".csv"; }
std::string fit_file(const SeriesId& id) { return "fit_" + id.stem() + ".json"; }
std::string verify_file(int t) { return "verify_T" + std::to_string(t) + ".json"; }
std::string crooks_file(int t) { return "crooks_points_T" + std::to_string(t) + ".csv"; }

std::vector<SeriesId> all_series(const ExperimentConfig& c) {
  std::vector<SeriesId> ids;
  for (Direction d : {Direction::Forward, Direction::Backward})
    for (int t = 0; t < static_cast<int>(c.temperatures.size()); ++t) ids.push_back({d, t});
  return ids;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::array<double, kTones> protocol_omegas(const QuenchProtocol& p) {
  const Spectrum s0 = eigensystem(hamiltonian(p, 0.0));
  const Spectrum s1 = eigensystem(hamiltonian(p, p.tau));
  std::array<double, kTones> w{};
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) w[2 * n + m] = s1.energies[m] - s0.energies[n];
  std::sort(w.begin(), w.end());
  return w;
}

FitModel fit_series(const MagnetizationSeries& s, const std::optional<std::array<double, kTones>>& fallback) {
  try {
    return fit_model(s, seed_omegas(s), 0.0);
  } catch (const std::exception&) {
    if (!fallback) throw;
  }
  return fit_model(s, *fallback, 0.0);
}

json verify_pair(const FitModel& forward, const FitModel& backward, const QuenchProtocol& forward_protocol,
                 const std::optional<TemperatureSetting>& temperature, int trials, std::uint64_t seed,
                 std::vector<CrooksPoint>* points_out) {
  const auto df = distribution_from_fit(forward);
  const auto db = distribution_from_fit(backward);
  json j;
  if (temperature) {
    j["temperature"] = temperature->label;
    const auto beta = temperature->beta();
    j["beta_prep_per_khz"] = beta.is_infinite() ? json(nullptr) : json(beta.value());
  }
  std::vector<CrooksPoint> pts;
  try {
    pts = crooks_points(df, db);
  } catch (const std::logic_error& e) {
    // A pure ground state has no excited-state atoms to compare; their
    // zero-weight tones are also free to wander off the pairing window.
    if (temperature && temperature->beta().is_infinite()) {
      j["status"] = "not_applicable";
      j["reason"] = e.what();
      return j;
    }
    throw;
  }
  if (points_out) *points_out = pts;
  const CrooksFit cf = crooks_fit(pts);
  j["status"] = "ok";
  j["crooks"] = crooks_to_json(cf);
  if (temperature && !temperature->beta().is_infinite())
    j["jarzynski"] = jarzynski_to_json(
        jarzynski_report(forward, cf, forward_protocol, temperature->beta(), temperature->sigma_beta(), trials, seed));
  else
    j["jarzynski"] = "not_applicable";
  return j;
}

json qpt_summary(const ExperimentConfig& c) {
  json out;
  std::array<TransitionTable, 2> tables{};
  for (Direction d : {Direction::Forward, Direction::Backward}) {
    const QuenchProtocol p = c.protocol(d);
    const Mat2 u = propagator(p);
    const Channel ideal = unitary_channel(u);
    const Channel measured =
        c.noise.rf_sigma > 0.0
            ? mixture_channel(realized_process(p, u, c.noise, derive_seed(c.seed, 2000 + static_cast<int>(d))))
            : ideal;
    const ProcessMatrix xi = reconstruct(measured);
    const ChannelMetrics m = channel_metrics(xi, ideal);
    tables[static_cast<int>(d)] = transition_table(p, InverseTemperature::zero(), measured);
    json entry = process_to_json(xi);
    entry["worst_case_distance"] = m.worst_case_distance;
    entry["unitality_deviation"] = m.unitality_deviation;
    entry["imag_norm"] = m.imag_norm;
    out[d == Direction::Forward ? "forward" : "backward"] = entry;
  }
  out["microreversibility_deviation"] = microreversibility_deviation(tables[0], tables[1]);
  out["rf_sigma"] = c.noise.rf_sigma;
  return out;
}

ExperimentConfig run_config(const fs::path& run) {
  const fs::path p = run / kConfigFile;
  if (!fs::exists(p)) throw StageError("run directory " + run.string() + " has no " + kConfigFile + " (run simulate first)");
  return load_config(p);
}

void record_stage(const fs::path& run, const ExperimentConfig& c, const std::string& stage,
                  const std::vector<std::string>& artifacts, double seconds) {
  const fs::path mpath = run / kManifestFile;
  json manifest = json::object();
  if (fs::exists(mpath)) manifest = json::parse(read_file(mpath));
  manifest["tool_version"] = kToolVersion;
  manifest["config_digest"] = config_digest(c);
  std::vector<std::string> sorted = artifacts;
  std::sort(sorted.begin(), sorted.end());
  manifest["stages"][stage] = {{"artifacts", sorted}};
  manifest["timing_file"] = kTimingFile;
  write_atomic(mpath, dump(manifest));

  const fs::path tpath = run / kTimingFile;
  json timing = json::object();
  if (fs::exists(tpath)) timing = json::parse(read_file(tpath));
  timing[stage + "_seconds"] = seconds;
  write_atomic(tpath, dump(timing));
}

std::vector<std::string> simulate_stage(const ExperimentConfig& c, const fs::path& out, int threads) {
  c.validate();
  fs::create_directories(out);
  write_atomic(out / kConfigFile, dump(config_to_json(c)));
  std::array<Mat2, 2> props{};
  parallel_for(2, threads, [&](std::size_t d) { props[d] = propagator(c.protocol(static_cast<Direction>(d))); });

  const auto ids = all_series(c);
  std::vector<std::string> files(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    const auto& id = ids[i];
    const QuenchProtocol p = c.protocol(id.direction);
    const auto s = sample_series(p, props[static_cast<int>(id.direction)], c.temperatures[id.temperature].beta(),
                                 c.noise, c.samples, c.rate_khz, derive_seed(c.seed, i));
    files[i] = series_file(id);
    write_atomic(out / files[i], series_to_csv(s));
  });
  return files;
}

std::vector<std::string> fit_stage(const fs::path& run, int threads) {
  const ExperimentConfig c = run_config(run);
  const auto ids = all_series(c);
  std::vector<std::string> files(ids.size());
  std::vector<std::string> failures(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    const auto& id = ids[i];
    try {
      const auto s = load_series(run / series_file(id));
      const FitModel m = fit_series(s, protocol_omegas(c.protocol(id.direction)));
      json j = {{"source", series_file(id)}, {"fit", fit_to_json(m)}};
      try {
        j["distribution"] = distribution_to_json(distribution_from_fit(m));
      } catch (const std::domain_error& e) {
        j["distribution"] = nullptr;
        j["warning"] = e.what();
      }
      files[i] = fit_file(id);
      write_atomic(run / files[i], dump(j));
    } catch (const FitError& e) {
      failures[i] = series_file(id) + ": " + e.what() + " after " + std::to_string(e.best_so_far().iterations) +
                    " iterations";
    } catch (const std::domain_error& e) {
      failures[i] = series_file(id) + ": " + e.what();
    } catch (const std::invalid_argument& e) {
      failures[i] = series_file(id) + ": " + e.what();
    } catch (const std::runtime_error& e) {
      failures[i] = series_file(id) + ": " + e.what();
    }
  });
  std::string msg;
  for (const auto& f : failures)
    if (!f.empty()) msg += (msg.empty() ? "" : "; ") + f;
  if (!msg.empty()) throw StageError("fit failed: " + msg);
  return files;
}

std::vector<std::string> verify_stage(const fs::path& run) {
  const ExperimentConfig c = run_config(run);
  std::vector<std::string> files;
  for (int t = 0; t < static_cast<int>(c.temperatures.size()); ++t) {
    const SeriesId f{Direction::Forward, t}, b{Direction::Backward, t};
    for (const auto& id : {f, b})
      if (!fs::exists(run / fit_file(id))) throw StageError("verify: missing " + fit_file(id) + " (run fit first)");
    std::vector<CrooksPoint> pts;
    json j;
    try {
      j = verify_pair(load_fit(run / fit_file(f)), load_fit(run / fit_file(b)), c.protocol(Direction::Forward),
                      c.temperatures[t], c.mc_trials, derive_seed(c.seed, 1000 + t), &pts);
    } catch (const std::invalid_argument& e) {
      throw StageError("verify T" + std::to_string(t) + ": " + e.what());
    } catch (const std::domain_error& e) {
      throw StageError("verify T" + std::to_string(t) + ": " + e.what());
    }
    write_atomic(run / verify_file(t), dump(j));
    files.push_back(verify_file(t));
    if (!pts.empty()) {
      write_atomic(run / crooks_file(t), crooks_points_to_csv(pts));
      files.push_back(crooks_file(t));
    }
  }
  return files;
}

std::vector<std::string> qpt_stage(const ExperimentConfig& c, const fs::path& out) {
  fs::create_directories(out);
  write_atomic(out / kQptFile, dump(qpt_summary(c)));
  return {kQptFile};
}

namespace {

// kT/h recovered from an initial excited population, as JSON (null = infinite).
json recovered_temperature(double p1, double nu) {
  if (p1 <= 1e-9) return 0.0;
  if (p1 >= 0.5 - 1e-9) return nullptr;
  return temperature_from_population(p1, nu);
}

std::string fmt(double v, int prec = 4) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

std::string fmt_json(const json& v, int prec = 4, const char* null_text = "inf") {
  if (v.is_null()) return null_text;
  if (v.is_number()) return fmt(v.get<double>(), prec);
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::vector<std::string> report_stage(const fs::path& run) {
  const ExperimentConfig c = run_config(run);
  std::vector<std::string> missing;
  auto need = [&](const std::string& stage, const std::string& file) {
    if (!fs::exists(run / file)) missing.push_back(stage + " (" + file + ")");
  };
  for (const auto& id : all_series(c)) need("simulate", series_file(id));
  for (const auto& id : all_series(c)) need("fit", fit_file(id));
  for (int t = 0; t < static_cast<int>(c.temperatures.size()); ++t) need("verify", verify_file(t));
  need("qpt", kQptFile);

  json report = {{"tool_version", kToolVersion}, {"config_digest", config_digest(c)}};
  json rows = json::array();
  bool all_flags = true;
  std::ostringstream text;
  text << "temperature  kT_cfg  kT_F    kT_B    beta_crooks  dF_crooks  dF_theory  <e^-bW>   crooks    theory    "
          "consistent\n";
  for (int t = 0; t < static_cast<int>(c.temperatures.size()); ++t) {
    const auto& ts = c.temperatures[t];
    json row = {{"temperature", ts.label}};
    row["kT_config_khz"] = std::isinf(ts.kT_khz) ? json(nullptr) : json(ts.kT_khz);
    const SeriesId f{Direction::Forward, t}, b{Direction::Backward, t};
    std::string kt_f = "-", kt_b = "-", beta_c = "-", df_c = "-", lhs = "-", crooks = "-", theory = "-", flag = "-";
    if (fs::exists(run / fit_file(f)) && fs::exists(run / fit_file(b))) {
      for (const auto& id : {f, b}) {
        const QuenchProtocol p = c.protocol(id.direction);
        const auto d = distribution_from_fit(load_fit(run / fit_file(id)));
        const auto est = conditionals_from_distribution(d, eigensystem(hamiltonian(p, 0.0)),
                                                        eigensystem(hamiltonian(p, p.tau)));
        const json kt = recovered_temperature(est.p0[1], p.initial_half_gap());
        const bool fwd = id.direction == Direction::Forward;
        row[fwd ? "kT_from_forward_khz" : "kT_from_backward_khz"] = kt;
        row[fwd ? "excited_population_forward" : "excited_population_backward"] = est.p0[1];
        (id.direction == Direction::Forward ? kt_f : kt_b) = fmt_json(kt, 3);
      }
    }
    const FreeEnergy theory_df = delta_f_theory(ts.beta(), c.protocol(Direction::Forward));
    row["delta_f_theory_khz"] = theory_df.delta_f;
    if (fs::exists(run / verify_file(t))) {
      const json v = json::parse(read_file(run / verify_file(t)));
      row["verify_status"] = v.at("status");
      if (v.at("status") == "ok") {
        row["crooks"] = v.at("crooks");
        beta_c = fmt_json(v["crooks"]["beta_per_khz"]);
        df_c = fmt_json(v["crooks"]["delta_f_khz"], 4, "n/a");
      }
      if (v.contains("jarzynski") && v["jarzynski"].is_object()) {
        const auto& jz = v["jarzynski"];
        row["jarzynski"] = jz;
        const bool ok = jz["flags"]["lhs_vs_crooks"].get<bool>() && jz["flags"]["lhs_vs_theory"].get<bool>() &&
                        jz["flags"]["crooks_vs_theory"].get<bool>();
        row["consistent"] = ok;
        all_flags = all_flags && ok;
        lhs = fmt_json(jz["lhs_continuation"]["value"], 6);
        crooks = fmt_json(jz["rhs_crooks"]["value"], 6);
        theory = fmt_json(jz["rhs_theory"]["value"], 6);
        flag = ok ? "yes" : "no";
      } else {
        row["jarzynski"] = "not_applicable";
        lhs = crooks = theory = flag = "n/a";
      }
    }
    rows.push_back(row);
    text << std::left << std::setw(13) << ts.label << std::setw(8) << (std::isinf(ts.kT_khz) ? "inf" : fmt(ts.kT_khz, 3))
         << std::setw(8) << kt_f << std::setw(8) << kt_b << std::setw(13) << beta_c << std::setw(11) << df_c
         << std::setw(11) << fmt(theory_df.delta_f) << std::setw(10) << lhs << std::setw(10) << crooks << std::setw(10)
         << theory << flag << "\n";
  }
  report["temperatures"] = rows;
  report["all_jarzynski_flags"] = all_flags;
  if (fs::exists(run / kQptFile)) {
    const json q = json::parse(read_file(run / kQptFile));
    report["qpt"] = {{"forward_worst_case_distance", q["forward"]["worst_case_distance"]},
                     {"backward_worst_case_distance", q["backward"]["worst_case_distance"]},
                     {"forward_unitality_deviation", q["forward"]["unitality_deviation"]},
                     {"backward_unitality_deviation", q["backward"]["unitality_deviation"]},
                     {"microreversibility_deviation", q["microreversibility_deviation"]}};
    text << "\nprocess tomography: worst-case distance F " << fmt(q["forward"]["worst_case_distance"].get<double>())
         << ", B " << fmt(q["backward"]["worst_case_distance"].get<double>()) << "; unitality deviation F "
         << fmt(q["forward"]["unitality_deviation"].get<double>()) << ", B "
         << fmt(q["backward"]["unitality_deviation"].get<double>()) << "; micro-reversibility deviation "
         << fmt(q["microreversibility_deviation"].get<double>()) << "\n";
  }
  report["missing_stages"] = missing;
  report["complete"] = missing.empty();
  if (!missing.empty()) {
    text << "\nmissing stages:\n";
    for (const auto& m : missing) text << "  " << m << "\n";
  }
  write_atomic(run / kReportJson, dump(report));
  write_atomic(run / kReportText, text.str());
  if (!missing.empty()) {
    std::string msg = "report: missing stages:";
    for (const auto& m : missing) msg += " " + m;
    throw StageError(msg);
  }
  return {kReportJson, kReportText};
}

void run_all(const ExperimentConfig& c, const fs::path& out, int threads) {
  using clock = std::chrono::steady_clock;
  auto timed = [&](const std::string& stage, const std::function<std::vector<std::string>()>& fn) {
    const auto t0 = clock::now();
    auto files = fn();
    record_stage(out, c, stage, files, std::chrono::duration<double>(clock::now() - t0).count());
  };
  timed("simulate", [&] { return simulate_stage(c, out, threads); });
  timed("fit", [&] { return fit_stage(out, threads); });
  timed("verify", [&] { return verify_stage(out); });
  timed("qpt", [&] { return qpt_stage(c, out); });
  timed("report", [&] { return report_stage(out); });
}

}  // namespace qwork::app
