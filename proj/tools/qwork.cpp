// qwork: simulate, fit and verify quantum work statistics of a driven qubit.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "qwork/io.hpp"
#include "qwork/pipeline.hpp"

namespace fs = std::filesystem;
using namespace qwork;
using namespace qwork::app;
using nlohmann::json;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

int default_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

ExperimentConfig effective_config(const Common& o) {
  ExperimentConfig c = o.config.empty() ? default_config() : load_config(o.config);
  if (o.seed_set) c.seed = o.seed;
  return c;
}

std::array<double, kTones> parse_omegas(const std::vector<double>& v) {
  if (v.size() != kTones) throw CLI::ValidationError("--init-omegas", "expects exactly 4 values");
  return {v[0], v[1], v[2], v[3]};
}

template <class F>
void timed_stage(const fs::path& run, const ExperimentConfig& c, const std::string& stage, F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto files = fn();
  record_stage(run, c, stage, files,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-point-measurement work statistics of a quenched qubit: simulation, reconstruction, verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common o;
  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* cfg = cmd->add_option("--config", o.config, "experiment configuration (JSON)")->envname("QWORK_CONFIG");
    if (config_required) cfg->required();
    cmd->add_option("--out", o.out, "output directory or file")->envname("QWORK_OUT");
    cmd->add_option("--seed", o.seed, "override the configured seed")
        ->envname("QWORK_SEED")
        ->each([&](const std::string&) { o.seed_set = true; });
    cmd->add_option("--threads", o.threads, "worker threads (default: hardware concurrency)")
        ->envname("QWORK_THREADS")
        ->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "sample ancilla series for every direction and temperature");
  add_common(simulate, false);

  std::string series_path, run_dir;
  std::vector<double> init_omegas;
  auto* fit = app.add_subcommand("fit", "fit the damped four-tone model to one series or a whole run");
  add_common(fit, false);
  auto* fit_src = fit->add_option_group("source");
  fit_src->add_option("--series", series_path, "single series CSV")->check(CLI::ExistingFile);
  fit_src->add_option("--run", run_dir, "run directory produced by simulate")->check(CLI::ExistingDirectory);
  fit_src->require_option(1);
  fit->add_option("--init-omegas", init_omegas, "four fallback seed frequencies in kHz")->expected(kTones);

  std::string forward_fit, backward_fit;
  double kT = -1.0, sigma_kT = 0.0;
  int trials = 1000;
  auto* verify = app.add_subcommand("verify", "Crooks and Jarzynski checks from forward/backward fits");
  add_common(verify, false);
  auto* verify_src = verify->add_option_group("source");
  verify_src->add_option("--run", run_dir, "run directory with fits")->check(CLI::ExistingDirectory);
  auto* fwd = verify_src->add_option("--forward", forward_fit, "forward fit JSON");
  auto* bwd = verify_src->add_option("--backward", backward_fit, "backward fit JSON");
  fwd->needs(bwd);
  bwd->needs(fwd);
  verify_src->require_option(1, 2);
  verify->add_option("--kT", kT, "preparation kT/h in kHz for the Jarzynski columns")->check(CLI::NonNegativeNumber);
  verify->add_option("--sigma-kT", sigma_kT, "uncertainty of --kT")->check(CLI::NonNegativeNumber);
  verify->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::Range(100, 100000000));

  auto* qpt = app.add_subcommand("qpt", "process tomography of the forward and backward quench");
  add_common(qpt, false);

  auto* report = app.add_subcommand("report", "summarize a completed run");
  report->add_option("run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  auto* run = app.add_subcommand("run", "all stages: simulate, fit, verify, qpt, report");
  add_common(run, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const int threads = o.threads > 0 ? o.threads : default_threads();
  try {
    if (*simulate || *run) {
      if (o.out.empty()) throw CLI::RequiredError("--out");
      const ExperimentConfig c = effective_config(o);
      if (*run) {
        run_all(c, o.out, threads);
        std::cout << read_file(fs::path(o.out) / kReportText);
      } else {
        timed_stage(o.out, c, "simulate", [&] { return simulate_stage(c, o.out, threads); });
        std::cout << "wrote " << all_series(c).size() << " series to " << o.out << "\n";
      }
    } else if (*fit) {
      if (!run_dir.empty()) {
        const ExperimentConfig c = run_config(run_dir);
        timed_stage(run_dir, c, "fit", [&] { return fit_stage(run_dir, threads); });
        std::cout << "fitted " << all_series(c).size() << " series in " << run_dir << "\n";
      } else {
        if (o.out.empty()) throw CLI::RequiredError("--out");
        std::optional<std::array<double, kTones>> fallback;
        if (!init_omegas.empty()) fallback = parse_omegas(init_omegas);
        else if (!o.config.empty()) fallback = protocol_omegas(effective_config(o).protocol(Direction::Forward));
        const auto s = load_series(series_path);
        FitModel m;
        try {
          m = fit_series(s, fallback);
        } catch (const FitError& e) {
          const auto& b = e.best_so_far();
          std::cerr << "qwork: " << e.what() << "\n  best so far: gamma " << b.gamma << " /ms, rms "
                    << b.residual_rms << ", omegas";
          for (const auto& t : b.tones) std::cerr << " " << t.omega;
          std::cerr << " kHz\n";
          return kExitDomain;
        }
        json j = {{"source", fs::path(series_path).filename().string()}, {"fit", fit_to_json(m)}};
        try {
          j["distribution"] = distribution_to_json(distribution_from_fit(m));
        } catch (const std::domain_error& e) {
          j["distribution"] = nullptr;
          j["warning"] = e.what();
        }
        write_atomic(o.out, dump(j));
        std::cout << "residual rms " << m.residual_rms << " after " << m.iterations << " iterations\n";
      }
    } else if (*verify) {
      if (!run_dir.empty()) {
        const ExperimentConfig c = run_config(run_dir);
        timed_stage(run_dir, c, "verify", [&] { return verify_stage(run_dir); });
        std::cout << "verified " << c.temperatures.size() << " temperatures in " << run_dir << "\n";
      } else {
        if (o.out.empty()) throw CLI::RequiredError("--out");
        for (const auto& f : {forward_fit, backward_fit})
          if (!fs::exists(f)) throw std::runtime_error("cannot open " + f);
        const ExperimentConfig c = effective_config(o);
        std::optional<TemperatureSetting> t;
        if (kT >= 0.0) {
          std::ostringstream label;
          label << kT;
          t = TemperatureSetting{label.str(), kT, sigma_kT};
        }
        std::vector<CrooksPoint> pts;
        const json j = verify_pair(load_fit(forward_fit), load_fit(backward_fit), c.protocol(Direction::Forward), t,
                                   trials, c.seed, &pts);
        write_atomic(o.out, dump(j));
        if (!pts.empty())
          write_atomic(fs::path(o.out).parent_path() / "crooks_points.csv", crooks_points_to_csv(pts));
        if (j.contains("crooks") && j["crooks"].contains("warning"))
          std::cerr << "qwork: warning: " << j["crooks"]["warning"].get<std::string>() << "\n";
        std::cout << j.dump(2) << "\n";
      }
    } else if (*qpt) {
      if (o.out.empty()) throw CLI::RequiredError("--out");
      const ExperimentConfig c = effective_config(o);
      const auto files = qpt_stage(c, o.out);
      std::cout << read_file(fs::path(o.out) / files.front());
    } else if (*report) {
      const ExperimentConfig c = run_config(run_dir);
      try {
        timed_stage(run_dir, c, "report", [&] { return report_stage(run_dir); });
      } catch (const StageError&) {
        std::cout << read_file(fs::path(run_dir) / kReportText);
        throw;
      }
      std::cout << read_file(fs::path(run_dir) / kReportText);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "qwork: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "qwork: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "qwork: " << e.what() << "\n";
    return kExitDomain;
  }
  return 0;
}
