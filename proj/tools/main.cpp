#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rcae/run.hpp"

namespace {

constexpr const char* kVersion = "rcae 0.1.0";

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> dt;
  std::optional<std::string> estimators;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_scenario_knobs) {
  cmd->add_option("--config", o.config_path, "configuration file (key = value lines)");
  if (with_scenario_knobs) {
    cmd->add_option("--seed", o.seed, "RNG seed override");
    cmd->add_option("--duration", o.duration, "run length in seconds");
    cmd->add_option("--dt", o.dt, "sample interval in seconds");
  }
  cmd->add_option("--estimators", o.estimators,
                  "comma-separated subset of rcae,mekf,dead_reckon");
}

rcae::HarnessConfig build_config(const CommonOpts& o) {
  rcae::HarnessConfig cfg;
  if (!o.config_path.empty()) cfg = rcae::load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.duration) cfg.duration = *o.duration;
  if (o.dt) cfg.dt = *o.dt;
  if (o.estimators) rcae::apply_config_entry(cfg, "estimators", *o.estimators);
  cfg.validate();
  return cfg;
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rcae::ConfigError("cannot open output file '" + path + "'");
  writer(out);
  out.flush();
  if (!out) throw rcae::ConfigError("failed while writing '" + path + "'");
}

// Prints diagnostics; returns 3 when every estimator died, else 0.
int report(const rcae::RunResult& result) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& tr : result.traces) {
    for (const auto& note : tr.notes) {
      std::cerr << "warning: estimator " << tr.name << " froze (" << note << ")\n";
    }
  }
  if (result.all_frozen()) {
    std::cerr << "error: all estimators failed numerically\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attitude estimation testbed: adaptive estimator, Kalman baseline, "
               "dead reckoning"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);

  CommonOpts sim_opts;
  std::string sim_out, sim_export;
  CLI::App* sim = app.add_subcommand("simulate", "run the tumble scenario and write a CSV");
  add_common(sim, sim_opts, true);
  sim->add_option("--out", sim_out, "result CSV path")->required();
  sim->add_option("--export-log", sim_export, "also write the synthetic IMU log");

  CommonOpts rep_opts;
  std::string rep_log, rep_out;
  CLI::App* rep = app.add_subcommand("replay", "run the estimators over a logged IMU stream");
  add_common(rep, rep_opts, false);
  rep->add_option("--log", rep_log, "input IMU log CSV")->required();
  rep->add_option("--out", rep_out, "result CSV path")->required();

  CommonOpts cmp_opts;
  std::string cmp_dir;
  CLI::App* cmp = app.add_subcommand("compare", "run the scenario and write per-estimator "
                                     "CSVs plus a summary table");
  add_common(cmp, cmp_opts, true);
  cmp->add_option("--out-dir", cmp_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      const rcae::HarnessConfig cfg = build_config(sim_opts);
      const auto records = rcae::synthesize_log(cfg);
      const rcae::RunResult result = rcae::replay_records(records, cfg);
      write_file(sim_out, [&](std::ostream& os) { rcae::write_run_csv(result, os); });
      if (!sim_export.empty()) {
        write_file(sim_export, [&](std::ostream& os) { rcae::write_imu_log(records, os); });
      }
      rcae::write_summary(result, std::cout);
      return report(result);
    }

    if (rep->parsed()) {
      const rcae::HarnessConfig cfg = build_config(rep_opts);
      std::ifstream in(rep_log, std::ios::binary);
      if (!in) throw rcae::MalformedRecord("cannot open input log '" + rep_log + "'");
      const auto records = rcae::read_imu_log(in);
      const rcae::RunResult result = rcae::replay_records(records, cfg);
      write_file(rep_out, [&](std::ostream& os) { rcae::write_run_csv(result, os); });
      rcae::write_summary(result, std::cout);
      return report(result);
    }

    if (cmp->parsed()) {
      const rcae::HarnessConfig cfg = build_config(cmp_opts);
      const rcae::RunResult result = rcae::run_scenario(cfg);
      std::filesystem::create_directories(cmp_dir);
      for (const auto& tr : result.traces) {
        write_file(cmp_dir + "/" + tr.name + ".csv",
                   [&](std::ostream& os) { rcae::write_run_csv(result, os, tr.name); });
      }
      write_file(cmp_dir + "/summary.txt",
                 [&](std::ostream& os) { rcae::write_summary(result, os); });
      rcae::write_summary(result, std::cout);
      return report(result);
    }

    std::cout << app.help();
    return 0;
  } catch (const rcae::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const rcae::MalformedRecord& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rcae::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
