// qsdc: command-line runner for protocol simulations and security sweeps.
//
//   qsdc run     --config run.cfg [--seed N] [--out report.json] [--strict]
//   qsdc batch   --config run.cfg --trials 100 [--workers 4] [--out batch.json]
//   qsdc sweep   --kind imax_vs_D --grid 0:0.5:0.1 [--family presets] [--out curve.csv]
//   qsdc attacks list
//
// Exit codes: 0 success, 1 aborted run (with --strict), 2 configuration error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "qsdc/qsdc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAborted = 1;
constexpr int kExitConfig = 2;

qsdc::RunConfig load(const std::string& path) {
  return path.empty() ? qsdc::RunConfig{} : qsdc::parse_config(path);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw qsdc::ConfigError("--out", "cannot write '" + out + "'");
  f << text;
}

void list_attacks() {
  std::cout << "legs: E1 (server -> receiver), E2 (receiver -> sender), E3 (sender -> server)\n"
            << "attack.kind:\n"
            << "  none\n"
            << "  intercept_resend   basis:{z,x,random}\n"
            << "  trojan             k:<extra photons>, probe:{0,1,+,-}\n"
            << "  collective         F:<fidelity>, geometry:{";
  for (std::size_t i = 0; i < qsdc::kPresetGeometries.size(); ++i) {
    std::cout << (i ? "," : "") << qsdc::geometry_name(qsdc::kPresetGeometries[i]);
  }
  std::cout << "}\n"
            << "sweep.family: orthonormal, basis_copy, phase_covariant, presets, free\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon QSDC network simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  bool timing = false;

  auto* run = app.add_subcommand("run", "Run the three-party subsystem once");
  run->add_option("--config", config_path, "Configuration file");
  run->add_option("--seed", seed, "Override the configured seed");
  run->add_option("--out", out, "Report path (default: stdout)");
  run->add_flag("--strict", strict, "Exit with 1 if the run aborts");
  run->add_flag("--timing", timing, "Include wall-clock time in the report");

  std::size_t trials = 100;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  auto* batch = app.add_subcommand("batch", "Run independent trials with derived seeds");
  batch->add_option("--config", config_path, "Configuration file");
  batch->add_option("--seed", seed, "Override the master seed");
  batch->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  batch->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  batch->add_option("--out", out, "Batch report path (default: stdout)");
  batch->add_flag("--strict", strict, "Exit with 1 if any trial aborts");
  batch->add_flag("--timing", timing, "Include wall-clock time per run");

  std::string kind;
  std::string grid;
  std::string family;
  std::optional<double> weight_x;
  auto* sweep = app.add_subcommand("sweep", "Emit an information/disturbance curve as CSV");
  sweep->add_option("--config", config_path, "Configuration file with sweep.* keys");
  sweep->add_option("--kind", kind, "imax_vs_D or holevo_vs_geometry");
  sweep->add_option("--grid", grid, "start:stop:step or comma list of D values");
  sweep->add_option("--family", family, "Attack family for imax_vs_D");
  sweep->add_option("--weight-x", weight_x, "Decoy weight in the detection probability");
  sweep->add_option("--out", out, "CSV path (default: stdout)");

  auto* attacks = app.add_subcommand("attacks", "Describe the available attacks");
  auto* attacks_list = attacks->add_subcommand("list", "List attack kinds and parameters");
  attacks->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (attacks_list->parsed()) {
      list_attacks();
      return kExitOk;
    }

    qsdc::RunConfig rc = load(config_path);
    if (seed) rc.protocol.seed = *seed;

    if (run->parsed()) {
      rc.protocol.validate();
      const qsdc::RunReport r = qsdc::run_subsystem(rc.protocol);
      emit(out, qsdc::report_to_json(r, timing).dump(2) + "\n");
      return strict && r.aborted() ? kExitAborted : kExitOk;
    }

    if (batch->parsed()) {
      rc.protocol.validate();
      const qsdc::BatchResult b = qsdc::run_batch(rc.protocol, trials, workers);
      emit(out, qsdc::batch_to_json(rc.protocol, b, timing).dump(2) + "\n");
      return strict && b.summary.aborted > 0 ? kExitAborted : kExitOk;
    }

    if (sweep->parsed()) {
      qsdc::SweepSpec spec = rc.sweep.value_or(qsdc::SweepSpec{});
      if (!kind.empty()) {
        if (kind == "imax_vs_D") {
          spec.kind = qsdc::SweepKind::ImaxVsD;
        } else if (kind == "holevo_vs_geometry") {
          spec.kind = qsdc::SweepKind::HolevoVsGeometry;
        } else {
          throw qsdc::ConfigError("--kind", "expected imax_vs_D or holevo_vs_geometry");
        }
      }
      if (!grid.empty()) spec.grid = qsdc::parse_grid("--grid", grid);
      if (!family.empty()) {
        const auto f = qsdc::parse_family(family);
        if (!f) throw qsdc::ConfigError("--family", "unknown family '" + family + "'");
        spec.family = *f;
      }
      if (weight_x) spec.weight_x = *weight_x;
      if (spec.grid.empty()) throw qsdc::ConfigError("--grid", "grid is empty");
      std::ostringstream csv;
      qsdc::write_csv(csv, qsdc::sweep_curve(spec));
      emit(out, csv.str());
      return kExitOk;
    }
  } catch (const qsdc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qsdc::ContractViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
