// fef: run experiment specs, sweeps, the constants table and the acceptance
// suite from the command line.
#include "fef/acceptance.hpp"
#include "fef/constants_report.hpp"
#include "fef/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr const char* kOutputEnv = "FEF_OUTPUT_DIR";
constexpr int kErrorExit = 3;

struct Overrides {
  std::optional<long> nodes;
  std::optional<double> t_end;
  std::optional<double> dt;
  bool plots = false;

  void add_to(CLI::App* app) {
    app->add_option("--nodes", nodes, "override flow.nodes")->check(CLI::PositiveNumber);
    app->add_option("--t-end", t_end, "override flow.t_end")->check(CLI::NonNegativeNumber);
    app->add_option("--dt", dt, "override flow.dt")->check(CLI::PositiveNumber);
    app->add_flag("--plots", plots, "write SVG plots and snapshots");
  }

  void apply(fef::ExperimentSpec& spec) const {
    if (nodes) spec.flow.nodes = *nodes;
    if (t_end) spec.flow.t_end = *t_end;
    if (dt) spec.flow.dt = *dt;
    if (plots) spec.plots = true;
  }
};

// --out, then the environment, then ./fef-out.
std::filesystem::path output_root(const std::string& out) {
  if (!out.empty()) return out;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return "fef-out";
}

int worst_exit(const std::vector<fef::SweepRow>& rows) {
  int code = 0;
  for (const fef::SweepRow& r : rows) {
    if (r.status == "error" || r.verdict == fef::Verdict::fail) return 1;
    if (r.verdict != fef::Verdict::pass) code = 2;
  }
  return code;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free elastic flow simulator and verification harness"};
  app.set_version_flag("--version", fef::kVersion);
  app.require_subcommand(1);
  std::string out;

  auto* simulate = app.add_subcommand("simulate", "run one experiment spec");
  std::string spec_file;
  simulate->add_option("spec-file", spec_file, "JSON experiment spec")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out, std::string("output root (default $") + kOutputEnv + " or ./fef-out)");
  Overrides sim_overrides;
  sim_overrides.add_to(simulate);

  auto* sweep = app.add_subcommand("sweep", "run every *.json spec in a directory");
  std::string spec_dir;
  int parallel = 1;
  sweep->add_option("dir", spec_dir, "directory of specs")->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--out", out, "output root");
  sweep->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
  Overrides sweep_overrides;
  sweep_overrides.add_to(sweep);

  auto* constants = app.add_subcommand("constants", "tabulate the theory constants");
  int omega_max = 5;
  bool report = false;
  constants->add_option("--omega-max", omega_max, "largest turning number")->check(CLI::PositiveNumber);
  constants->add_flag("--report", report, "print the annotated report instead of CSV");
  constants->add_option("--out", out, "also write constants.csv and constants.txt here");

  auto* verify = app.add_subcommand("verify-all", "run the acceptance suite");
  bool verify_plots = false;
  std::vector<int> only;
  verify->add_option("--out", out, "output root for run artefacts");
  verify->add_flag("--plots", verify_plots, "write SVG plots");
  verify->add_option("--only", only, "criterion ids to run")->check(CLI::Range(1, 9));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kErrorExit;
  }

  try {
    if (*simulate) {
      fef::ExperimentSpec spec = fef::load_spec(spec_file);
      sim_overrides.apply(spec);
      const fef::ExperimentResult r = fef::run_experiment(spec, {output_root(out), std::nullopt, true});
      fef::write_verdict(std::cout, r.checks, r.verdict);
      std::cout << "artefacts in " << r.directory.string() << "\n";
      if (r.outcome != fef::RunOutcome::completed) std::cerr << to_string(r.outcome) << ": " << r.message << "\n";
      return fef::exit_code(r.verdict);
    }
    if (*sweep) {
      std::vector<fef::ExperimentSpec> specs = fef::load_spec_dir(spec_dir);
      for (fef::ExperimentSpec& s : specs) sweep_overrides.apply(s);
      const std::filesystem::path root = output_root(out);
      const fef::SweepResult r = fef::sweep(specs, parallel, {root, std::nullopt, true});
      std::cout << r.summary_csv;
      std::cout << "summary in " << (root / "summary.csv").string() << "\n";
      return worst_exit(r.rows);
    }
    if (*constants) {
      const std::string csv = fef::constants_csv(omega_max);
      const std::string text = fef::constants_report(omega_max);
      std::cout << (report ? text : csv);
      if (!out.empty()) {
        std::filesystem::create_directories(out);
        write_text(std::filesystem::path(out) / "constants.csv", csv);
        write_text(std::filesystem::path(out) / "constants.txt", text);
      }
      return 0;
    }
    if (*verify) {
      fef::AcceptanceOptions options;
      options.output = output_root(out);
      options.plots = verify_plots;
      options.only = only;
      const auto results = fef::run_acceptance(options, std::cout);
      int failed = 0;
      for (const auto& r : results) failed += r.pass ? 0 : 1;
      std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
      return failed ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kErrorExit;
  }
  return 0;
}
