// Named experiments: JSON specs, a runner that writes the run artefacts
// (manifest, series CSV, verdict, plots), and a parallel sweep with a summary
// table.
//
// Artefacts of one run, inside <root>/<output_dir>:
//   manifest.json   resolved spec, versions, timings, outcome
//   series.csv      "# fef-series v1", then one DiagnosticsRecord per row
//   verdict.txt     one law per line: name, verdict, slack, measured, bound
//   *.svg           with plots on
//   last_state.csv  node coordinates, only after an abort
#pragma once

#include "fef/diagnostics.hpp"
#include "fef/exact_solutions.hpp"
#include "fef/flow.hpp"
#include "fef/svg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fef {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSeriesHeader = "# fef-series v1";
inline constexpr const char* kSummaryHeader = "# fef-summary v1";

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GeneratorKind { circle, lemniscate, perturbed_circle, ellipse };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::circle;
  int omega = 1;          // circle and perturbed_circle
  double scale = 1;       // rho0, h0, or the ellipse semi-axis along x
  double minor = 0.5;     // ellipse semi-axis along y
  double t0 = 0;          // start time along an exact solution
  std::vector<RadialMode<double>> modes;
  bool random_phases = false;  // mode phases drawn from the spec seed

  bool operator==(const GeneratorSpec&) const = default;
};

/// Extra record times g, g r, g r^2, ... merged into the flow schedule; used
/// to resolve the early transient on long runs.
struct GeometricRecords {
  double first = 0;  // 0 disables
  double factor = 2;

  bool operator==(const GeometricRecords&) const = default;
};

struct ExperimentSpec {
  std::string name;
  GeneratorSpec generator;
  FlowConfig flow;
  GeometricRecords geometric_records;
  std::string output_dir;  // relative to the run root; defaults to name
  std::vector<std::string> laws;
  std::uint64_t seed = 0;
  bool plots = false;
  int snapshots = 5;
  std::string refinement_group;  // sweep members sharing a group form a dt study

  bool operator==(const ExperimentSpec&) const = default;
};

/// Laws understood by evaluate_laws.
const std::vector<std::string>& known_laws();

void validate(const ExperimentSpec& spec);

std::string spec_to_json(const ExperimentSpec& spec, int indent = 2);
ExperimentSpec spec_from_json(std::string_view text);
ExperimentSpec load_spec(const std::filesystem::path& file);
/// Reconstructs the spec echoed in a manifest.json.
ExperimentSpec spec_from_manifest(const std::filesystem::path& manifest);

struct InitialData {
  Curve curve;
  double eps0 = 0;
};

InitialData initial_curve(const ExperimentSpec& spec);

/// Flow config with the geometric record times merged in.
FlowConfig resolved_flow(const ExperimentSpec& spec);

/// Quantities that need curves rather than records, collected during a run.
struct RunObservations {
  Curve initial;
  Curve final;
  double max_image_deviation = 0;  // rescaled curve against the rescaled initial curve
  std::vector<svg::Snapshot> snapshots;
};

std::vector<LawCheck> evaluate_laws(const ExperimentSpec& spec, const Series& series, const RunObservations& obs);

void write_series_csv(std::ostream& os, const Series& series);
Series read_series_csv(std::istream& is);
void write_verdict(std::ostream& os, const std::vector<LawCheck>& checks, Verdict overall_verdict);

struct RunOptions {
  std::filesystem::path root = ".";
  std::optional<bool> plots;  // overrides spec.plots
  bool write = true;          // false keeps everything in memory
};

enum class RunOutcome { completed, aborted, skipped };

const char* to_string(RunOutcome o);

struct ExperimentResult {
  std::string name;
  Verdict verdict = Verdict::inconclusive;
  RunOutcome outcome = RunOutcome::completed;
  std::string message;
  std::vector<LawCheck> checks;
  Series series;
  double eps0 = 0;
  double wall_seconds = 0;
  std::filesystem::path directory;
};

/// Simulation aborts give an inconclusive verdict; I/O failures throw.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Exit status for a verdict: pass 0, fail 1, inconclusive 2.
int exit_code(Verdict v);

struct SweepRow {
  std::string name;
  std::string status;  // completed, aborted, skipped or error
  Verdict verdict = Verdict::inconclusive;
  std::string message;
  std::size_t records = 0;
  double final_t = 0;
  double final_length = 0;
  double eps0 = 0;
  double eps_final = 0;
  double dt = 0;
  std::string refinement_group;
  std::optional<double> observed_order;
  std::vector<LawCheck> checks;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // in input order
  std::string summary_csv;
};

/// Runs the specs on up to `parallelism` threads. Names must be unique. A
/// spec that throws yields an "error" row; the summary is still produced and,
/// with options.write, saved as <root>/summary.csv.
SweepResult sweep(const std::vector<ExperimentSpec>& specs, int parallelism, const RunOptions& options = {});

/// Observed order from the final lengths of each refinement group: for
/// consecutive dt triples, log(|L1 - L2| / |L2 - L3|) / log(dt1 / dt2), set on
/// the finest member of the triple.
void fill_observed_orders(std::vector<SweepRow>& rows);

std::string summary_csv(const std::vector<SweepRow>& rows);

/// All *.json specs in a directory, sorted by file name.
std::vector<ExperimentSpec> load_spec_dir(const std::filesystem::path& dir);

}  // namespace fef
