// The acceptance suite: nine criteria, each reduced to pass/fail with a short
// measured summary.
#pragma once

#include "fef/experiment.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fef {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

/// The experiments behind criteria 1-5; specs/ holds the same specs as files.
std::vector<ExperimentSpec> acceptance_specs();

struct AcceptanceOptions {
  std::optional<std::filesystem::path> output;  // run artefacts; nothing written when empty
  bool plots = true;
  std::vector<int> only;                        // criterion ids; empty runs all
};

/// Runs the criteria, printing one line per criterion to `log` as each finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& log);

std::string format_result(const CriterionResult& r);

}  // namespace fef
