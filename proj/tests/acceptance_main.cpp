// Runs all acceptance criteria; nonzero exit when any fails. Artefacts go to
// $FEF_OUTPUT_DIR when set.
#include "fef/acceptance.hpp"

#include <cstdlib>
#include <iostream>

int main() {
  fef::AcceptanceOptions options;
  if (const char* env = std::getenv("FEF_OUTPUT_DIR"); env && *env) options.output = std::filesystem::path(env) / "acceptance";
  const auto results = fef::run_acceptance(options, std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (failed ? std::to_string(failed) + " of 9 criteria failed" : std::string("all 9 criteria passed")) << "\n";
  return failed ? 1 : 0;
}
