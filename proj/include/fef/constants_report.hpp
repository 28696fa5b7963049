// Tabulation of the theory constants over a range of turning numbers.
#pragma once

#include <string>

namespace fef {

/// One row per omega in [1, omega_max]: values, residuals and the binding
/// constraint for eps_1.
std::string constants_csv(int omega_max);

/// The same table for reading, with the provenance of every constant.
std::string constants_report(int omega_max);

}  // namespace fef
