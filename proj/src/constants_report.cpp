#include "fef/constants_report.hpp"

#include "fef/theory_constants.hpp"

#include <cstdio>
#include <sstream>

namespace fef {

namespace {

std::string g(long double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*Lg", digits, v);
  return buf;
}

void require_range(int omega_max) {
  if (omega_max < 1) throw ConstantsError("omega range must contain at least omega = 1");
}

}  // namespace

std::string constants_csv(int omega_max) {
  require_range(omega_max);
  std::ostringstream os;
  os << "# fef-constants v1\n";
  os << "omega,eps_star,eps_star_residual,eps_one,eps_one_binding,q_root,eps_two,eps_two_residual,"
        "eps_two_bracket,eps_two_non_binding,c_one,c_two,c_three\n";
  for (int w = 1; w <= omega_max; ++w) {
    const TheoryConstants<long double> tc = theory_constants(w);
    os << w << ',' << g(tc.eps_star.value) << ',' << g(tc.eps_star.residual, 3) << ',' << g(tc.eps_one.value) << ','
       << to_string(tc.eps_one_binding) << ',' << g(tc.q_root) << ',' << g(tc.eps_two.value) << ','
       << g(tc.eps_two.residual, 3) << ',' << g(tc.eps_two_bracket, 3) << ','
       << (tc.eps_two_non_binding ? "true" : "false") << ',' << g(tc.c_one.value) << ',' << g(tc.c_two.value) << ','
       << g(tc.c_three.value) << '\n';
  }
  return os.str();
}

std::string constants_report(int omega_max) {
  require_range(omega_max);
  std::ostringstream os;
  for (int w = 1; w <= omega_max; ++w) {
    const TheoryConstants<long double> tc = theory_constants(w);
    os << "omega = " << w << "\n";
    auto line = [&](const char* name, const ConstantEntry<long double>& e) {
      os << "  " << name << " = " << g(e.value, 12) << "   [" << e.provenance << "; residual " << g(e.residual, 3)
         << "]\n";
    };
    line("eps_*", tc.eps_star);
    line("eps_1", tc.eps_one);
    os << "        binding constraint: " << to_string(tc.eps_one_binding) << " (Q root " << g(tc.q_root, 12)
       << ", pi^4/6 " << g(kPi<long double> * kPi<long double> * kPi<long double> * kPi<long double> / 6, 12)
       << ")\n";
    line("eps_2", tc.eps_two);
    if (tc.eps_two_non_binding) {
      os << "        the decay condition already holds at eps_1; eps_2 is the supremum of (0, eps_1)\n";
    } else {
      os << "        bisection bracket " << g(tc.eps_two_bracket, 3) << "\n";
    }
    if (tc.eps_two_vacuous) os << "        vacuous: no admissible eps_2 found\n";
    line("c_1", tc.c_one);
    line("c_2", tc.c_two);
    line("c_3", tc.c_three);
  }
  return os.str();
}

}  // namespace fef
