// The explicit constant chain of the omega-circle stability estimate:
// thresholds eps_*, eps_1, eps_2, decay rate c_1, time scale c_2, prefactor
// c_3, and the callable forms C_hat, delta_*, Q.
//
// Evaluated in long double by default. Every closed form is paired with an
// independent bisection so callers can compare the two routes.
#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fef {

template <typename Scalar>
inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;

/// Lifespan computation refused (eps >= sigma, or non-positive input).
class ConstantsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_omega(int omega) {
  if (omega < 1) throw ConstantsError("omega must be a positive integer");
}

/// Bisection for an increasing function; returns the final bracket.
template <typename Scalar, typename Fn>
std::pair<Scalar, Scalar> bisect_increasing(Fn&& f, Scalar lo, Scalar hi, int max_iter = 400) {
  for (int i = 0; i < max_iter; ++i) {
    const Scalar mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    if (f(mid) <= Scalar(0)) lo = mid;
    else hi = mid;
  }
  return {lo, hi};
}

/// Stability threshold of the k_s energy. Uses the rationalised form of
/// sqrt(A^2 + 5/16) - A to avoid cancellation for large A = 11 omega^3 + 5 omega.
template <typename Scalar = long double>
Scalar eps_star(int omega) {
  require_omega(omega);
  const Scalar w = omega;
  const Scalar a = Scalar(11) * w * w * w + Scalar(5) * w;
  const Scalar c = Scalar(5) / Scalar(16);
  const Scalar d = c / (std::sqrt(a * a + c) + a);
  return Scalar(8) * kPi<Scalar> * kPi<Scalar> * kPi<Scalar> / Scalar(25) * d * d;
}

/// 1/16 - 5/(8 pi^3) x^2 - (11 omega^3 + 5 omega)/sqrt(2 pi^3) x.
template <typename Scalar = long double>
Scalar eps_star_quadratic(Scalar x, int omega) {
  const Scalar w = omega;
  const Scalar pi3 = kPi<Scalar> * kPi<Scalar> * kPi<Scalar>;
  return Scalar(1) / Scalar(16) - Scalar(5) / (Scalar(8) * pi3) * x * x -
         (Scalar(11) * w * w * w + Scalar(5) * w) / std::sqrt(Scalar(2) * pi3) * x;
}

/// Square of the positive root of the quadratic above, by bisection.
template <typename Scalar = long double>
Scalar eps_star_by_bisection(int omega) {
  require_omega(omega);
  // The quadratic is decreasing on x > 0 and equals 1/16 at 0.
  auto neg = [&](Scalar x) { return -eps_star_quadratic<Scalar>(x, omega); };
  Scalar hi = 1;
  while (neg(hi) <= 0) hi *= 2;
  const auto [lo, up] = bisect_increasing<Scalar>(neg, Scalar(0), hi);
  const Scalar root = lo + (up - lo) / 2;
  return root * root;
}

template <typename Scalar = long double>
Scalar c_hat(Scalar sigma, int omega) {
  if (sigma < Scalar(0)) throw ConstantsError("C_hat needs sigma >= 0");
  const Scalar w = omega;
  const Scalar pi3 = kPi<Scalar> * kPi<Scalar> * kPi<Scalar>;
  return Scalar(4) + sigma / (Scalar(4) * pi3) + std::sqrt(Scalar(8) * w * w / pi3) * std::sqrt(sigma) +
         Scalar(12) * w * w;
}

template <typename Scalar = long double>
Scalar omega_pi_4(int omega) {  // (omega pi)^4
  const Scalar wp = Scalar(omega) * kPi<Scalar>;
  return wp * wp * wp * wp;
}

template <typename Scalar = long double>
struct Lifespan {
  Scalar value = 0;
  bool at_boundary = false;  // eps == sigma
};

/// Positive root of P(t) = eps (1 + (sigma C_hat + 32 omega^4 pi^4) t)^(3/4) - sigma.
template <typename Scalar = long double>
Lifespan<Scalar> delta_star(Scalar eps, Scalar sigma, int omega) {
  require_omega(omega);
  if (!(eps > Scalar(0))) throw ConstantsError("delta_star needs eps > 0");
  if (eps > sigma) throw ConstantsError("delta_star undefined for eps > sigma");
  if (eps == sigma) return {Scalar(0), true};
  const Scalar rate = sigma * c_hat(sigma, omega) + Scalar(32) * omega_pi_4<Scalar>(omega);
  return {(std::pow(sigma / eps, Scalar(4) / Scalar(3)) - Scalar(1)) / rate, false};
}

template <typename Scalar = long double>
Scalar delta_star_polynomial(Scalar t, Scalar eps, Scalar sigma, int omega) {
  const Scalar rate = sigma * c_hat(sigma, omega) + Scalar(32) * omega_pi_4<Scalar>(omega);
  return eps * std::pow(Scalar(1) + rate * t, Scalar(3) / Scalar(4)) - sigma;
}

template <typename Scalar = long double>
Scalar q_poly(Scalar x, int omega) {
  if (x < Scalar(0)) throw ConstantsError("Q polynomial needs x >= 0");
  const Scalar w = omega;
  const Scalar pi = kPi<Scalar>;
  const Scalar root2pi = std::sqrt(Scalar(2) * pi);
  return Scalar(3) / (Scalar(8) * pi * pi) * x * x + Scalar(6) * w / root2pi * x * std::sqrt(x) +
         Scalar(18) * w * w * pi * x + Scalar(48) * w * w * w * pi * pi * pi / root2pi * std::sqrt(x);
}

/// (1/15)(2 omega pi)^4, the level Q must stay below.
template <typename Scalar = long double>
Scalar q_level(int omega) {
  return Scalar(16) * omega_pi_4<Scalar>(omega) / Scalar(15);
}

/// The unique positive root of Q(x) = (1/15)(2 omega pi)^4.
template <typename Scalar = long double>
Scalar q_root(int omega) {
  require_omega(omega);
  const Scalar level = q_level<Scalar>(omega);
  auto f = [&](Scalar x) { return q_poly(x, omega) - level; };
  Scalar hi = 1;
  int guard = 0;
  while (f(hi) <= 0) {
    hi *= 2;
    if (++guard > 200) throw ConstantsError("Q root bracket not found below " + std::to_string(double(hi)));
  }
  const auto [lo, up] = bisect_increasing<Scalar>(f, Scalar(0), hi);
  return lo;
}

enum class EpsOneBinding { eps_star, pi4_over_6, q_root, c_hat_cap };

inline const char* to_string(EpsOneBinding b) {
  switch (b) {
    case EpsOneBinding::eps_star: return "eps_star";
    case EpsOneBinding::pi4_over_6: return "pi^4/6";
    case EpsOneBinding::q_root: return "Q_root";
    case EpsOneBinding::c_hat_cap: return "C_hat_cap";
  }
  return "?";
}

template <typename Scalar = long double>
struct EpsOne {
  Scalar value = 0;
  EpsOneBinding binding = EpsOneBinding::eps_star;
  Scalar q_root = 0;
};

/// min{eps_*, pi^4/6, Q root}, lowered if needed so eps C_hat(eps) <= 16 omega^4 pi^4.
template <typename Scalar = long double>
EpsOne<Scalar> eps_one(int omega) {
  require_omega(omega);
  EpsOne<Scalar> out;
  out.q_root = q_root<Scalar>(omega);
  const Scalar candidates[] = {eps_star<Scalar>(omega), kPi<Scalar> * kPi<Scalar> * kPi<Scalar> * kPi<Scalar> / 6,
                               out.q_root};
  const EpsOneBinding tags[] = {EpsOneBinding::eps_star, EpsOneBinding::pi4_over_6, EpsOneBinding::q_root};
  out.value = candidates[0];
  for (int i = 1; i < 3; ++i) {
    if (candidates[i] < out.value) {
      out.value = candidates[i];
      out.binding = tags[i];
    }
  }
  const Scalar cap = Scalar(16) * omega_pi_4<Scalar>(omega);
  auto g = [&](Scalar x) { return x * c_hat(x, omega) - cap; };
  if (g(out.value) > 0) {
    out.value = bisect_increasing<Scalar>(g, Scalar(0), out.value).first;
    out.binding = EpsOneBinding::c_hat_cap;
  }
  return out;
}

template <typename Scalar = long double>
Scalar c_two(Scalar eps1, int omega) {
  return eps1 * c_hat(eps1, omega) + Scalar(32) * omega_pi_4<Scalar>(omega);
}

template <typename Scalar = long double>
Scalar c_one(Scalar eps1, int omega) {
  return Scalar(48) * omega_pi_4<Scalar>(omega) / (Scalar(5) * c_two(eps1, omega));
}

/// (1/(64 pi^6)) (eps1/(8 pi^2) + 2 omega^2 pi^2)^3, the factor multiplying eps(0).
template <typename Scalar = long double>
Scalar decay_prefactor(Scalar eps1, int omega) {
  const Scalar pi2 = kPi<Scalar> * kPi<Scalar>;
  const Scalar w = omega;
  const Scalar inner = eps1 / (Scalar(8) * pi2) + Scalar(2) * w * w * pi2;
  return inner * inner * inner / (Scalar(64) * pi2 * pi2 * pi2);
}

/// Left side minus one of the condition fixing eps_2. Non-positive means eps is
/// admissible; defined for 0 < eps <= eps1.
template <typename Scalar = long double>
Scalar eps_two_residual(Scalar eps, Scalar eps1, int omega) {
  const Scalar life = delta_star(eps, eps1, omega).value;
  const Scalar c2 = c_two(eps1, omega);
  return decay_prefactor(eps1, omega) * std::pow(Scalar(1) + life / c2, -c_one(eps1, omega)) - Scalar(1);
}

template <typename Scalar = long double>
struct EpsTwo {
  Scalar value = 0;
  Scalar bracket = 0;        // certified width of the admissible/inadmissible bracket
  bool non_binding = false;  // condition holds on all of (0, eps1)
  bool vacuous = false;      // no admissible eps found
};

/// Largest admissible eps_2 in (0, eps1), by bisection on log eps. The endpoint
/// eps1 itself is excluded since its lifespan delta_*(eps1, eps1) is zero.
template <typename Scalar = long double>
EpsTwo<Scalar> eps_two(Scalar eps1, int omega) {
  require_omega(omega);
  EpsTwo<Scalar> out;
  out.non_binding = eps_two_residual(eps1, eps1, omega) <= 0;
  Scalar hi = eps1;
  Scalar lo = eps1 / 2;
  int guard = 0;
  while (eps_two_residual(lo, eps1, omega) > 0) {
    hi = lo;
    lo /= 1024;
    if (++guard > 400 || !(lo > std::numeric_limits<Scalar>::min())) {
      out.vacuous = true;
      return out;
    }
  }
  for (int i = 0; i < 400; ++i) {
    const Scalar mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (eps_two_residual(mid, eps1, omega) <= 0) lo = mid;
    else hi = mid;
  }
  out.value = lo;
  out.bracket = hi - lo;
  return out;
}

template <typename Scalar = long double>
struct ConstantEntry {
  Scalar value = 0;
  Scalar residual = 0;  // closed form vs independent route, or root residual
  const char* provenance = "";
};

template <typename Scalar = long double>
struct TheoryConstants {
  int omega = 1;
  ConstantEntry<Scalar> eps_star;
  ConstantEntry<Scalar> eps_one;
  ConstantEntry<Scalar> eps_two;
  ConstantEntry<Scalar> c_one;
  ConstantEntry<Scalar> c_two;
  ConstantEntry<Scalar> c_three;
  EpsOneBinding eps_one_binding = EpsOneBinding::eps_star;
  Scalar q_root = 0;
  Scalar eps_two_bracket = 0;
  bool eps_two_non_binding = false;
  bool eps_two_vacuous = false;

  Scalar C_hat(Scalar sigma) const { return c_hat(sigma, omega); }
  Lifespan<Scalar> delta_star(Scalar eps, Scalar sigma) const { return fef::delta_star(eps, sigma, omega); }
  Scalar Q(Scalar x) const { return q_poly(x, omega); }
};

template <typename Scalar = long double>
TheoryConstants<Scalar> theory_constants(int omega) {
  require_omega(omega);
  TheoryConstants<Scalar> tc;
  tc.omega = omega;

  const Scalar es = eps_star<Scalar>(omega);
  const Scalar es_root = eps_star_by_bisection<Scalar>(omega);
  tc.eps_star = {es, std::abs(es - es_root) / es, "closed form (rationalised); residual vs bisection root"};

  const EpsOne<Scalar> e1 = eps_one<Scalar>(omega);
  tc.eps_one = {e1.value, q_poly(e1.value, omega) - q_level<Scalar>(omega),
                "min of eps_star, pi^4/6, Q root (bisection); residual Q(eps1) - level"};
  tc.eps_one_binding = e1.binding;
  tc.q_root = e1.q_root;

  const Scalar c2 = c_two(e1.value, omega);
  tc.c_two = {c2, 0, "eps1 C_hat(eps1) + 32 omega^4 pi^4"};
  tc.c_one = {c_one(e1.value, omega), 0, "48 omega^4 pi^4 / (5 c2)"};

  const EpsTwo<Scalar> e2 = eps_two(e1.value, omega);
  tc.eps_two_bracket = e2.bracket;
  tc.eps_two_non_binding = e2.non_binding;
  tc.eps_two_vacuous = e2.vacuous;
  tc.eps_two = {e2.value, e2.vacuous ? Scalar(0) : eps_two_residual(e2.value, e1.value, omega),
                e2.non_binding ? "supremum of (0, eps1) (condition non-binding), bisection"
                               : "largest admissible value, bisection on log eps"};

  // eps(t) <= c3 (1 + c2 t / L0^4)^(-c1) <= c3 (1 + t / L0^4)^(-c1) since c2 >= 1.
  tc.c_three = {e2.value * decay_prefactor(e1.value, omega), 0,
                "eps2 (eps1/(8 pi^2) + 2 omega^2 pi^2)^3 / (64 pi^6)"};
  return tc;
}

}  // namespace fef
