// Post-processing of diagnostic series: residuals against the length law and
// the evolution identities, decay envelopes, power-law fits and image
// distances.
#pragma once

#include "fef/curve.hpp"
#include "fef/flow.hpp"
#include "fef/record.hpp"
#include "fef/theory_constants.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace fef {

using Series = std::vector<DiagnosticsRecord>;

enum class Verdict { pass, fail, inconclusive, informational };

const char* to_string(Verdict v);

/// One asserted law: measured value against its bound. `slack` is
/// 1 - measured/bound, positive when the law holds with margin.
struct LawCheck {
  std::string law;
  Verdict verdict = Verdict::inconclusive;
  double measured = 0;
  double bound = 0;
  double slack = 0;
  std::string note;
};

LawCheck make_check(std::string law, double measured, double bound, std::string note = {});

/// Combined verdict: fail if any check fails, pass if all asserted checks
/// pass, inconclusive when nothing was asserted.
Verdict overall(const std::vector<LawCheck>& checks);

struct PowerFit {
  double exponent = 0;
  double log_prefactor = 0;
  double r_squared = 0;
  std::size_t points = 0;
};

/// Least squares for log y = log c + p log x over points with x, y > 0.
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct LengthLawResidual {
  double max_ratio = 0;         // max |L^4 - L0^4 - 32 w^4 pi^4 t| / max(t sigma C_hat, floor)
  double max_abs_residual = 0;
  double worst_t = 0;
  double sigma = 0;             // max eps over the series
  double c_hat = 0;
  double exponent = 0;          // tail fit of L against t + t0
  double raw_exponent = 0;      // tail fit of L against t
  double virtual_origin = 0;    // t0 from a linear fit of L^4 on the tail
};

/// Rejects series with fewer than 10 records. The tail is the last half of
/// the records with t > 0.
LengthLawResidual length_law_residual(const Series& series, int omega, double floor = 1e-300);

/// Closed-form right sides of the evolution identities at one curve.
struct EvolutionRates {
  double energy = 0;   // -||F||^2
  double length = 0;   // -int k_s^2 + 1/2 int k^4
  double ks_l2sq = 0;  // -2 int k_sss^2 + 5 int k_ss^2 k^2 - 5/3 int k_s^4 - 11/2 int k_s^2 k^4
};

template <typename Scalar>
EvolutionRates evolution_rates(const GeometricQuantities<Scalar>& g) {
  EvolutionRates r;
  const Field<Scalar> f = velocity_F(g);
  const Field<Scalar> k_edge = g.to_edges(g.k);
  r.energy = static_cast<double>(-g.integrate_nodes(f.square()));
  r.length = static_cast<double>(-g.integrate_edges(g.ks.square()) + Scalar(0.5) * g.integrate_nodes(g.k.square().square()));
  r.ks_l2sq = static_cast<double>(
      -Scalar(2) * g.integrate_edges(g.ksss.square()) + Scalar(5) * g.integrate_nodes(g.kss.square() * g.k.square()) -
      Scalar(5) / Scalar(3) * g.integrate_edges(g.ks.square().square()) -
      Scalar(5.5) * g.integrate_edges(g.ks.square() * k_edge.square().square()));
  return r;
}

/// -(F_ss + F k^2) at the nodes.
template <typename Scalar>
Field<Scalar> curvature_rate(const GeometricQuantities<Scalar>& g) {
  const Field<Scalar> f = velocity_F(g);
  const Field<Scalar> fss = g.d_edge_to_node(g.d_node_to_edge(f));
  return -(fss + f * g.k.square());
}

struct IdentityResidual {
  double measured = 0;   // centred difference
  double predicted = 0;  // closed form at the middle state
  double absolute = 0;
  double relative = 0;   // absolute / max(|predicted|, floor)
};

inline IdentityResidual compare_rates(double measured, double predicted, double floor) {
  IdentityResidual r;
  r.measured = measured;
  r.predicted = predicted;
  r.absolute = std::abs(measured - predicted);
  r.relative = r.absolute / std::max(std::abs(predicted), floor);
  return r;
}

struct EvolutionResiduals {
  IdentityResidual energy;
  IdentityResidual length;
  IdentityResidual ks_l2sq;
  IdentityResidual curvature;  // discrete L2 norms of the node fields
  double dt = 0;
};

/// Takes two fixed steps of `dt` from `state` with redistribution off and
/// compares centred differences with the identities at the middle state.
///
/// F_ss is a sixth arclength derivative of the positions, so rounding of the
/// nodes is amplified like h^-6; at N ~ 1000 double precision already costs
/// several percent in the curvature residual. Use Scalar = long double there.
template <typename Scalar>
EvolutionResiduals evolution_residuals(const FlowState<Scalar>& state, const FlowConfig& config, double dt,
                                       double floor = 1e-12) {
  FlowConfig cfg = config;
  cfg.dt_policy = StepPolicy::fixed;
  cfg.dt = dt;
  cfg.redistribution = Redistribution::off;
  cfg.local_error_tolerance = 0;
  FlowState<Scalar> s0 = state;
  s0.next_dt = 0;
  const FlowState<Scalar> s1 = step(s0, cfg);
  const FlowState<Scalar> s2 = step(s1, cfg);
  const GeometryOptions opts = cfg.geometry();
  const auto g0 = compute_geometry(s0.curve, opts);
  const auto g1 = compute_geometry(s1.curve, opts);
  const auto g2 = compute_geometry(s2.curve, opts);
  const Scalar h = Scalar(2) * Scalar(dt);

  const EvolutionRates pred = evolution_rates(g1);
  const auto energy = [](const GeometricQuantities<Scalar>& g) { return Scalar(0.5) * g.integrate_nodes(g.k.square()); };
  const auto ks2 = [](const GeometricQuantities<Scalar>& g) { return g.integrate_edges(g.ks.square()); };

  EvolutionResiduals out;
  out.dt = dt;
  out.energy = compare_rates(static_cast<double>((energy(g2) - energy(g0)) / h), pred.energy, floor);
  out.length = compare_rates(static_cast<double>((g2.length - g0.length) / h), pred.length, floor);
  out.ks_l2sq = compare_rates(static_cast<double>((ks2(g2) - ks2(g0)) / h), pred.ks_l2sq, floor);

  const Field<Scalar> measured_k = (g2.k - g0.k) / h;
  const Field<Scalar> predicted_k = curvature_rate(g1);
  out.curvature.measured = static_cast<double>(std::sqrt(g1.integrate_nodes(measured_k.square())));
  out.curvature.predicted = static_cast<double>(std::sqrt(g1.integrate_nodes(predicted_k.square())));
  out.curvature.absolute = static_cast<double>(std::sqrt(g1.integrate_nodes((measured_k - predicted_k).square())));
  out.curvature.relative = out.curvature.absolute / std::max(out.curvature.predicted, floor);
  return out;
}

/// The k_s identity part of evolution_residuals.
template <typename Scalar>
IdentityResidual ks_identity_residual(const FlowState<Scalar>& state, const FlowConfig& config, double dt,
                                      double floor = 1e-12) {
  return evolution_residuals(state, config, dt, floor).ks_l2sq;
}

/// Copy of a double state at extended precision.
template <typename Scalar>
FlowState<Scalar> promote(const FlowState<double>& s) {
  FlowState<Scalar> out;
  out.curve = ClosedCurve<Scalar>(s.curve.points().template cast<Scalar>());
  out.t = s.t;
  out.step_count = s.step_count;
  out.last_dt = s.last_dt;
  return out;
}

/// Symmetric Hausdorff distance between the polygons, point to polyline,
/// divided by the largest distance of a reference node from the reference
/// centre of mass.
double image_deviation(const Curve& curve, const Curve& reference);

struct DecayReport {
  bool hypothesis = false;  // eps(0) <= eps_2
  std::vector<LawCheck> checks;
  PowerFit eps_fit;
  PowerFit q_fit;
};

struct DecayOptions {
  double slack = 0.05;
  double q_floor = 1e-12;     // relative to Q(0): roundoff floor for monotonicity
  double q_absolute_floor = 1e-22;  // Q of a round circle at roundoff
  double kbar_slack = 0.02;
  double kbar_floor = 1e-9;   // absolute, for ||Lk - 2 w pi|| at roundoff level
};

/// Envelope and monotonicity checks of the decay statement. When eps(0)
/// exceeds eps_2 every check is downgraded to informational.
DecayReport decay_report(const Series& series, const TheoryConstants<long double>& constants,
                         const DecayOptions& options = {});

}  // namespace fef
