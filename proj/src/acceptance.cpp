#include "fef/acceptance.hpp"

#include "fef/curve.hpp"
#include "fef/diagnostics.hpp"
#include "fef/exact_solutions.hpp"
#include "fef/flow.hpp"
#include "fef/theory_constants.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fef {

namespace {

constexpr double pi = std::numbers::pi;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ExperimentSpec circle_spec() {
  ExperimentSpec s;
  s.name = "circle-oracle-w1";
  s.generator.kind = GeneratorKind::circle;
  s.flow.nodes = 256;
  s.flow.t_end = 40;
  s.flow.cap_factor = 3000;
  s.flow.record_interval = 1;
  s.laws = {"circle_radius", "energy_monotone", "le_lower"};
  return s;
}

ExperimentSpec lemniscate_spec() {
  ExperimentSpec s;
  s.name = "lemniscate-selfsim";
  s.generator.kind = GeneratorKind::lemniscate;
  s.flow.nodes = 1024;
  s.flow.t_end = 1;
  s.flow.cap_factor = 1e5;
  s.flow.record_interval = 0.05;
  s.laws = {"lemniscate_scale", "lemniscate_image", "energy_monotone", "le_lower"};
  return s;
}

ExperimentSpec stability_spec() {
  ExperimentSpec s;
  s.name = "perturbed-w1-stability";
  s.generator.kind = GeneratorKind::perturbed_circle;
  s.generator.modes = {{2, 1e-4, 0.3}, {3, 1e-4 / 3, 1.1}};
  s.flow.nodes = 256;
  s.flow.t_end = 100;
  s.flow.cap_factor = 300;
  s.flow.record_interval = 0.5;
  s.geometric_records = {1e-3, 1.5};
  s.laws = {"length_law", "length_exponent", "decay",        "ks_monotone", "circle_deviation",
            "curvature_decay", "centre_drift", "energy_monotone", "le_lower"};
  return s;
}

ExperimentSpec double_circle_spec() {
  ExperimentSpec s;
  s.name = "perturbed-w2-monotone";
  s.generator.kind = GeneratorKind::perturbed_circle;
  s.generator.omega = 2;
  s.generator.modes = {{3, 1e-5, 0.3}};
  s.flow.nodes = 256;
  s.flow.t_end = 2;
  s.flow.cap_factor = 300;
  s.flow.record_interval = 0.05;
  s.laws = {"ks_monotone", "energy_monotone", "le_lower"};
  return s;
}

const LawCheck* find_check(const ExperimentResult& r, const std::string& law) {
  for (const LawCheck& c : r.checks) {
    if (c.law == law) return &c;
  }
  return nullptr;
}

// Every named law present and passing; the detail lists measured / bound.
bool laws_pass(const ExperimentResult& r, const std::vector<std::string>& laws, std::string& detail) {
  bool ok = r.outcome == RunOutcome::completed;
  if (!ok) detail += std::string(to_string(r.outcome)) + ": " + r.message + "; ";
  for (const std::string& law : laws) {
    const LawCheck* c = find_check(r, law);
    if (!c) {
      detail += law + " missing; ";
      ok = false;
      continue;
    }
    detail += law + " " + sci(c->measured) + "/" + sci(c->bound) + (c->verdict == Verdict::pass ? "" : " " + std::string(to_string(c->verdict))) + "; ";
    ok = ok && c->verdict == Verdict::pass;
  }
  return ok;
}

struct Context {
  const AcceptanceOptions& options;
  std::map<std::string, ExperimentResult> runs;

  const ExperimentResult& experiment(const ExperimentSpec& spec) {
    auto it = runs.find(spec.name);
    if (it != runs.end()) return it->second;
    RunOptions ro;
    ro.write = options.output.has_value();
    if (options.output) ro.root = *options.output;
    ro.plots = options.plots;
    return runs.emplace(spec.name, run_experiment(spec, ro)).first->second;
  }
};

CriterionResult circle_oracle(Context& ctx) {
  CriterionResult out{1, "circle oracle", false, {}, 0};
  const ExperimentResult& r = ctx.experiment(circle_spec());
  out.pass = laws_pass(r, {"circle_radius_max", "circle_radius_final"}, out.detail);
  out.pass = out.pass && r.wall_seconds < 120;
  out.detail += "run " + sci(r.wall_seconds) + " s (limit 120)";
  return out;
}

CriterionResult lemniscate(Context& ctx) {
  CriterionResult out{2, "lemniscate self-similarity", false, {}, 0};
  const ExperimentResult& r = ctx.experiment(lemniscate_spec());
  out.pass = laws_pass(r, {"lemniscate_image", "lemniscate_scale"}, out.detail);
  out.pass = out.pass && r.wall_seconds < 300;
  out.detail += "run " + sci(r.wall_seconds) + " s (limit 300)";
  return out;
}

CriterionResult length_law(Context& ctx) {
  CriterionResult out{3, "sharp length law", false, {}, 0};
  const ExperimentResult& r = ctx.experiment(stability_spec());
  const double eps2 = static_cast<double>(theory_constants(1).eps_two.value);
  out.detail = "eps(0) " + sci(r.eps0) + " <= eps_2 " + sci(eps2) + "; ";
  out.pass = r.eps0 <= eps2;
  out.pass = laws_pass(r, {"length_law", "length_exponent"}, out.detail) && out.pass;
  return out;
}

CriterionResult stability(Context& ctx) {
  CriterionResult out{4, "stability at t = 100", false, {}, 0};
  const ExperimentResult& r = ctx.experiment(stability_spec());
  out.pass = laws_pass(r,
                       {"eps_below_eps1", "q_monotone", "q_envelope", "circle_deviation_origin",
                        "rescaled_ks_decay", "rescaled_kss_decay"},
                       out.detail);
  if (!r.series.empty()) out.detail += "final t " + sci(r.series.back().t);
  return out;
}

CriterionResult monotonicity(Context& ctx) {
  CriterionResult out{5, "k_s monotonicity below eps_*", false, {}, 0};
  out.pass = true;
  for (const ExperimentSpec& spec : {stability_spec(), double_circle_spec()}) {
    const ExperimentResult& r = ctx.experiment(spec);
    double max_eps = 0;
    for (const DiagnosticsRecord& rec : r.series) max_eps = std::max(max_eps, rec.eps);
    const int w = spec.generator.omega;
    out.detail += "w=" + std::to_string(w) + ": max eps " + sci(max_eps) + " vs eps_* " +
                  sci(static_cast<double>(eps_star(w))) + ", ";
    out.pass = laws_pass(r, {"ks_monotone"}, out.detail) && out.pass;
  }
  return out;
}

CriterionResult residuals(Context&) {
  CriterionResult out{6, "evolution identity residuals", false, {}, 0};
  auto measure = [](Index n, double dt) {
    const auto p = perturbed_circle<long double>(1, {{2, 1e-2L, 0.3L}}, 1.0L, n);
    FlowState<long double> s;
    s.curve = p.curve;
    FlowConfig cfg;
    cfg.nodes = n;
    return evolution_residuals(s, cfg, dt);
  };
  const EvolutionResiduals coarse = measure(256, 4e-6);
  const EvolutionResiduals fine = measure(512, 2e-6);
  const EvolutionResiduals target = measure(1024, 1e-6);
  using Pick = const IdentityResidual EvolutionResiduals::*;
  const std::pair<const char*, Pick> parts[] = {{"k_s", &EvolutionResiduals::ks_l2sq},
                                                {"L", &EvolutionResiduals::length},
                                                {"k", &EvolutionResiduals::curvature},
                                                {"E", &EvolutionResiduals::energy}};
  out.pass = true;
  for (const auto& [name, pick] : parts) {
    const double bound = std::string(name) == "E" ? 0.05 : 0.1;
    const double at_1024 = (target.*pick).relative;
    const double c = (coarse.*pick).relative, f = (fine.*pick).relative;
    out.pass = out.pass && at_1024 <= bound && f < c;
    out.detail += std::string(name) + " " + sci(at_1024) + "/" + sci(bound) + " (256->512: " + sci(c) + "->" + sci(f) +
                  "); ";
  }
  out.detail += "long double";
  return out;
}

CriterionResult gradient(Context&) {
  CriterionResult out{7, "gradient check", false, {}, 0};
  const Curve c = circle_at(CircleSolution<double>{1, 1.0, Point<double>::Zero()}, 0.0, 512);
  Field<double> one = Field<double>::Ones(512), wave(512);
  for (Index i = 0; i < 512; ++i) wave[i] = std::cos(4 * pi * double(i) / 512);
  out.pass = true;
  for (const auto& [name, phi] : {std::pair{"phi=1", one}, std::pair{"phi=cos(4 pi u)", wave}}) {
    const GradientCheck g = gradient_check(c, phi, 1e-4);
    out.pass = out.pass && g.discrepancy <= 1e-5;
    out.detail += std::string(name) + " " + sci(g.discrepancy) + "/1e-05; ";
  }
  return out;
}

CriterionResult constants(Context&) {
  CriterionResult out{8, "constants table", false, {}, 0};
  const auto start = std::chrono::steady_clock::now();
  using ld = long double;
  constexpr ld lpi = kPi<ld>;
  bool ok = true;
  ld worst_root = 0;
  for (int w = 1; w <= 5; ++w) {
    const TheoryConstants<ld> tc = theory_constants(w);
    const ld w4 = omega_pi_4<ld>(w);
    ok = ok && 0 < tc.eps_two.value && tc.eps_two.value < tc.eps_one.value &&
         tc.eps_one.value <= tc.eps_star.value && tc.eps_one.value <= lpi * lpi * lpi * lpi / 6 &&
         tc.Q(tc.eps_one.value) <= q_level<ld>(w) + 1e-12L &&
         tc.eps_one.value * tc.C_hat(tc.eps_one.value) <= 16 * w4 &&
         std::abs(tc.c_two.value - (tc.eps_one.value * tc.C_hat(tc.eps_one.value) + 32 * w4)) <= 1e-15L * tc.c_two.value &&
         std::abs(tc.c_one.value - 48 * w4 / (5 * tc.c_two.value)) <= 1e-15L * tc.c_one.value;
    worst_root = std::max(worst_root, std::abs(eps_star<ld>(w) - eps_star_by_bisection<ld>(w)) / eps_star<ld>(w));
  }
  const ld c1a = c_one(1e-3L, 1), c1b = c_one(1e-6L, 1);
  const bool toward = c1a < 0.3L && c1b < 0.3L && 0.3L - c1b < 0.3L - c1a && 0.3L - c1b < 1e-6L;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.pass = ok && worst_root <= 1e-12L && toward && seconds < 1;
  out.detail = std::string("invariants w=1..5 ") + (ok ? "hold" : "VIOLATED") + "; eps_* vs root finder " +
               sci(double(worst_root)) + "/1e-12; 3/10 - c1: " + sci(0.3 - double(c1a)) + " at eps1 1e-3, " +
               sci(0.3 - double(c1b)) + " at 1e-6; " + sci(seconds) + " s";
  return out;
}

CriterionResult poincare(Context&) {
  CriterionResult out{9, "Poincare suite", false, {}, 0};
  struct Case {
    std::string name;
    Curve curve;
    std::function<double(double)> f;  // of u; empty means k - mean k
  };
  const Curve unit = circle_at(CircleSolution<double>{1, 1.0, Point<double>::Zero()}, 0.0, 512);
  const std::vector<Case> cases{
      {"circle sin(2 pi u)", unit, [](double u) { return std::sin(2 * pi * u); }},
      {"circle sin(6 pi u)", unit, [](double u) { return std::sin(6 * pi * u); }},
      {"circle mixed", unit, [](double u) { return std::cos(4 * pi * u) + 0.3 * std::sin(10 * pi * u + 0.2); }},
      {"circle bump", unit, [](double u) { return std::exp(std::cos(2 * pi * u)); }},
      {"perturbed k", perturbed_circle<double>(1, {{3, 1e-2, 0.0}, {5, 5e-3, 1.0}}, 1.0, 512).curve, {}},
      {"ellipse k", ellipse_at(2.0, 1.0, 512), {}},
      {"ellipse sin(2 pi u)", ellipse_at(2.0, 1.0, 512), [](double u) { return std::sin(2 * pi * u); }},
      {"lemniscate k", lemniscate_at(LemniscateSolution<double>{1.0}, 0.0, 1024), {}},
  };
  double worst = 0, equality = 0;
  for (const Case& c : cases) {
    const Geometry g = compute_geometry(c.curve);
    Field<double> f(g.size());
    for (Index i = 0; i < g.size(); ++i) f[i] = c.f ? c.f(double(i) / double(g.size())) : g.k[i];
    const PoincareMargin m = poincare_margin(g, remove_average(g, f));
    worst = std::max({worst, m.ratio_l2, m.ratio_sup});
    if (c.name == "circle sin(2 pi u)") equality = std::abs(m.ratio_l2 - 1);
  }
  out.pass = worst <= 1 + 1e-2 && equality <= 1e-3;
  out.detail = "max ratio " + sci(worst) + "/1.01 over " + std::to_string(cases.size()) +
               " fields; first mode |ratio - 1| " + sci(equality) + "/1e-3";
  return out;
}

}  // namespace

std::vector<ExperimentSpec> acceptance_specs() {
  return {circle_spec(), lemniscate_spec(), stability_spec(), double_circle_spec()};
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  std::string detail = r.detail;
  while (!detail.empty() && (detail.back() == ' ' || detail.back() == ';')) detail.pop_back();
  os << "criterion " << r.id << " " << (r.pass ? "PASS" : "FAIL") << "  " << r.title << ": " << detail << " ["
     << sci(r.seconds) << " s]";
  return os.str();
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& log) {
  using Fn = CriterionResult (*)(Context&);
  const Fn criteria[] = {circle_oracle, lemniscate, length_law, stability, monotonicity,
                         residuals,     gradient,   constants,  poincare};
  Context ctx{options, {}};
  std::vector<CriterionResult> results;
  for (int id = 1; id <= 9; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = criteria[id - 1](ctx);
    } catch (const std::exception& e) {
      r.id = id;
      r.title = "criterion " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log << format_result(r) << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace fef
