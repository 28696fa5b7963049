#include "fef/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fef {

namespace {

constexpr double pi = std::numbers::pi;

double point_segment_distance(const Point<double>& p, const Point<double>& a, const Point<double>& b) {
  const Point<double> d = b - a;
  const double len2 = d.squaredNorm();
  const double s = len2 > 0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - a - s * d).norm();
}

double directed_hausdorff(const Curve& from, const Curve& to) {
  double worst = 0;
  for (Index i = 0; i < from.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < to.size(); ++j) {
      nearest = std::min(nearest, point_segment_distance(from.point(i), to.point(j), to.point(j + 1)));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

// Records with t > 0 in the last half of the series.
std::vector<const DiagnosticsRecord*> tail(const Series& series) {
  std::vector<const DiagnosticsRecord*> out;
  for (std::size_t i = series.size() / 2; i < series.size(); ++i) {
    if (series[i].t > 0) out.push_back(&series[i]);
  }
  return out;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::informational: return "info";
  }
  return "?";
}

LawCheck make_check(std::string law, double measured, double bound, std::string note) {
  LawCheck c;
  c.law = std::move(law);
  c.measured = measured;
  c.bound = bound;
  c.note = std::move(note);
  if (!std::isfinite(measured) || !std::isfinite(bound)) {
    c.verdict = Verdict::inconclusive;
    c.slack = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  c.verdict = measured <= bound ? Verdict::pass : Verdict::fail;
  c.slack = bound != 0 ? 1 - measured / bound : (measured <= 0 ? 0.0 : -std::numeric_limits<double>::infinity());
  return c;
}

Verdict overall(const std::vector<LawCheck>& checks) {
  bool any_pass = false;
  for (const LawCheck& c : checks) {
    if (c.verdict == Verdict::fail) return Verdict::fail;
    if (c.verdict == Verdict::inconclusive) return Verdict::inconclusive;
    any_pass = any_pass || c.verdict == Verdict::pass;
  }
  return any_pass ? Verdict::pass : Verdict::inconclusive;
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("power fit: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  PowerFit fit;
  fit.points = lx.size();
  if (lx.size() < 2) throw std::invalid_argument("power fit needs at least two positive points");
  Eigen::MatrixXd a(lx.size(), 2);
  Eigen::VectorXd b(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    a(i, 0) = 1;
    a(i, 1) = lx[i];
    b[i] = ly[i];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  fit.log_prefactor = coef[0];
  fit.exponent = coef[1];
  const double mean = b.mean();
  const double total = (b.array() - mean).square().sum();
  const double resid = (a * coef - b).squaredNorm();
  fit.r_squared = total > 0 ? 1 - resid / total : 1.0;
  return fit;
}

LengthLawResidual length_law_residual(const Series& series, int omega, double floor) {
  if (series.size() < 10) {
    throw std::invalid_argument("length law needs at least 10 records, got " + std::to_string(series.size()));
  }
  LengthLawResidual out;
  for (const DiagnosticsRecord& r : series) out.sigma = std::max(out.sigma, r.eps);
  out.c_hat = static_cast<double>(c_hat<long double>(out.sigma, omega));
  const double l0 = series.front().length;
  const double l04 = l0 * l0 * l0 * l0;
  const double rate = 32 * std::pow(double(omega) * pi, 4);
  for (const DiagnosticsRecord& r : series) {
    const double dt = r.t - series.front().t;
    const double l4 = r.length * r.length * r.length * r.length;
    const double res = std::abs(l4 - l04 - rate * dt);
    const double ratio = res / std::max(dt * out.sigma * out.c_hat, floor);
    out.max_abs_residual = std::max(out.max_abs_residual, res);
    if (dt > 0 && ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.worst_t = r.t;
    }
  }

  const auto last = tail(series);
  if (last.size() < 2) throw std::invalid_argument("length law: tail has fewer than two positive times");
  // L^4 = A + B t on the tail gives the virtual origin t0 = A / B.
  Eigen::MatrixXd a(last.size(), 2);
  Eigen::VectorXd b(last.size());
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < last.size(); ++i) {
    const double l = last[i]->length;
    a(i, 0) = 1;
    a(i, 1) = last[i]->t;
    b[i] = l * l * l * l;
    ts.push_back(last[i]->t);
    ls.push_back(l);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  out.virtual_origin = coef[1] != 0 ? coef[0] / coef[1] : 0.0;
  out.raw_exponent = fit_power_law(ts, ls).exponent;
  std::vector<double> shifted(ts);
  for (double& t : shifted) t += out.virtual_origin;
  out.exponent = fit_power_law(shifted, ls).exponent;
  return out;
}

double image_deviation(const Curve& curve, const Curve& reference) {
  const Geometry g = compute_geometry(reference, {std::numeric_limits<double>::infinity()});
  const Point<double> c =
      (reference.points().array().rowwise() * g.ds.transpose()).rowwise().sum().matrix() / g.length;
  const double radius = (reference.points().colwise() - c).colwise().norm().maxCoeff();
  if (!(radius > 0)) throw GeometryError("reference curve has zero extent");
  return std::max(directed_hausdorff(curve, reference), directed_hausdorff(reference, curve)) / radius;
}

DecayReport decay_report(const Series& series, const TheoryConstants<long double>& constants,
                         const DecayOptions& options) {
  if (series.empty()) throw std::invalid_argument("decay report needs a non-empty series");
  DecayReport rep;
  const int w = constants.omega;
  const double eps1 = static_cast<double>(constants.eps_one.value);
  const double eps2 = static_cast<double>(constants.eps_two.value);
  const double c1 = static_cast<double>(constants.c_one.value);
  const double c2 = static_cast<double>(constants.c_two.value);
  const DiagnosticsRecord& first = series.front();
  rep.hypothesis = first.eps <= eps2;
  const double l04 = std::pow(first.length, 4);
  const double q0 = first.q;
  const double q_floor = std::max(options.q_floor * q0, options.q_absolute_floor);
  const double circle_le = 2 * w * w * pi * pi;

  double max_eps = 0, q_increase = -std::numeric_limits<double>::infinity(), envelope = 0;
  double le_ratio = 0, le_increase = -std::numeric_limits<double>::infinity(), kbar = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const DiagnosticsRecord& r = series[i];
    max_eps = std::max(max_eps, r.eps);
    const double env = q0 * std::pow(1 + c2 * (r.t - first.t) / l04, -c1);
    if (r.q > options.q_absolute_floor) {
      envelope = env > 0 ? std::max(envelope, r.q / env) : std::numeric_limits<double>::infinity();
    }
    const double le = r.length * r.energy;
    le_ratio = std::max(le_ratio, le / (r.eps / (8 * pi * pi) + circle_le));
    kbar = std::max(kbar, r.kbar_dev / (std::sqrt(r.eps / (2 * pi)) * (1 + options.kbar_slack) + options.kbar_floor));
    if (i > 0) {
      const DiagnosticsRecord& p = series[i - 1];
      q_increase = std::max(q_increase, r.q - p.q);
      le_increase = std::max(le_increase, (le - p.length * p.energy) / circle_le);
    }
  }
  if (series.size() < 2) {
    q_increase = 0;
    le_increase = 0;
  }

  rep.checks.push_back(make_check("eps_below_eps1", max_eps, eps1, "max eps(t) against eps_1"));
  rep.checks.push_back(make_check("q_monotone", q_increase, q_floor, "largest increase of Q between records"));
  rep.checks.push_back(make_check("q_envelope", envelope, 1 + options.slack,
                                  "max Q(t) / (Q(0) (1 + c2 t / L0^4)^-c1)"));
  rep.checks.push_back(make_check("le_bound", le_ratio, 1 + options.slack,
                                  "max L E / (eps / 8 pi^2 + 2 w^2 pi^2)"));
  rep.checks.push_back(make_check("le_monotone", le_increase, 1e-12, "largest increase of L E / (2 w^2 pi^2)"));
  rep.checks.push_back(make_check("kbar_bound", kbar, 1.0, "max ||Lk - 2 w pi||_inf / sqrt(eps / 2 pi)"));

  std::vector<double> ts, eps, qs;
  for (const DiagnosticsRecord* r : tail(series)) {
    ts.push_back(r->t);
    eps.push_back(r->eps);
    qs.push_back(r->q);
  }
  if (ts.size() >= 2) {
    try {
      rep.eps_fit = fit_power_law(ts, eps);
      rep.q_fit = fit_power_law(ts, qs);
    } catch (const std::invalid_argument&) {
    }
  }

  if (!rep.hypothesis) {
    for (LawCheck& c : rep.checks) {
      c.verdict = Verdict::informational;
      c.note += " (eps(0) > eps_2: hypothesis not met)";
    }
  }
  return rep;
}

}  // namespace fef
