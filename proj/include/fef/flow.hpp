// Time integration of d/dt gamma = -(k_ss + k^3/2) nu.
//
// Each substep is linearly implicit: the fourth-order operator D4 = D2 D2,
// frozen at the current geometry, is treated implicitly and the full velocity
// explicitly,
//
//   (I + dt D4) (gamma^{n+1} - gamma^n) = -dt F^n nu^n,
//
// which is one cyclic pentadiagonal solve with two right-hand sides. The
// default scheme combines one full and two half substeps by Richardson
// extrapolation, giving second order in dt and a local error estimate.
#pragma once

#include "fef/curve.hpp"
#include "fef/record.hpp"
#include "fef/redistribute.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fef {

enum class StepPolicy { fixed, adaptive };
enum class TimeScheme { linearly_implicit, extrapolated };
enum class Redistribution { off, every_step, threshold };

struct FlowConfig {
  Index nodes = 256;
  StepPolicy dt_policy = StepPolicy::adaptive;
  double dt = 1e-4;        // fixed step, or initial step when adaptive
  double cap_factor = 300; // c in c (L/N)^4 / max(1, ||k||^4 (L/N)^4)
  double dt_max = std::numeric_limits<double>::infinity();
  double dt_min = 1e-14;
  double grow_factor = 1.2;
  int grow_after = 10;
  TimeScheme scheme = TimeScheme::extrapolated;
  double t_end = 1;
  Redistribution redistribution = Redistribution::threshold;
  double redistribution_threshold = 1.2;
  double linear_tolerance = 1e-9;
  double max_mesh_ratio = kDefaultMaxMeshRatio;
  double local_error_tolerance = 0;  // |fine - coarse|_inf / L per step; 0 disables
  double record_interval = 0;        // 0 records every step
  std::vector<double> record_times;  // overrides record_interval when non-empty

  void validate() const {
    if (!(dt > 0)) throw std::invalid_argument("flow config: dt must be positive");
    if (!(t_end > 0)) throw std::invalid_argument("flow config: t_end must be positive");
    if (!(cap_factor > 0) || !(dt_max > 0) || !(dt_min > 0)) {
      throw std::invalid_argument("flow config: step bounds must be positive");
    }
    if (!(grow_factor >= 1) || grow_after < 1) throw std::invalid_argument("flow config: bad growth policy");
    if (!(redistribution_threshold > 1) || !(max_mesh_ratio > 1)) {
      throw std::invalid_argument("flow config: mesh thresholds must exceed 1");
    }
    if (!(linear_tolerance > 0) || local_error_tolerance < 0 || record_interval < 0) {
      throw std::invalid_argument("flow config: tolerances must be positive");
    }
    if (nodes < kMinNodes) throw std::invalid_argument("flow config: too few nodes");
  }

  GeometryOptions geometry() const { return {max_mesh_ratio}; }

  bool operator==(const FlowConfig&) const = default;
};

template <typename Scalar>
struct FlowState {
  ClosedCurve<Scalar> curve;
  double t = 0;
  long step_count = 0;
  double last_dt = 0;
  double next_dt = 0;  // adaptive proposal; 0 means "use config.dt"
  int accepted_since_growth = 0;
  long rejected_steps = 0;
  long redistributions = 0;
};

/// Unrecoverable integration failure; carries the last accepted state.
template <typename Scalar>
class FlowAbort : public std::runtime_error {
 public:
  FlowAbort(const std::string& what, FlowState<Scalar> last) : std::runtime_error(what), last_(std::move(last)) {}
  const FlowState<Scalar>& last_state() const { return last_; }

 private:
  FlowState<Scalar> last_;
};

/// F = k_ss + k^3 / 2 at the nodes; the flow velocity is -F nu.
template <typename Scalar>
Field<Scalar> velocity_F(const GeometricQuantities<Scalar>& geom) {
  return geom.kss + Scalar(0.5) * geom.k.cube();
}

/// Node-wise normal displacement phi * nu added to the curve.
template <typename Scalar>
ClosedCurve<Scalar> displaced(const ClosedCurve<Scalar>& curve, const GeometricQuantities<Scalar>& geom,
                              const Field<Scalar>& phi, Scalar h) {
  Points<Scalar> p = curve.points();
  for (Index i = 0; i < curve.size(); ++i) p.col(i) += h * phi[i] * geom.normal.col(i);
  return ClosedCurve<Scalar>(std::move(p));
}

template <typename Scalar>
Scalar elastic_energy(const ClosedCurve<Scalar>& curve, const GeometryOptions& options = {}) {
  const auto g = compute_geometry(curve, options);
  return Scalar(0.5) * g.integrate_nodes(g.k.square());
}

struct GradientCheck {
  double finite_difference = 0;  // (E[+h] - E[-h]) / 2h
  double predicted = 0;          // int F phi ds
  double discrepancy = 0;
};

/// Compares the central difference of E along phi nu with int F phi ds.
template <typename Scalar>
GradientCheck gradient_check(const ClosedCurve<Scalar>& curve, const Field<Scalar>& phi, Scalar h) {
  const auto geom = compute_geometry(curve);
  if (phi.size() != curve.size()) throw std::invalid_argument("perturbation size mismatch");
  GradientCheck out;
  out.predicted = static_cast<double>(geom.integrate_nodes(velocity_F(geom) * phi));
  if ((phi == Scalar(0)).all()) return out;
  const Scalar plus = elastic_energy(displaced(curve, geom, phi, h));
  const Scalar minus = elastic_energy(displaced(curve, geom, phi, -h));
  out.finite_difference = static_cast<double>((plus - minus) / (Scalar(2) * h));
  out.discrepancy = std::abs(out.finite_difference - out.predicted);
  return out;
}

/// Compact nonuniform second arclength difference on nodes.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> second_difference(const GeometricQuantities<Scalar>& geom) {
  const Index n = geom.size();
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(3 * n);
  for (Index i = 0; i < n; ++i) {
    const Index ip = (i + 1) % n, im = (i + n - 1) % n;
    const Scalar cp = Scalar(1) / (geom.arc[i] * geom.ds[i]);
    const Scalar cm = Scalar(1) / (geom.arc[im] * geom.ds[i]);
    trip.emplace_back(i, ip, cp);
    trip.emplace_back(i, im, cm);
    trip.emplace_back(i, i, -(cp + cm));
  }
  Eigen::SparseMatrix<Scalar> d2(n, n);
  d2.setFromTriplets(trip.begin(), trip.end());
  return d2;
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar> fourth_difference(const GeometricQuantities<Scalar>& geom) {
  const Eigen::SparseMatrix<Scalar> d2 = second_difference(geom);
  return Eigen::SparseMatrix<Scalar>(d2 * d2);
}

namespace detail {

template <typename Scalar>
struct Substep {
  bool ok = false;
  Points<Scalar> points;
  std::string reason;
};

template <typename Scalar>
Substep<Scalar> linearly_implicit(const Points<Scalar>& start, Scalar dt, const FlowConfig& config) {
  Substep<Scalar> out;
  GeometricQuantities<Scalar> geom;
  try {
    geom = compute_geometry(ClosedCurve<Scalar>(start), config.geometry());
  } catch (const GeometryError& e) {
    out.reason = e.what();
    return out;
  }
  const Index n = geom.size();
  const Field<Scalar> f = velocity_F(geom);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> rhs(n, 2);
  for (Index i = 0; i < n; ++i) rhs.row(i) = (-dt * f[i]) * geom.normal.col(i).transpose();

  Eigen::SparseMatrix<Scalar> a = fourth_difference(geom) * dt;
  for (Index i = 0; i < n; ++i) a.coeffRef(i, i) += Scalar(1);
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    out.reason = "factorisation failed";
    return out;
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 2> delta = lu.solve(rhs);
  const Scalar scale = rhs.norm();
  const Scalar residual = (a * delta - rhs).norm();
  if (!delta.allFinite()) {
    out.reason = "non-finite update";
    return out;
  }
  if (scale > Scalar(0) && residual > Scalar(config.linear_tolerance) * scale) {
    out.reason = "linear residual " + std::to_string(static_cast<double>(residual / scale));
    return out;
  }
  out.points = start + delta.transpose();
  out.ok = true;
  return out;
}

template <typename Scalar>
struct Attempt {
  bool ok = false;
  Points<Scalar> points;
  double error_estimate = 0;
  std::string reason;
};

template <typename Scalar>
Attempt<Scalar> attempt_step(const ClosedCurve<Scalar>& curve, double dt, const FlowConfig& config) {
  Attempt<Scalar> out;
  const Scalar h = static_cast<Scalar>(dt);
  const Substep<Scalar> coarse = linearly_implicit(curve.points(), h, config);
  if (!coarse.ok) {
    out.reason = coarse.reason;
    return out;
  }
  if (config.scheme == TimeScheme::linearly_implicit) {
    out.ok = true;
    out.points = coarse.points;
    return out;
  }
  const Substep<Scalar> half = linearly_implicit(curve.points(), h / 2, config);
  if (!half.ok) {
    out.reason = half.reason;
    return out;
  }
  const Substep<Scalar> fine = linearly_implicit(half.points, h / 2, config);
  if (!fine.ok) {
    out.reason = fine.reason;
    return out;
  }
  out.points = Scalar(2) * fine.points - coarse.points;
  const Scalar length = chord_lengths(curve).sum();
  out.error_estimate = static_cast<double>((fine.points - coarse.points).cwiseAbs().maxCoeff() / length);
  if (!out.points.allFinite()) {
    out.reason = "non-finite update";
    return out;
  }
  out.ok = true;
  return out;
}

}  // namespace detail

/// c (L/N)^4 / max(1, ||k||_inf^4 (L/N)^4).
template <typename Scalar>
double step_cap(const GeometricQuantities<Scalar>& geom, const FlowConfig& config) {
  const double h = static_cast<double>(geom.length) / static_cast<double>(geom.size());
  const double h4 = h * h * h * h;
  const double kh = static_cast<double>(geom.k.abs().maxCoeff()) * h;
  return std::min(config.dt_max, config.cap_factor * h4 / std::max(1.0, kh * kh * kh * kh));
}

/// Advances by one accepted step, never past `t_stop`.
template <typename Scalar>
FlowState<Scalar> step(const FlowState<Scalar>& state, const FlowConfig& config,
                       double t_stop = std::numeric_limits<double>::infinity()) {
  FlowState<Scalar> next = state;
  const bool adaptive = config.dt_policy == StepPolicy::adaptive;
  double proposal = state.next_dt > 0 ? state.next_dt : config.dt;
  double cap = std::numeric_limits<double>::infinity();
  double dt = config.dt;
  if (adaptive) {
    cap = step_cap(compute_geometry(state.curve, config.geometry()), config);
    dt = std::min(proposal, cap);
  }
  bool clamped = false;
  if (state.t + dt >= t_stop) {
    dt = t_stop - state.t;
    clamped = true;
  }
  if (!(dt > 0)) throw std::invalid_argument("step: nothing left to integrate");

  detail::Attempt<Scalar> attempt;
  for (;;) {
    attempt = detail::attempt_step(state.curve, dt, config);
    if (attempt.ok && config.local_error_tolerance > 0 && attempt.error_estimate > config.local_error_tolerance) {
      attempt.ok = false;
      attempt.reason = "local error estimate " + std::to_string(attempt.error_estimate);
    }
    if (attempt.ok) {
      try {
        next.curve = ClosedCurve<Scalar>(attempt.points);
        break;
      } catch (const GeometryError& e) {
        attempt.reason = e.what();
      }
    }
    ++next.rejected_steps;
    dt /= 2;
    clamped = false;
    proposal = std::min(proposal, dt);
    next.accepted_since_growth = 0;
    if (dt < config.dt_min) {
      throw FlowAbort<Scalar>("step rejected down to dt_min at t = " + std::to_string(state.t) + ": " +
                                  attempt.reason,
                              state);
    }
  }

  next.t = clamped ? t_stop : state.t + dt;
  next.last_dt = dt;
  ++next.step_count;
  if (adaptive) {
    if (++next.accepted_since_growth >= config.grow_after) {
      proposal = std::min(proposal * config.grow_factor, cap * config.grow_factor);
      next.accepted_since_growth = 0;
    }
    next.next_dt = proposal;
  }

  const bool redistribute_now =
      config.redistribution == Redistribution::every_step ||
      (config.redistribution == Redistribution::threshold &&
       mesh_ratio(next.curve) > Scalar(config.redistribution_threshold));
  if (redistribute_now) {
    try {
      next.curve = redistribute(next.curve, {8, config.max_mesh_ratio});
      ++next.redistributions;
    } catch (const GeometryError& e) {
      throw FlowAbort<Scalar>(std::string("redistribution failed: ") + e.what(), state);
    }
  }
  if (mesh_ratio(next.curve) > Scalar(config.max_mesh_ratio)) {
    throw FlowAbort<Scalar>("mesh degraded beyond the quality limit at t = " + std::to_string(next.t), state);
  }
  return next;
}

enum class RunStatus { completed, aborted };

template <typename Scalar>
struct RunResult {
  std::vector<DiagnosticsRecord> records;
  FlowState<Scalar> final_state;
  RunStatus status = RunStatus::completed;
  std::string message;
};

template <typename Scalar>
using RecordObserver = std::function<void(const FlowState<Scalar>&, const DiagnosticsRecord&)>;

namespace detail {

inline std::vector<double> record_schedule(const FlowConfig& config) {
  std::vector<double> times;
  if (!config.record_times.empty()) {
    for (double t : config.record_times) {
      if (t > 0 && t < config.t_end) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
  } else if (config.record_interval > 0) {
    for (long j = 1;; ++j) {
      const double t = static_cast<double>(j) * config.record_interval;
      if (t >= config.t_end * (1 - 1e-12)) break;
      times.push_back(t);
    }
  }
  times.push_back(config.t_end);
  return times;
}

}  // namespace detail

/// Integrates to config.t_end, recording diagnostics at t = 0 and at every
/// scheduled time (every step when no schedule is configured).
template <typename Scalar>
RunResult<Scalar> run(const ClosedCurve<Scalar>& initial, const FlowConfig& config,
                      const RecordObserver<Scalar>& observer = {}) {
  config.validate();
  RunResult<Scalar> result;
  FlowState<Scalar> state;
  state.curve = initial;
  state.next_dt = config.dt;
  const bool every_step = config.record_times.empty() && config.record_interval <= 0;
  const std::vector<double> schedule = detail::record_schedule(config);

  auto record = [&](const FlowState<Scalar>& s) {
    const DiagnosticsRecord r = make_record(s.curve, s.t, s.last_dt, config.geometry());
    if (!all_finite(r)) return false;
    result.records.push_back(r);
    if (observer) observer(s, r);
    return true;
  };

  try {
    if (!record(state)) throw FlowAbort<Scalar>("non-finite initial diagnostics", state);
    for (double target : schedule) {
      while (state.t < target) {
        FlowState<Scalar> next = step(state, config, target);
        if (!next.curve.points().allFinite()) throw FlowAbort<Scalar>("non-finite state", state);
        state = std::move(next);
        if (every_step && state.t < target && !record(state)) {
          throw FlowAbort<Scalar>("non-finite diagnostics", state);
        }
      }
      if (!record(state)) throw FlowAbort<Scalar>("non-finite diagnostics at t = " + std::to_string(state.t), state);
    }
  } catch (const FlowAbort<Scalar>& e) {
    result.status = RunStatus::aborted;
    result.message = e.what();
    result.final_state = e.last_state();
    return result;
  } catch (const GeometryError& e) {
    result.status = RunStatus::aborted;
    result.message = e.what();
    result.final_state = state;
    return result;
  }
  result.final_state = state;
  return result;
}

}  // namespace fef
