// Closed-form free elastic flows and initial-data generators.
#pragma once

#include "fef/curve.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fef {

/// omega-circle whose radius obeys rho(t)^4 = rho0^4 + 2t.
template <typename Scalar>
struct CircleSolution {
  int omega = 1;
  Scalar rho0 = 1;
  Point<Scalar> centre = Point<Scalar>::Zero();

  Scalar radius(Scalar t) const {
    const Scalar r2 = rho0 * rho0;
    return std::sqrt(std::sqrt(r2 * r2 + Scalar(2) * t));
  }
  Scalar length(Scalar t) const { return Scalar(2 * std::numbers::pi) * Scalar(omega) * radius(t); }
};

template <typename Scalar>
ClosedCurve<Scalar> circle_at(const CircleSolution<Scalar>& sol, Scalar t, Index n) {
  if (sol.omega < 1) throw std::invalid_argument("circle turning number must be >= 1");
  if (t < Scalar(0)) throw std::invalid_argument("circle_at needs t >= 0");
  const Scalar r = sol.radius(t);
  Points<Scalar> p(2, n);
  for (Index i = 0; i < n; ++i) {
    const Scalar angle = Scalar(2 * std::numbers::pi) * Scalar(sol.omega) * Scalar(i) / Scalar(n);
    p(0, i) = sol.centre.x() + r * std::cos(angle);
    p(1, i) = sol.centre.y() + r * std::sin(angle);
  }
  return ClosedCurve<Scalar>(std::move(p));
}

/// Lemniscate of Bernoulli scaled by h(t) = (h0^4 + 30 t)^(1/4).
template <typename Scalar>
struct LemniscateSolution {
  Scalar h0 = 1;

  Scalar scale(Scalar t) const {
    const Scalar h2 = h0 * h0;
    return std::sqrt(std::sqrt(h2 * h2 + Scalar(30) * t));
  }
};

/// beta(theta) for the angle parameter theta in [0, 2 pi).
template <typename Scalar>
Point<Scalar> lemniscate_point(Scalar theta) {
  const Scalar s = std::sin(theta);
  const Scalar w = Scalar(1) / (Scalar(1) + s * s);
  return Point<Scalar>(w * std::cos(theta), w * Scalar(0.5) * std::sin(Scalar(2) * theta));
}

/// Samples h(t) beta(2 pi u_i). The angle parameter of beta is rescaled to the
/// unit parameter circle used everywhere else.
template <typename Scalar>
ClosedCurve<Scalar> lemniscate_at(const LemniscateSolution<Scalar>& sol, Scalar t, Index n) {
  if (t < Scalar(0)) throw std::invalid_argument("lemniscate_at needs t >= 0");
  const Scalar h = sol.scale(t);
  Points<Scalar> p(2, n);
  for (Index i = 0; i < n; ++i) {
    p.col(i) = h * lemniscate_point(Scalar(2 * std::numbers::pi) * Scalar(i) / Scalar(n));
  }
  return ClosedCurve<Scalar>(std::move(p));
}

/// Ellipse with semi-axes (a, b) sampled uniformly in the angle parameter.
template <typename Scalar>
ClosedCurve<Scalar> ellipse_at(Scalar a, Scalar b, Index n) {
  Points<Scalar> p(2, n);
  for (Index i = 0; i < n; ++i) {
    const Scalar theta = Scalar(2 * std::numbers::pi) * Scalar(i) / Scalar(n);
    p(0, i) = a * std::cos(theta);
    p(1, i) = b * std::sin(theta);
  }
  return ClosedCurve<Scalar>(std::move(p));
}

/// A cos(2 pi m u + phase) term of the radial perturbation. The wavenumber m
/// counts oscillations over the whole parameter circle, i.e. m / omega per
/// revolution of an omega-fold traversal.
template <typename Scalar>
struct RadialMode {
  int m = 2;
  Scalar amplitude = 0;
  Scalar phase = 0;

  bool operator==(const RadialMode&) const = default;
};

template <typename Scalar>
struct PerturbedCircle {
  ClosedCurve<Scalar> curve;
  Scalar eps0 = 0;  // measured L^3 int k_s^2 ds of the generated curve
  int omega = 1;
};

/// omega-fold traversal of r = rho0 (1 + sum a_m cos(2 pi m u + phase_m)).
template <typename Scalar>
PerturbedCircle<Scalar> perturbed_circle(int omega, const std::vector<RadialMode<Scalar>>& modes,
                                         Scalar rho0, Index n) {
  if (omega < 1) throw std::invalid_argument("perturbed_circle needs omega >= 1");
  if (!(rho0 > Scalar(0))) throw std::invalid_argument("perturbed_circle needs rho0 > 0");
  Points<Scalar> p(2, n);
  for (Index i = 0; i < n; ++i) {
    const Scalar u = Scalar(i) / Scalar(n);
    Scalar factor = 1;
    for (const auto& mode : modes) {
      factor += mode.amplitude * std::cos(Scalar(2 * std::numbers::pi) * Scalar(mode.m) * u + mode.phase);
    }
    if (!(factor > Scalar(0))) throw GeometryError("radial graph is not positive");
    const Scalar angle = Scalar(2 * std::numbers::pi) * Scalar(omega) * u;
    p(0, i) = rho0 * factor * std::cos(angle);
    p(1, i) = rho0 * factor * std::sin(angle);
  }
  PerturbedCircle<Scalar> out{ClosedCurve<Scalar>(std::move(p)), Scalar(0), omega};
  // A positive radial graph is immersed in the continuum; at finite N a fold
  // shows up as a polygon whose turning angles no longer sum to 2 pi omega.
  const auto geom = compute_geometry(out.curve);
  const auto d = diagnostics(geom, out.curve);
  if (d.omega != omega) throw GeometryError("perturbation changed the turning number");
  out.eps0 = d.eps;
  return out;
}

}  // namespace fef
