// One time slice of scalar observables, and the rescaled-flow measurements
// that go into it.
#pragma once

#include "fef/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fef {

struct DiagnosticsRecord {
  double t = 0;
  double dt = 0;
  double length = 0;
  double energy = 0;
  int omega = 0;
  int omega_signed = 0;
  double eps = 0;
  double q = 0;
  double ks_l2sq = 0;          // int k_s^2 ds
  double kbar_dev = 0;         // ||L k - 2 pi omega||_inf
  double k_inf = 0;
  double ks_inf = 0;
  double kss_inf = 0;
  double rescaled_ks_inf = 0;  // L^2 ||k_s||_inf
  double rescaled_kss_inf = 0; // L^3 ||k_ss||_inf
  double centre_x = 0;
  double centre_y = 0;
  double mean_radius = 0;      // mean node distance from the centre of mass
  double centered_dev = 0;     // of the rescaled curve; NaN when omega == 0
  double origin_dev = 0;
  double rescaled_centre = 0;  // |int eta ds|
};

/// eta = gamma / L.
template <typename Scalar>
ClosedCurve<Scalar> rescaled_curve(const ClosedCurve<Scalar>& curve, const GeometryOptions& options = {}) {
  const Scalar l = compute_geometry(curve, options).length;
  if (!(l > Scalar(0))) throw GeometryError("rescaling needs positive length");
  return scaled(curve, Scalar(1) / l);
}

struct CircleDeviation {
  double centered = 0;  // max_i | |eta_i - c| - 1/(2 omega pi) |
  double origin = 0;    // | max_i |eta_i| - 1/(2 omega pi) |
};

template <typename Scalar>
CircleDeviation circle_deviation(const ClosedCurve<Scalar>& eta, const GeometricQuantities<Scalar>& geom,
                                 int omega) {
  if (omega < 1) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  const Scalar target = Scalar(1) / (Scalar(2 * std::numbers::pi) * Scalar(omega));
  const Point<Scalar> c =
      (eta.points().array().rowwise() * geom.ds.transpose()).rowwise().sum().matrix() / geom.length;
  Scalar centered = 0, far = 0;
  for (Index i = 0; i < eta.size(); ++i) {
    centered = std::max(centered, std::abs((eta.point(i) - c).norm() - target));
    far = std::max(far, eta.point(i).norm());
  }
  return {static_cast<double>(centered), static_cast<double>(std::abs(far - target))};
}

template <typename Scalar>
CircleDeviation circle_deviation(const ClosedCurve<Scalar>& eta, int omega) {
  return circle_deviation(eta, compute_geometry(eta), omega);
}

template <typename Scalar>
DiagnosticsRecord make_record(const ClosedCurve<Scalar>& curve, const GeometricQuantities<Scalar>& geom,
                              double t, double dt) {
  const auto d = diagnostics(geom, curve);
  DiagnosticsRecord r;
  r.t = t;
  r.dt = dt;
  r.length = static_cast<double>(d.length);
  r.energy = static_cast<double>(d.energy);
  r.omega = d.omega;
  r.omega_signed = d.omega_signed;
  r.eps = static_cast<double>(d.eps);
  r.q = static_cast<double>(d.q);
  r.ks_l2sq = static_cast<double>(d.ks_l2sq);
  const Scalar l = d.length;
  r.kbar_dev = static_cast<double>((l * geom.k - Scalar(2 * std::numbers::pi) * Scalar(d.omega_signed)).abs().maxCoeff());
  r.k_inf = static_cast<double>(geom.k.abs().maxCoeff());
  r.ks_inf = static_cast<double>(geom.ks.abs().maxCoeff());
  r.kss_inf = static_cast<double>(geom.kss.abs().maxCoeff());
  r.rescaled_ks_inf = static_cast<double>(l * l) * r.ks_inf;
  r.rescaled_kss_inf = static_cast<double>(l * l * l) * r.kss_inf;
  r.centre_x = static_cast<double>(d.centre.x());
  r.centre_y = static_cast<double>(d.centre.y());
  Scalar radius = 0;
  for (Index i = 0; i < curve.size(); ++i) radius += (curve.point(i) - d.centre).norm();
  r.mean_radius = static_cast<double>(radius / Scalar(curve.size()));

  // The rescaled curve shares the node weights up to the factor 1/L.
  GeometricQuantities<Scalar> eta_geom = geom;
  eta_geom.ds = geom.ds / l;
  eta_geom.length = Scalar(1);
  const ClosedCurve<Scalar> eta = scaled(curve, Scalar(1) / l);
  const CircleDeviation dev = circle_deviation(eta, eta_geom, d.omega);
  r.centered_dev = dev.centered;
  r.origin_dev = dev.origin;
  r.rescaled_centre = static_cast<double>(d.centre.norm() / l);
  return r;
}

template <typename Scalar>
DiagnosticsRecord make_record(const ClosedCurve<Scalar>& curve, double t, double dt,
                              const GeometryOptions& options = {}) {
  return make_record(curve, compute_geometry(curve, options), t, dt);
}

inline bool all_finite(const DiagnosticsRecord& r) {
  const double values[] = {r.t, r.dt, r.length, r.energy, r.eps, r.q, r.ks_l2sq, r.kbar_dev, r.k_inf,
                           r.ks_inf, r.kss_inf, r.centre_x, r.centre_y, r.mean_radius};
  return std::all_of(std::begin(values), std::end(values), [](double v) { return std::isfinite(v); }) &&
         (r.omega == 0 || (std::isfinite(r.centered_dev) && std::isfinite(r.origin_dev)));
}

}  // namespace fef
