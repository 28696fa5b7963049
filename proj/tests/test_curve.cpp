#include "fef/curve.hpp"
#include "fef/exact_solutions.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace fef;

namespace {

constexpr double pi = std::numbers::pi;

Curve unit_circle(Index n, int omega = 1, double rho = 1) {
  return circle_at(CircleSolution<double>{omega, rho, Point<double>::Zero()}, 0.0, n);
}

Curve perturbed(int omega, int m, double a, Index n, double phase = 0.3) {
  return perturbed_circle<double>(omega, {{m, a, phase}}, 1.0, n).curve;
}

std::vector<Curve> smooth_test_curves() {
  return {unit_circle(128), unit_circle(256, 3, 2.0), ellipse_at(2.0, 1.0, 512), perturbed(1, 3, 0.05, 256),
          perturbed(2, 5, 0.01, 512), lemniscate_at(LemniscateSolution<double>{1.0}, 0.0, 1024)};
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("unit circle curvature and length") {
  const Curve c = unit_circle(256);
  const Geometry g = compute_geometry(c);
  CHECK((g.k - 1.0).abs().maxCoeff() < 1e-3);
  CHECK(std::abs(g.length - 2 * pi) < 1e-4);
}

TEST_CASE("triple circle of radius 2") {
  const Geometry g = compute_geometry(unit_circle(384, 3, 2.0));
  CHECK((g.k - 0.5).abs().maxCoeff() < 1e-6);
  CHECK(std::abs(g.length - 12 * pi) < 1e-6 * 12 * pi);
}

TEST_CASE("ellipse curvature matches the closed form pointwise") {
  const Index n = 512;
  const Geometry g = compute_geometry(ellipse_at(2.0, 1.0, n));
  double worst = 0;
  for (Index i = 0; i < n; ++i) {
    const double t = 2 * pi * double(i) / double(n);
    worst = std::max(worst, std::abs(g.k[i] - oracle::ellipse_curvature(2.0, 1.0, t)));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("curvature error on the ellipse is second order") {
  std::vector<double> err;
  for (Index n : {64, 128, 256, 512}) {
    const Geometry g = compute_geometry(ellipse_at(2.0, 1.0, n));
    double worst = 0;
    for (Index i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(g.k[i] - oracle::ellipse_curvature(2.0, 1.0, 2 * pi * double(i) / double(n))));
    }
    err.push_back(worst);
  }
  for (size_t j = 1; j < err.size(); ++j) CHECK(std::log2(err[j - 1] / err[j]) > 1.9);
}

TEST_CASE("circle curvature error does not grow slower than N^-2") {
  // The turning-angle scheme is exact on circles, so the error sits at roundoff.
  double prev = 0;
  for (Index n : {64, 128, 256, 512}) {
    const double e = (compute_geometry(unit_circle(n)).k - 1.0).abs().maxCoeff();
    CHECK(e < 1e-10);
    if (prev > 1e-10) CHECK(e <= prev / 3.9);
    prev = e;
  }
}

TEST_CASE("frame and quadrature invariants") {
  for (const Curve& c : smooth_test_curves()) {
    const Geometry g = compute_geometry(c);
    CHECK((g.tangent.colwise().norm().array() - 1).abs().maxCoeff() < 1e-12);
    CHECK((g.normal.colwise().norm().array() - 1).abs().maxCoeff() < 1e-12);
    CHECK((g.tangent.array() * g.normal.array()).colwise().sum().abs().maxCoeff() < 1e-12);
    CHECK(std::abs(g.ds.sum() - g.length) < 1e-12 * g.length);
    const double raw = g.integrate_nodes(g.k) / (2 * pi);
    CHECK(std::abs(raw - std::round(raw)) < 1e-10);
    const double scale = g.length;
    CHECK(std::abs(g.integrate_edges(g.ks)) * scale < 1e-9);
    CHECK(std::abs(g.integrate_nodes(g.kss)) * scale * scale < 1e-8);
    CHECK(std::abs(g.integrate_edges(g.ksss)) * scale * scale * scale < 1e-6);
  }
}

TEST_CASE("discrete integration by parts") {
  for (const Curve& c : smooth_test_curves()) {
    const Geometry g = compute_geometry(c);
    const double lhs = g.integrate_nodes(g.kss * g.k);
    const double rhs = -g.integrate_edges(g.ks.square());
    const double scale = std::max(std::abs(rhs), 1.0 / (g.length * g.length * g.length));
    CHECK(std::abs(lhs - rhs) <= 1e-9 * scale);
  }
}

TEST_CASE("turning numbers") {
  CHECK(turning_number(compute_geometry(unit_circle(256, 2))).absolute == 2);
  const TurningNumber lem = turning_number(compute_geometry(lemniscate_at(LemniscateSolution<double>{1.0}, 0.0, 1024)));
  CHECK(lem.absolute == 0);
  CHECK(lem.signed_value == 0);
  const TurningNumber cw = turning_number(compute_geometry(reversed(unit_circle(256))));
  CHECK(cw.absolute == 1);
  CHECK(cw.signed_value == -1);
  CHECK(turning_number(compute_geometry(perturbed(2, 5, 1e-2, 512))).absolute == 2);
}

TEST_CASE("ambiguous turning number is rejected") {
  CHECK_THROWS_AS(snap_turning_number(1.4), GeometryError);
  CHECK_THROWS_AS(snap_turning_number(-0.5), GeometryError);
  CHECK(snap_turning_number(2.05).absolute == 2);
  CHECK(snap_turning_number(-0.95).signed_value == -1);
}

TEST_CASE("circle diagnostics") {
  for (int omega : {1, 2, 3}) {
    for (double rho : {0.5, 1.0, 3.0}) {
      const Curve c = unit_circle(256 * omega, omega, rho);
      const auto d = diagnostics(compute_geometry(c), c);
      CHECK(d.eps < 1e-14);
      CHECK(d.q < 1e-14);
      CHECK(relative(d.energy, omega * pi / rho) < 1e-12);
      CHECK(d.omega == omega);
      CHECK(relative(d.mean_curvature, 1 / rho) < 1e-12);
      CHECK(d.centre.norm() < 1e-12 * rho);
    }
  }
  const Curve c = unit_circle(256);
  const auto d = diagnostics(compute_geometry(c), c);
  CHECK(relative(d.length * d.energy, 2 * pi * pi) < 1e-12);
}

TEST_CASE("L E is bounded below by 2 pi^2") {
  for (const Curve& c : smooth_test_curves()) {
    const auto d = diagnostics(compute_geometry(c), c);
    CHECK(d.length * d.energy >= 2 * pi * pi * (1 - 1e-12));
  }
}

TEST_CASE("eps equals L^3 (2E)^3 Q") {
  for (const Curve& c : smooth_test_curves()) {
    const auto d = diagnostics(compute_geometry(c), c);
    if (d.eps == 0) continue;
    const double l3 = d.length * d.length * d.length;
    const double e2 = 2 * d.energy;
    CHECK(relative(d.eps, l3 * e2 * e2 * e2 * d.q) < 1e-10);
  }
}

TEST_CASE("eps of a radial graph agrees with fine quadrature of the smooth curve") {
  struct Case {
    int omega, m;
    double a;
  };
  for (const Case& cs : {Case{1, 3, 1e-2}, Case{1, 2, 5e-2}, Case{2, 5, 1e-2}}) {
    const Curve c = perturbed(cs.omega, cs.m, cs.a, 1024);
    const auto d = diagnostics(compute_geometry(c), c);
    const auto ref = oracle::radial_graph_integrals({1.0, cs.a, double(cs.m) / cs.omega, 0.3}, cs.omega);
    CHECK(relative(d.length, ref.length) < 1e-6);
    CHECK(relative(d.ks_l2sq, ref.ks_l2sq) < 1e-3);
    CHECK(relative(d.eps, ref.eps) < 1e-3);
    CHECK(relative(2 * d.energy, ref.k_l2sq) < 1e-5);
  }
}

TEST_CASE("eps and Q are invariant under similarities") {
  for (const Curve& c : smooth_test_curves()) {
    const auto base = diagnostics(compute_geometry(c), c);
    if (base.eps < 1e-12) continue;
    std::vector<Curve> moved;
    for (double lambda : {0.5, 2.0, 10.0, 5.0}) moved.push_back(scaled(c, lambda));
    moved.push_back(rotated(c, pi / 7));
    moved.push_back(translated(c, Point<double>(3, -4)));
    for (const Curve& m : moved) {
      const auto d = diagnostics(compute_geometry(m), m);
      CHECK(relative(d.eps, base.eps) < 1e-10);
      CHECK(relative(d.q, base.q) < 1e-10);
    }
  }
}

TEST_CASE("Poincare equality for the first Fourier mode") {
  const Index n = 512;
  const Curve c = unit_circle(n);
  const Geometry g = compute_geometry(c);
  Field<double> f(n), f3(n);
  for (Index i = 0; i < n; ++i) {
    f[i] = std::sin(2 * pi * double(i) / double(n));
    f3[i] = std::sin(6 * pi * double(i) / double(n));
  }
  const PoincareMargin m1 = poincare_margin(g, f);
  CHECK(std::abs(m1.ratio_l2 - 1) < 1e-3);
  CHECK(m1.ratio_sup <= 1 + 1e-2);
  const PoincareMargin m3 = poincare_margin(g, f3);
  CHECK(std::abs(m3.ratio_l2 - 1.0 / 9.0) < 1e-3);
  CHECK(m3.ratio_sup <= 1 + 1e-2);
}

TEST_CASE("Poincare ratios for k - kbar") {
  for (const Curve& c : {perturbed(1, 3, 0.05, 512), perturbed(2, 5, 0.01, 512), ellipse_at(2.0, 1.0, 512)}) {
    const Geometry g = compute_geometry(c);
    const PoincareMargin m = poincare_margin(g, remove_average(g, g.k));
    CHECK(m.ratio_l2 <= 1 + 1e-2);
    CHECK(m.ratio_sup <= 1 + 1e-2);
  }
}

TEST_CASE("Poincare rejects fields with nonzero average") {
  const Geometry g = compute_geometry(unit_circle(64));
  Field<double> f = Field<double>::Constant(64, 1.0);
  f[0] = 2.0;
  CHECK_THROWS_AS(poincare_margin(g, f), std::invalid_argument);
  CHECK(poincare_margin(g, Field<double>(Field<double>::Zero(64))).ratio_l2 == 0.0);
}

TEST_CASE("invalid curves are rejected") {
  CHECK_THROWS_AS(unit_circle(15), GeometryError);
  Points<double> p = unit_circle(32).points();
  p.col(5) = p.col(4);
  CHECK_THROWS_AS(Curve{p}, GeometryError);
  p = unit_circle(32).points();
  p(0, 3) = std::nan("");
  CHECK_THROWS_AS(Curve{p}, GeometryError);
}

TEST_CASE("degraded meshes are refused") {
  const Index n = 64;
  Points<double> p(2, n);
  for (Index i = 0; i < n; ++i) {
    // Strongly clustered parameter: u -> u + 0.15 sin(2 pi u)/(2 pi) compresses one side.
    const double u = double(i) / double(n);
    const double s = 2 * pi * (u + 0.155 * std::sin(2 * pi * u));
    p.col(i) << std::cos(s), std::sin(s);
  }
  const Curve c(p);
  CHECK(mesh_ratio(c) > 10);
  CHECK_THROWS_AS(compute_geometry(c), GeometryError);
  GeometryOptions loose;
  loose.max_mesh_ratio = 100;
  CHECK_NOTHROW(compute_geometry(c, loose));
}

TEST_CASE("periodic indexing") {
  const Curve c = unit_circle(32);
  CHECK(c.point(32) == c.point(0));
  CHECK(c.point(-1) == c.point(31));
  CHECK(c.point(65) == c.point(1));
}
