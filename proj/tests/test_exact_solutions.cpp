#include "fef/curve.hpp"
#include "fef/exact_solutions.hpp"
#include "fef/theory_constants.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace fef;

namespace {

constexpr double pi = std::numbers::pi;

// max_i |k_i^3 + 27 <beta_i, nu_i>| and max_i |k_ss,i - 6 <beta_i, nu_i>| at scale 1.
struct LemniscateDefects {
  double cubic = 0;
  double second = 0;
};

LemniscateDefects lemniscate_defects(Index n) {
  const Curve c = lemniscate_at(LemniscateSolution<double>{1.0}, 0.0, n);
  const Geometry g = compute_geometry(c);
  LemniscateDefects d;
  for (Index i = 0; i < n; ++i) {
    const double bn = c.point(i).dot(g.normal.col(i));
    d.cubic = std::max(d.cubic, std::abs(g.k[i] * g.k[i] * g.k[i] + 27 * bn));
    d.second = std::max(d.second, std::abs(g.kss[i] - 6 * bn));
  }
  return d;
}

}  // namespace

TEST_CASE("circle_at samples the radius law") {
  const CircleSolution<double> unit{1, 1.0, Point<double>::Zero()};
  const Curve c0 = circle_at(unit, 0.0, 64);
  CHECK((c0.points().colwise().norm().array() - 1).abs().maxCoeff() < 1e-15);
  CHECK(c0.point(0).isApprox(Point<double>(1, 0)));

  CHECK(unit.radius(40.0) == doctest::Approx(3.0).epsilon(1e-15));
  const Curve c40 = circle_at(unit, 40.0, 64);
  CHECK((c40.points().colwise().norm().array() - 3).abs().maxCoeff() < 1e-14);

  const CircleSolution<double> twice{2, 1.0, Point<double>::Zero()};
  CHECK(twice.radius(0.5) == doctest::Approx(1.189207115002721).epsilon(1e-15));
  CHECK(turning_number(compute_geometry(circle_at(twice, 0.5, 128))).absolute == 2);

  const CircleSolution<double> shifted{1, 2.0, Point<double>(0.5, -1)};
  const Curve cs = circle_at(shifted, 0.0, 64);
  CHECK(((cs.points().colwise() - shifted.centre).colwise().norm().array() - 2).abs().maxCoeff() < 1e-14);
}

TEST_CASE("circle radius is strictly increasing") {
  const CircleSolution<double> sol{1, 0.7, Point<double>::Zero()};
  double prev = sol.radius(0);
  for (double t = 0.1; t < 50; t += 0.37) {
    CHECK(sol.radius(t) > prev);
    prev = sol.radius(t);
  }
}

TEST_CASE("circle length law is the equality case") {
  for (int omega : {1, 2, 3}) {
    const CircleSolution<double> sol{omega, 1.3, Point<double>::Zero()};
    for (double t : {0.0, 0.5, 3.0, 40.0}) {
      const double l0 = sol.length(0), lt = sol.length(t);
      const double w4 = std::pow(double(omega), 4);
      CHECK(std::pow(lt, 4) - std::pow(l0, 4) == doctest::Approx(32 * w4 * std::pow(pi, 4) * t).epsilon(1e-12));
      const Geometry g = compute_geometry(circle_at(sol, t, 256 * omega));
      CHECK(g.length == doctest::Approx(lt).epsilon(1e-12));
      CHECK((g.k - 1 / sol.radius(t)).abs().maxCoeff() < 1e-9 / sol.radius(t));
    }
  }
}

TEST_CASE("generators reject bad arguments") {
  CHECK_THROWS(circle_at(CircleSolution<double>{0, 1.0, Point<double>::Zero()}, 0.0, 64));
  CHECK_THROWS(circle_at(CircleSolution<double>{1, 1.0, Point<double>::Zero()}, -1.0, 64));
  CHECK_THROWS(lemniscate_at(LemniscateSolution<double>{1.0}, -0.1, 64));
  CHECK_THROWS(perturbed_circle<double>(0, {}, 1.0, 64));
  CHECK_THROWS(perturbed_circle<double>(1, {}, -1.0, 64));
  CHECK_THROWS_AS(perturbed_circle<double>(1, {{3, 1.2, 0.0}}, 1.0, 64), GeometryError);
}

TEST_CASE("lemniscate sample points") {
  const Curve c = lemniscate_at(LemniscateSolution<double>{1.0}, 0.0, 1024);
  CHECK((c.point(0) - Point<double>(1, 0)).norm() < 1e-15);
  CHECK(c.point(256).norm() < 1e-15);  // angle pi/2: the self-crossing
  CHECK(c.point(768).norm() < 1e-15);
  CHECK((c.point(512) - Point<double>(-1, 0)).norm() < 1e-15);
  CHECK(LemniscateSolution<double>{1.0}.scale(1.0) == doctest::Approx(std::pow(31.0, 0.25)));
  CHECK(LemniscateSolution<double>{2.0}.scale(0.0) == doctest::Approx(2.0));
  const Curve scaled_lem = lemniscate_at(LemniscateSolution<double>{1.0}, 1.0, 64);
  CHECK(scaled_lem.point(0).x() == doctest::Approx(std::pow(31.0, 0.25)));
}

TEST_CASE("lemniscate turning number is zero") {
  for (Index n : {256, 1024}) {
    const TurningNumber tn = turning_number(compute_geometry(lemniscate_at(LemniscateSolution<double>{1.0}, 0.0, n)));
    CHECK(tn.absolute == 0);
    CHECK(std::abs(tn.raw) < 1e-12);
  }
}

TEST_CASE("lemniscate curvature identities") {
  const LemniscateDefects fine = lemniscate_defects(2048);
  CHECK(fine.cubic <= 1e-2);
  CHECK(fine.second <= 1e-2);
  // Second-order convergence of both identities.
  const LemniscateDefects coarse = lemniscate_defects(512);
  const LemniscateDefects mid = lemniscate_defects(1024);
  CHECK(std::log2(coarse.cubic / mid.cubic) > 1.7);
  CHECK(std::log2(mid.cubic / fine.cubic) > 1.7);
  CHECK(std::log2(coarse.second / mid.second) > 1.7);
  CHECK(std::log2(mid.second / fine.second) > 1.7);
}

TEST_CASE("unperturbed radial graph is a circle") {
  const auto p = perturbed_circle<double>(1, {}, 1.0, 256);
  CHECK(p.eps0 < 1e-14);
  CHECK(p.omega == 1);
  const Geometry g = compute_geometry(p.curve);
  CHECK((g.k - 1).abs().maxCoeff() < 1e-10);
}

TEST_CASE("perturbed circle reports the measured eps") {
  // m = 3 with a = 1e-3 gives eps(0) of about 0.45: positive, but far above
  // eps_*(1) ~ 9.5e-4. Smaller amplitudes are needed to sit below the threshold.
  const auto p = perturbed_circle<double>(1, {{3, 1e-3, 0.0}}, 1.0, 512);
  const auto ref = oracle::radial_graph_integrals({1.0, 1e-3, 3.0, 0.0}, 1);
  CHECK(p.eps0 > 0);
  CHECK(p.eps0 == doctest::Approx(ref.eps).epsilon(2e-3));
  CHECK(p.eps0 == doctest::Approx(0.448865567962401).epsilon(2e-3));
  CHECK(p.eps0 > eps_star<long double>(1));

  const auto small = perturbed_circle<double>(1, {{3, 4e-5, 0.0}}, 1.0, 512);
  CHECK(small.eps0 > 0);
  CHECK(small.eps0 < eps_star<long double>(1));
}

TEST_CASE("perturbation keeps the turning number of a double circle") {
  const auto p = perturbed_circle<double>(2, {{5, 1e-2, 0.4}}, 1.0, 512);
  CHECK(p.omega == 2);
  CHECK(turning_number(compute_geometry(p.curve)).absolute == 2);
  const auto ref = oracle::radial_graph_integrals({1.0, 1e-2, 2.5, 0.4}, 2);
  CHECK(p.eps0 == doctest::Approx(ref.eps).epsilon(2e-3));
}

TEST_CASE("several modes superpose") {
  const auto p = perturbed_circle<double>(1, {{2, 1e-3, 0.1}, {3, 5e-4, 1.0}, {5, 1e-4, 2.0}}, 2.0, 512);
  for (Index i = 0; i < 512; ++i) {
    const double u = double(i) / 512;
    const double r = 2 * (1 + 1e-3 * std::cos(4 * pi * u + 0.1) + 5e-4 * std::cos(6 * pi * u + 1.0) +
                          1e-4 * std::cos(10 * pi * u + 2.0));
    CHECK(p.curve.point(i).norm() == doctest::Approx(r).epsilon(1e-14));
  }
}

TEST_CASE("ellipse generator") {
  const Curve e = ellipse_at(3.0, 1.0, 128);
  CHECK(e.point(0).isApprox(Point<double>(3, 0)));
  CHECK(e.point(32).isApprox(Point<double>(0, 1)));
}
