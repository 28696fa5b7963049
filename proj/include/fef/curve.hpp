// Discrete differential geometry of closed immersed planar curves.
//
// A curve is stored as N nodes sampled at u_i = i/N on the periodic parameter
// circle. Quantities live on a staggered grid:
//
//   nodes  i        : k, k_ss, tangent, normal, quadrature weight ds_i
//   edges  i+1/2    : k_s, k_sss, chord, arc-corrected length a_i
//
// Curvature is the turning angle of the polygon at a node divided by the dual
// arclength there; edge lengths are corrected from chord to arc using the local
// turning. Both choices are exact on round circles and keep the discrete
// Gauss-Bonnet sum equal to 2*pi times an integer.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fef {

using Index = Eigen::Index;

template <typename Scalar>
using Point = Eigen::Matrix<Scalar, 2, 1>;

/// Column i is node i.
template <typename Scalar>
using Points = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Index kMinNodes = 16;
inline constexpr double kDefaultMaxMeshRatio = 10.0;

template <typename Scalar>
inline Point<Scalar> rotate_ccw(const Point<Scalar>& v) {
  return Point<Scalar>(-v.y(), v.x());
}

template <typename Scalar>
inline Scalar cross(const Point<Scalar>& a, const Point<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Periodic polygon of N >= 16 pairwise-distinct consecutive nodes.
template <typename Scalar>
class ClosedCurve {
 public:
  ClosedCurve() = default;

  explicit ClosedCurve(Points<Scalar> points) : points_(std::move(points)) {
    if (points_.cols() < kMinNodes) {
      throw GeometryError("closed curve needs at least " + std::to_string(kMinNodes) +
                          " nodes, got " + std::to_string(points_.cols()));
    }
    if (!points_.allFinite()) throw GeometryError("closed curve has non-finite nodes");
    for (Index i = 0; i < size(); ++i) {
      if ((point(i + 1) - point(i)).norm() <= Scalar(0)) {
        throw GeometryError("coincident consecutive nodes at index " + std::to_string(i));
      }
    }
  }

  Index size() const { return points_.cols(); }
  const Points<Scalar>& points() const { return points_; }

  /// Periodic access: point(i + N) == point(i).
  Point<Scalar> point(Index i) const { return points_.col(wrap(i)); }

  Index wrap(Index i) const {
    const Index n = size();
    return ((i % n) + n) % n;
  }

 private:
  Points<Scalar> points_;
};

template <typename Scalar>
Field<Scalar> chord_lengths(const ClosedCurve<Scalar>& curve) {
  const Index n = curve.size();
  Field<Scalar> len(n);
  for (Index i = 0; i < n; ++i) len[i] = (curve.point(i + 1) - curve.point(i)).norm();
  return len;
}

/// max segment / min segment.
template <typename Scalar>
Scalar mesh_ratio(const ClosedCurve<Scalar>& curve) {
  const Field<Scalar> len = chord_lengths(curve);
  return len.maxCoeff() / len.minCoeff();
}

template <typename Scalar>
ClosedCurve<Scalar> scaled(const ClosedCurve<Scalar>& curve, Scalar factor) {
  return ClosedCurve<Scalar>(curve.points() * factor);
}

template <typename Scalar>
ClosedCurve<Scalar> translated(const ClosedCurve<Scalar>& curve, const Point<Scalar>& shift) {
  return ClosedCurve<Scalar>(curve.points().colwise() + shift);
}

template <typename Scalar>
ClosedCurve<Scalar> rotated(const ClosedCurve<Scalar>& curve, Scalar angle) {
  Eigen::Matrix<Scalar, 2, 2> r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return ClosedCurve<Scalar>(r * curve.points());
}

/// Same image traversed in the opposite direction (node 0 kept in place).
template <typename Scalar>
ClosedCurve<Scalar> reversed(const ClosedCurve<Scalar>& curve) {
  const Index n = curve.size();
  Points<Scalar> p(2, n);
  for (Index i = 0; i < n; ++i) p.col(i) = curve.point(-i);
  return ClosedCurve<Scalar>(std::move(p));
}

struct GeometryOptions {
  double max_mesh_ratio = kDefaultMaxMeshRatio;
};

template <typename Scalar>
struct GeometricQuantities {
  Field<Scalar> chord;       // edge i: |p(i+1) - p(i)|
  Field<Scalar> arc;         // edge i: arc-length estimate a_i
  Field<Scalar> ds;          // node i: (a_{i-1} + a_i) / 2
  Field<Scalar> turning;     // node i: signed angle from edge i-1 to edge i
  Points<Scalar> edge_tangent;
  Points<Scalar> tangent;    // node unit tangent (bisector of adjacent edges)
  Points<Scalar> normal;     // rot(tangent) by +pi/2
  Field<Scalar> k;           // node
  Field<Scalar> ks;          // edge
  Field<Scalar> kss;         // node
  Field<Scalar> ksss;        // edge
  Scalar length = 0;
  Scalar total_turning = 0;  // sum of turning angles

  Index size() const { return k.size(); }

  Scalar integrate_nodes(const Field<Scalar>& f) const { return (f * ds).sum(); }
  Scalar integrate_edges(const Field<Scalar>& f) const { return (f * arc).sum(); }

  /// Node field -> edge field of arclength derivatives.
  Field<Scalar> d_node_to_edge(const Field<Scalar>& f) const {
    const Index n = size();
    Field<Scalar> out(n);
    for (Index i = 0; i < n; ++i) out[i] = (f[(i + 1) % n] - f[i]) / arc[i];
    return out;
  }

  /// Edge field -> node field of arclength derivatives.
  Field<Scalar> d_edge_to_node(const Field<Scalar>& g) const {
    const Index n = size();
    Field<Scalar> out(n);
    for (Index i = 0; i < n; ++i) out[i] = (g[i] - g[(i + n - 1) % n]) / ds[i];
    return out;
  }

  /// Interpolates a node field to edges.
  Field<Scalar> to_edges(const Field<Scalar>& f) const {
    const Index n = size();
    Field<Scalar> out(n);
    for (Index i = 0; i < n; ++i) out[i] = Scalar(0.5) * (f[i] + f[(i + 1) % n]);
    return out;
  }
};

namespace detail {

// x / sin(x), smooth through 0.
template <typename Scalar>
Scalar x_over_sin(Scalar x) {
  if (std::abs(x) < Scalar(1e-4)) return Scalar(1) + x * x / Scalar(6);
  return x / std::sin(x);
}

}  // namespace detail

template <typename Scalar>
GeometricQuantities<Scalar> compute_geometry(const ClosedCurve<Scalar>& curve,
                                             const GeometryOptions& options = {}) {
  const Index n = curve.size();
  if (n < kMinNodes) throw GeometryError("too few nodes for geometry");

  GeometricQuantities<Scalar> g;
  g.chord = chord_lengths(curve);
  const Scalar ratio = g.chord.maxCoeff() / g.chord.minCoeff();
  if (!(ratio <= Scalar(options.max_mesh_ratio))) {
    throw GeometryError("mesh quality ratio " + std::to_string(static_cast<double>(ratio)) +
                        " exceeds limit " + std::to_string(options.max_mesh_ratio));
  }

  g.edge_tangent.resize(2, n);
  for (Index i = 0; i < n; ++i) {
    g.edge_tangent.col(i) = (curve.point(i + 1) - curve.point(i)) / g.chord[i];
  }

  g.turning.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Point<Scalar> prev = g.edge_tangent.col((i + n - 1) % n);
    const Point<Scalar> next = g.edge_tangent.col(i);
    g.turning[i] = std::atan2(cross(prev, next), prev.dot(next));
  }
  g.total_turning = g.turning.sum();

  g.arc.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Scalar half_rotation = (g.turning[i] + g.turning[(i + 1) % n]) / Scalar(4);
    g.arc[i] = g.chord[i] * detail::x_over_sin(half_rotation);
  }
  g.length = g.arc.sum();

  g.ds.resize(n);
  g.tangent.resize(2, n);
  g.normal.resize(2, n);
  for (Index i = 0; i < n; ++i) {
    const Index im = (i + n - 1) % n;
    g.ds[i] = Scalar(0.5) * (g.arc[im] + g.arc[i]);
    Point<Scalar> t = g.edge_tangent.col(im) + g.edge_tangent.col(i);
    const Scalar tn = t.norm();
    if (!(tn > Scalar(1e-12))) throw GeometryError("cusp at node " + std::to_string(i));
    t /= tn;
    g.tangent.col(i) = t;
    g.normal.col(i) = rotate_ccw<Scalar>(t);
  }

  g.k = g.turning / g.ds;
  g.ks = g.d_node_to_edge(g.k);
  g.kss = g.d_edge_to_node(g.ks);
  g.ksss = g.d_node_to_edge(g.kss);
  return g;
}

struct TurningNumber {
  int absolute = 0;
  int signed_value = 0;
  double raw = 0.0;
};

/// Snaps a total-curvature/(2 pi) value to an integer, refusing values farther
/// than `tolerance` from one.
inline TurningNumber snap_turning_number(double raw, double tolerance = 0.1) {
  const double nearest = std::round(raw);
  if (std::abs(raw - nearest) > tolerance) {
    throw GeometryError("ambiguous turning number " + std::to_string(raw));
  }
  const int n = static_cast<int>(nearest);
  return {std::abs(n), n, raw};
}

template <typename Scalar>
TurningNumber turning_number(const GeometricQuantities<Scalar>& geom) {
  const double raw = static_cast<double>(geom.integrate_nodes(geom.k)) / (2.0 * std::numbers::pi);
  return snap_turning_number(raw);
}

template <typename Scalar>
struct ScalarDiagnostics {
  Scalar length = 0;
  Scalar energy = 0;          // E = 1/2 int k^2 ds
  int omega = 0;              // |turning number|
  int omega_signed = 0;
  Scalar mean_curvature = 0;  // 2 pi omega_signed / L
  Scalar ks_l2sq = 0;         // int k_s^2 ds
  Scalar eps = 0;             // L^3 int k_s^2 ds
  Scalar q = 0;               // int k_s^2 ds / (int k^2 ds)^3
  Point<Scalar> centre = Point<Scalar>::Zero();
};

template <typename Scalar>
ScalarDiagnostics<Scalar> diagnostics(const GeometricQuantities<Scalar>& geom,
                                      const ClosedCurve<Scalar>& curve) {
  ScalarDiagnostics<Scalar> d;
  const TurningNumber tn = turning_number(geom);
  d.length = geom.length;
  const Scalar k2 = geom.integrate_nodes(geom.k.square());
  d.energy = Scalar(0.5) * k2;
  d.omega = tn.absolute;
  d.omega_signed = tn.signed_value;
  d.mean_curvature = Scalar(2 * std::numbers::pi) * Scalar(tn.signed_value) / d.length;
  d.ks_l2sq = geom.integrate_edges(geom.ks.square());
  d.eps = d.length * d.length * d.length * d.ks_l2sq;
  d.q = d.ks_l2sq / (k2 * k2 * k2);
  d.centre = (curve.points().array().rowwise() * geom.ds.transpose()).rowwise().sum().matrix() /
             d.length;
  return d;
}

struct PoincareMargin {
  double ratio_l2 = 0.0;
  double ratio_sup = 0.0;
};

/// Ratios of both sides of the L2 and sup-norm Wirtinger inequalities for a
/// zero-average node field. Each is <= 1 + O(N^-2).
template <typename Scalar>
PoincareMargin poincare_margin(const GeometricQuantities<Scalar>& geom, const Field<Scalar>& f,
                               double average_tolerance = 1e-8) {
  if (f.size() != geom.size()) throw std::invalid_argument("field size mismatch");
  const Scalar scale = f.abs().maxCoeff();
  if (scale == Scalar(0)) return {};
  const Scalar mean = geom.integrate_nodes(f) / geom.length;
  if (std::abs(static_cast<double>(mean / scale)) > average_tolerance) {
    throw std::invalid_argument("poincare_margin requires a zero-average field (mean " +
                                std::to_string(static_cast<double>(mean)) + ")");
  }
  const Field<Scalar> fs = geom.d_node_to_edge(f);
  const Scalar fs2 = geom.integrate_edges(fs.square());
  const Scalar l = geom.length;
  const Scalar two_pi = Scalar(2 * std::numbers::pi);
  PoincareMargin m;
  m.ratio_l2 = static_cast<double>(geom.integrate_nodes(f.square()) / (l * l / (two_pi * two_pi) * fs2));
  m.ratio_sup = static_cast<double>(scale * scale / (l / two_pi * fs2));
  return m;
}

/// Subtracts the ds-weighted mean.
template <typename Scalar>
Field<Scalar> remove_average(const GeometricQuantities<Scalar>& geom, const Field<Scalar>& f) {
  return f - geom.integrate_nodes(f) / geom.length;
}

using Curve = ClosedCurve<double>;
using Geometry = GeometricQuantities<double>;

}  // namespace fef
