// Arclength-uniform resampling of a closed curve through its trigonometric
// interpolant. The image is reproduced to spectral accuracy; only the node
// positions along it change.
#pragma once

#include "fef/curve.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <numbers>
#include <vector>

namespace fef {

/// Band-limited interpolant z(u) = sum_m c_m exp(2 pi i m u) through the nodes
/// of a curve sampled at u_i = i/N. The Nyquist coefficient is split evenly
/// between +N/2 and -N/2.
template <typename Scalar>
class TrigInterpolant {
 public:
  using Complex = std::complex<Scalar>;

  explicit TrigInterpolant(const Points<Scalar>& nodes) : n_(nodes.cols()) {
    std::vector<Complex> z(n_), c;
    for (Index i = 0; i < n_; ++i) z[i] = Complex(nodes(0, i), nodes(1, i));
    Eigen::FFT<Scalar> fft;
    fft.fwd(c, z);
    // Centred storage: coeff_[m + half_] for m in [-half_, half_].
    half_ = n_ / 2;
    coeff_.assign(2 * half_ + 1, Complex(0));
    for (Index j = 0; j < n_; ++j) {
      const Index m = j <= half_ ? j : j - n_;
      coeff_[m + half_] += c[j] / Scalar(n_);
    }
    if (n_ % 2 == 0) {
      const Complex nyq = coeff_[2 * half_];
      coeff_[2 * half_] = nyq / Scalar(2);
      coeff_[0] = nyq / Scalar(2);
    }
  }

  Index wavenumber_bound() const { return half_; }

  /// Coefficient of exp(2 pi i m u).
  Complex coefficient(Index m) const { return coeff_[m + half_]; }

  Point<Scalar> value(Scalar u) const { return evaluate(u, 0); }
  Point<Scalar> derivative(Scalar u) const { return evaluate(u, 1); }

  /// Samples the derivative on a uniform grid of `m` >= N points.
  std::vector<Complex> derivative_on_grid(Index m) const {
    std::vector<Complex> spec(m, Complex(0)), out;
    const Scalar two_pi = Scalar(2 * std::numbers::pi);
    for (Index w = -half_; w <= half_; ++w) {
      spec[(w + m) % m] += Complex(0, two_pi * Scalar(w)) * coefficient(w) * Scalar(m);
    }
    Eigen::FFT<Scalar> fft;
    fft.inv(out, spec);
    return out;
  }

 private:
  Point<Scalar> evaluate(Scalar u, int order) const {
    const Scalar two_pi = Scalar(2 * std::numbers::pi);
    Complex sum(0);
    // exp(2 pi i m u) by recurrence, re-anchored every 32 terms.
    for (Index m0 = -half_; m0 <= half_; m0 += 32) {
      const Index m1 = std::min<Index>(m0 + 32, half_ + 1);
      Complex w = std::polar(Scalar(1), two_pi * Scalar(m0) * u);
      const Complex step = std::polar(Scalar(1), two_pi * u);
      for (Index m = m0; m < m1; ++m) {
        Complex term = coefficient(m) * w;
        if (order == 1) term *= Complex(0, two_pi * Scalar(m));
        sum += term;
        w *= step;
      }
    }
    return Point<Scalar>(sum.real(), sum.imag());
  }

  Index n_ = 0;
  Index half_ = 0;
  std::vector<Complex> coeff_;
};

struct RedistributeOptions {
  int oversampling = 8;
  double max_mesh_ratio = kDefaultMaxMeshRatio;
};

/// Moves the nodes along the interpolated image so consecutive nodes are
/// separated by equal arclength. Node 0 stays fixed.
template <typename Scalar>
ClosedCurve<Scalar> redistribute(const ClosedCurve<Scalar>& curve, const RedistributeOptions& options = {}) {
  using Complex = std::complex<Scalar>;
  const Index n = curve.size();
  const TrigInterpolant<Scalar> interp(curve.points());
  const Index m = n * options.oversampling;
  const Scalar two_pi = Scalar(2 * std::numbers::pi);

  // Speed on the fine grid, then its spectral antiderivative s(u).
  const std::vector<Complex> dz = interp.derivative_on_grid(m);
  std::vector<Complex> speed(m), speed_hat;
  for (Index j = 0; j < m; ++j) speed[j] = Complex(std::abs(dz[j]), 0);
  Eigen::FFT<Scalar> fft;
  fft.fwd(speed_hat, speed);
  const Scalar total = speed_hat[0].real() / Scalar(m);
  std::vector<Complex> anti(m, Complex(0)), periodic;
  for (Index j = 1; j < m; ++j) {
    const Index w = j <= m / 2 ? j : j - m;
    if (2 * j == m) continue;  // drop the unpaired Nyquist term
    anti[j] = speed_hat[j] / Complex(0, two_pi * Scalar(w));
  }
  fft.inv(periodic, anti);
  std::vector<Scalar> s(m + 1), v(m + 1);
  for (Index j = 0; j < m; ++j) {
    s[j] = total * Scalar(j) / Scalar(m) + periodic[j].real() - periodic[0].real();
    v[j] = speed[j].real();
  }
  s[m] = total;
  v[m] = v[0];
  for (Index j = 0; j < m; ++j) {
    if (!(s[j + 1] > s[j])) throw GeometryError("arclength table is not monotone; curve under-resolved");
  }

  const Scalar h = Scalar(1) / Scalar(m);
  Points<Scalar> out(2, n);
  out.col(0) = curve.point(0);
  Index cell = 0;
  for (Index i = 1; i < n; ++i) {
    const Scalar target = total * Scalar(i) / Scalar(n);
    while (cell + 1 < m && s[cell + 1] < target) ++cell;
    // Invert the cubic Hermite interpolant of s on [cell, cell+1].
    const Scalar s0 = s[cell], s1 = s[cell + 1];
    const Scalar d0 = v[cell] * h, d1 = v[cell + 1] * h;
    Scalar x = (target - s0) / (s1 - s0);
    for (int it = 0; it < 8; ++it) {
      const Scalar x2 = x * x, x3 = x2 * x;
      const Scalar val = (2 * x3 - 3 * x2 + 1) * s0 + (x3 - 2 * x2 + x) * d0 + (-2 * x3 + 3 * x2) * s1 +
                         (x3 - x2) * d1;
      const Scalar der = (6 * x2 - 6 * x) * s0 + (3 * x2 - 4 * x + 1) * d0 + (-6 * x2 + 6 * x) * s1 +
                         (3 * x2 - 2 * x) * d1;
      const Scalar dx = (val - target) / der;
      x -= dx;
      if (std::abs(dx) < Scalar(1e-15)) break;
    }
    x = std::clamp(x, Scalar(0), Scalar(1));
    out.col(i) = interp.value((Scalar(cell) + x) * h);
  }

  ClosedCurve<Scalar> result(std::move(out));
  if (mesh_ratio(result) > Scalar(options.max_mesh_ratio)) {
    throw GeometryError("redistribution produced a degraded mesh");
  }
  return result;
}

}  // namespace fef
