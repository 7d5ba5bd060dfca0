#pragma once

// Tangent-angle interface representation: closure of the curve, reconstruction
// of omega and z, enclosed area, and the divided differences q1, q2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "hele_shaw/errors.hpp"
#include "hele_shaw/spectral.hpp"

namespace hele_shaw {

/// Interface unknowns. theta_tilde carries modes |k| >= 2 only; theta_hat1 is
/// the k = 1 coefficient (k = -1 is its conjugate).
struct ShapeState {
  PeriodicField theta_tilde;
  cplx theta_hat1 = 0.0;
  double theta_hat0 = 0.0;
  double L = kTwoPi;
  double y0 = 0.0;
  double x0 = 0.0;
  double V_target = kPi;

  int size() const { return theta_tilde.size(); }

  static ShapeState circle(int n, double radius = 1.0) {
    ShapeState s;
    s.theta_tilde = PeriodicField::zeros(n);
    s.L = kTwoPi * radius;
    s.V_target = kPi * radius * radius;
    return s;
  }
};

/// theta_hat1 e^{i alpha} + c.c. + theta_tilde (no constant mode).
inline PeriodicField shape_angle(const PeriodicField& theta_tilde, cplx theta_hat1) {
  const int n = theta_tilde.size();
  std::vector<cplx> c = theta_tilde.coeffs();
  c[PeriodicField::index(1, n)] = theta_hat1;
  c[PeriodicField::index(-1, n)] = std::conj(theta_hat1);
  return PeriodicField::from_coeffs(std::move(c), true);
}

/// Full tangent angle theta including theta_hat0.
inline PeriodicField full_theta(const ShapeState& s) {
  return shape_angle(s.theta_tilde, s.theta_hat1).plus_constant(s.theta_hat0);
}

/// exp(i(alpha + phi(alpha))) on the grid; phi excludes theta_hat0.
inline PeriodicField tangent_factor(const PeriodicField& phi) {
  const int n = phi.size();
  std::vector<cplx> v(n);
  for (int j = 0; j < n; ++j) v[j] = std::exp(kI * (grid_point(j, n) + phi.value(j).real()));
  return PeriodicField::from_values(std::move(v), false);
}

/// Closure residual int_0^{2pi} exp(i(pi/2 + alpha + phi)) dalpha.
inline cplx closure_residual(const PeriodicField& theta_tilde, cplx theta_hat1) {
  return kI * integrate(tangent_factor(shape_angle(theta_tilde, theta_hat1)));
}

/// Real odd fields have purely imaginary coefficients.
inline bool is_odd_field(const PeriodicField& f, double tol = 1e-14) {
  double scale = 0.0, even = 0.0;
  for (int k = 1; k <= f.max_mode(); ++k) {
    scale = std::max(scale, std::abs(f.coeff(k)));
    even = std::max(even, std::abs(f.coeff(k).real()));
  }
  even = std::max(even, std::abs(f.coeff(0)));
  return even <= tol * std::max(scale, 1.0);
}

struct ClosureOptions {
  double tolerance = 1e-13;
  int max_iterations = 50;
};

/// Newton solve of the closure constraint for theta_hat1 = a + i b.
inline cplx solve_closure(const PeriodicField& theta_tilde, cplx guess = 0.0,
                          const ClosureOptions& opt = {}) {
  const int n = theta_tilde.size();
  const bool odd = is_odd_field(theta_tilde);
  double a = odd ? 0.0 : guess.real();
  double b = guess.imag();
  std::vector<double> cosa(n), sina(n);
  for (int j = 0; j < n; ++j) {
    cosa[j] = std::cos(grid_point(j, n));
    sina[j] = std::sin(grid_point(j, n));
  }
  const double h = kTwoPi / n;
  for (int it = 0; it < opt.max_iterations; ++it) {
    cplx R = 0.0, Ra = 0.0, Rb = 0.0;
    for (int j = 0; j < n; ++j) {
      const double phase = grid_point(j, n) + 2.0 * a * cosa[j] - 2.0 * b * sina[j] +
                           theta_tilde.value(j).real();
      const cplx E = std::exp(kI * phase);
      R += E;
      Ra += 2.0 * kI * cosa[j] * E;
      Rb += -2.0 * kI * sina[j] * E;
    }
    R *= h;
    Ra *= h;
    Rb *= h;
    if (!std::isfinite(R.real()) || !std::isfinite(R.imag())) break;
    if (std::abs(R) <= opt.tolerance * kTwoPi) return {a, b};
    if (odd) {
      // R is real for odd data; only b moves.
      if (Rb.real() == 0.0) break;
      b -= R.real() / Rb.real();
    } else {
      const double j11 = Ra.real(), j12 = Rb.real(), j21 = Ra.imag(), j22 = Rb.imag();
      const double det = j11 * j22 - j12 * j21;
      if (det == 0.0) break;
      const double da = (j22 * R.real() - j12 * R.imag()) / det;
      const double db = (-j21 * R.real() + j11 * R.imag()) / det;
      a -= da;
      b -= db;
    }
  }
  const cplx res = closure_residual(theta_tilde, {a, b});
  if (std::abs(res) <= 10.0 * opt.tolerance * kTwoPi) return {a, b};
  throw ClosureFailure("closure constraint did not converge (|residual| = " +
                       std::to_string(std::abs(res)) + ")");
}

/// omega(alpha) = int_0^alpha exp(i(alpha' + phi(alpha'))) dalpha'. The secular
/// part is discarded; it vanishes when the closure constraint holds.
inline PeriodicField reconstruct_omega(const PeriodicField& phi, cplx* secular = nullptr) {
  AntiDerivative F = cumulative_integral(tangent_factor(phi));
  if (secular != nullptr) *secular = F.slope;
  return F.periodic;
}

/// Im int omega_alpha conj(omega) dalpha.
inline double area_integral(const PeriodicField& omega) {
  const PeriodicField omega_alpha = derivative(omega);
  return l2_inner(omega, omega_alpha).imag();
}

inline double length_from_area(const PeriodicField& theta_tilde, cplx theta_hat1, double V) {
  const double I = area_integral(reconstruct_omega(shape_angle(theta_tilde, theta_hat1)));
  if (!(I > 0.0) || !(V > 0.0)) throw GeometryFailure("degenerate area integral");
  return std::sqrt(8.0 * kPi * kPi * V / I);
}

inline double compute_area(const ShapeState& s) {
  const double I = area_integral(reconstruct_omega(shape_angle(s.theta_tilde, s.theta_hat1)));
  return s.L * s.L / (8.0 * kPi * kPi) * I;
}

/// Wraps alpha - alpha' into (-pi, pi].
inline double wrap_difference(double d) {
  while (d > kPi) d -= kTwoPi;
  while (d <= -kPi) d += kTwoPi;
  return d;
}

/// Divided differences of a periodic complex curve w sampled on the grid:
///   q1(a, a') = (w(a) - w(a')) / (a - a'),            q1(a, a) = w_a(a)
///   q2(a, a') = (w(a) - w(a') - w_a(a)(a - a'))/(a - a')^2, q2(a, a) = -w_aa(a)/2
/// with a - a' taken in (-pi, pi]. Full tables are kept for N <= 512.
class DividedDifferences {
 public:
  static constexpr int kTableLimit = 512;

  DividedDifferences() = default;

  explicit DividedDifferences(const PeriodicField& w)
      : w_(w), w_alpha_(derivative(w)), w_alphalpha_(derivative(w, 2)) {
    n_ = w.size();
    if (n_ <= kTableLimit) {
      q1_.resize(static_cast<size_t>(n_) * n_);
      q2_.resize(static_cast<size_t>(n_) * n_);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          q1_[i * n_ + j] = compute_q1(i, j);
          q2_[i * n_ + j] = compute_q2(i, j);
        }
    }
  }

  int size() const { return n_; }
  bool tabulated() const { return !q1_.empty(); }

  cplx q1(int i, int j) const { return tabulated() ? q1_[i * n_ + j] : compute_q1(i, j); }
  cplx q2(int i, int j) const { return tabulated() ? q2_[i * n_ + j] : compute_q2(i, j); }

  std::vector<cplx> q1_row(int i) const {
    std::vector<cplx> r(n_);
    for (int j = 0; j < n_; ++j) r[j] = q1(i, j);
    return r;
  }
  std::vector<cplx> q2_row(int i) const {
    std::vector<cplx> r(n_);
    for (int j = 0; j < n_; ++j) r[j] = q2(i, j);
    return r;
  }

  double min_abs_q1() const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m = std::min(m, std::abs(q1(i, j)));
    return m;
  }

  /// Off-grid evaluation used by convergence checks.
  cplx q2_at(double a, double ap) const {
    const double d = wrap_difference(a - ap);
    return (w_.evaluate(a) - w_.evaluate(ap) - w_alpha_.evaluate(a) * d) / (d * d);
  }

 private:
  cplx compute_q1(int i, int j) const {
    if (i == j) return w_alpha_.value(i);
    const double d = wrap_difference(grid_point(i - j, n_));
    return (w_.value(i) - w_.value(j)) / d;
  }
  cplx compute_q2(int i, int j) const {
    if (i == j) return -0.5 * w_alphalpha_.value(i);
    const double d = wrap_difference(grid_point(i - j, n_));
    return (w_.value(i) - w_.value(j) - w_alpha_.value(i) * d) / (d * d);
  }

  int n_ = 0;
  PeriodicField w_, w_alpha_, w_alphalpha_;
  std::vector<cplx> q1_, q2_;
};

inline constexpr double kMinQ1 = 0.125;

/// min over grid pairs of |q1[w]| without building the tables.
inline double min_abs_q1(const PeriodicField& w) {
  const int n = w.size();
  const PeriodicField wa = derivative(w);
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    m = std::min(m, std::abs(wa.value(i)));
    for (int j = i + 1; j < n; ++j) {
      const double d = wrap_difference(grid_point(i - j, n));
      m = std::min(m, std::abs(w.value(i) - w.value(j)) / std::abs(d));
    }
  }
  return m;
}

/// Reconstructed curve and its derivatives for one shape state.
struct InterfaceGeometry {
  PeriodicField theta;         // full tangent angle
  PeriodicField theta_alpha;
  PeriodicField omega;         // omega(0) = 0
  PeriodicField z;
  PeriodicField z_alpha;
  PeriodicField z_alphalpha;
  double L = kTwoPi;
  double q1_min = 0.0;
  cplx closure_residual = 0.0;

  int size() const { return z.size(); }
};

struct GeometryOptions {
  bool check_self_intersection = true;
};

inline InterfaceGeometry build_geometry(const ShapeState& s, const GeometryOptions& opt = {}) {
  const int n = s.size();
  InterfaceGeometry g;
  g.L = s.L;
  const PeriodicField phi = shape_angle(s.theta_tilde, s.theta_hat1);
  g.theta = phi.plus_constant(s.theta_hat0);
  g.theta_alpha = derivative(g.theta);
  cplx secular = 0.0;
  g.omega = reconstruct_omega(phi, &secular);
  g.closure_residual = kTwoPi * kI * secular;

  const double scale = s.L / kTwoPi;
  const cplx rot = scale * std::exp(kI * (kPi / 2 + s.theta_hat0));
  const cplx z0(s.x0, s.y0);
  std::vector<cplx> z(n), za(n), zaa(n);
  for (int j = 0; j < n; ++j) {
    z[j] = rot * g.omega.value(j) + z0;
    za[j] = scale * std::exp(kI * (kPi / 2 + grid_point(j, n) + g.theta.value(j).real()));
    zaa[j] = za[j] * kI * (1.0 + g.theta_alpha.value(j).real());
  }
  g.z = PeriodicField::from_values(std::move(z), false);
  g.z_alpha = PeriodicField::from_values(za, false);
  g.z_alphalpha = PeriodicField::from_values(zaa, false);

  if (opt.check_self_intersection) {
    g.q1_min = min_abs_q1(g.omega);
    if (!(g.q1_min >= kMinQ1))
      throw GeometryFailure("self-intersection guard: min|q1| = " + std::to_string(g.q1_min));
  }
  return g;
}

}  // namespace hele_shaw
