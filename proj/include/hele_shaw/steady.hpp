#pragma once

// Steady translating bubble: residual, linearisation at the circle, the
// triangular operator A, the fixed-point map and beta-continuation.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "hele_shaw/errors.hpp"
#include "hele_shaw/evolution.hpp"
#include "hele_shaw/geometry.hpp"
#include "hele_shaw/operators.hpp"
#include "hele_shaw/spectral.hpp"
#include "hele_shaw/vortex.hpp"

namespace hele_shaw {

/// (Au)^(k) = (sigma/2) k^2 u^(k) - (1 + a_mu)(k+1)/(k+2) u^(k+1), k >= 2,
/// mirrored to k <= -2.
inline PeriodicField apply_A(const PeriodicField& u, double sigma, double a_mu) {
  const int n = u.size(), kmax = u.max_mode();
  std::vector<cplx> c(n, 0.0);
  for (int k = 2; k <= kmax; ++k) {
    const double diag = 0.5 * sigma * k * k;
    const double off = (1.0 + a_mu) * (k + 1.0) / (k + 2.0);
    c[PeriodicField::index(k, n)] = diag * u.coeff(k) - off * u.coeff(k + 1);
    c[PeriodicField::index(-k, n)] = diag * u.coeff(-k) - off * u.coeff(-k - 1);
  }
  return PeriodicField::from_coeffs(std::move(c), u.is_real());
}

/// Backward substitution from the top resolved mode.
inline PeriodicField invert_A(const PeriodicField& f, double sigma, double a_mu) {
  const int n = f.size(), kmax = f.max_mode();
  std::vector<cplx> c(n, 0.0);
  cplx up = 0.0, um = 0.0;
  for (int k = kmax; k >= 2; --k) {
    const double diag = 0.5 * sigma * k * k;
    const double off = (1.0 + a_mu) * (k + 1.0) / (k + 2.0);
    up = (f.coeff(k) + off * up) / diag;
    um = (f.coeff(-k) + off * um) / diag;
    c[PeriodicField::index(k, n)] = up;
    c[PeriodicField::index(-k, n)] = um;
  }
  return PeriodicField::from_coeffs(std::move(c), f.is_real());
}

/// Linearisation of the steady residual at the circle:
/// (sigma/2) H[h_aa] + [-i(1 + a_mu) sum_{k>=1} (k+1)/(k+2) h^(k+1) e^{ika} + c.c.].
inline PeriodicField frechet_at_circle(const PeriodicField& h, double sigma, double a_mu) {
  const int n = h.size(), kmax = h.max_mode();
  PeriodicField first = (0.5 * sigma) * hilbert(derivative(h, 2));
  std::vector<cplx> c(n, 0.0);
  for (int k = 1; k < kmax; ++k) {
    const cplx t = -kI * (1.0 + a_mu) * ((k + 1.0) / (k + 2.0)) * h.coeff(k + 1);
    c[PeriodicField::index(k, n)] += t;
    c[PeriodicField::index(-k, n)] += std::conj(t);
  }
  return first + PeriodicField::from_coeffs(std::move(c), true);
}

/// dU/du0 at the circle.
inline PeriodicField du_du0_at_circle(int n, const PhysicalParams& p) {
  return PeriodicField::sample(n, [&](double a) { return p.mu1_fraction() * std::cos(a); }, true);
}

/// Steady shape state: L = 2 pi, theta_hat0 = 0, z(0) = 0.
inline ShapeState steady_shape(const PeriodicField& theta_tilde, cplx closure_guess = 0.0) {
  ShapeState s;
  s.theta_tilde = project_qn(theta_tilde, 1);
  s.theta_hat1 = solve_closure(s.theta_tilde, closure_guess);
  s.L = kTwoPi;
  s.V_target = compute_area(s);
  return s;
}

struct SteadyEvaluation {
  ShapeState state;
  InterfaceGeometry geometry;
  VortexSheet sheet;
  PeriodicField residual;  // the steady residual field
};

inline SteadyEvaluation evaluate_steady(const PeriodicField& theta_tilde, double u0, double beta,
                                        const PhysicalParams& params,
                                        const PeriodicField* gamma_warm = nullptr,
                                        cplx closure_guess = 0.0) {
  PhysicalParams p = params;
  p.u0 = u0;
  p.beta = beta;
  SteadyEvaluation ev;
  ev.state = steady_shape(theta_tilde, closure_guess);
  ev.geometry = build_geometry(ev.state);
  const KernelContext ctx(ev.geometry, beta);
  ev.sheet = solve_gamma(ev.geometry, ctx, p, gamma_warm);
  const int n = ev.geometry.size();
  const PeriodicField Hg = hilbert(ev.sheet.gamma);
  const PeriodicField ReG = apply_G(ctx, ev.sheet.gamma).real_part();
  std::vector<cplx> v(n);
  for (int j = 0; j < n; ++j)
    v[j] = 0.5 * Hg.value(j).real() + 0.5 * ReG.value(j).real() +
           (u0 + 1.0) * std::cos(grid_point(j, n) + ev.geometry.theta.value(j).real());
  ev.residual = project_qn(PeriodicField::from_values(std::move(v), true), 0);
  return ev;
}

inline PeriodicField steady_residual(const PeriodicField& theta_tilde, double u0, double beta,
                                     const PhysicalParams& params) {
  return evaluate_steady(theta_tilde, u0, beta, params).residual;
}

struct SteadyIterate {
  PeriodicField theta_tilde;
  double u0 = 0.0;
};

/// One application of the fixed-point map. `residual` is the steady residual
/// at (theta_tilde, u0), already evaluated by the caller.
inline SteadyIterate steady_update(const PeriodicField& theta_tilde, double u0,
                                   const PeriodicField& residual, const PhysicalParams& p) {
  const double a = p.a_mu();
  const int n = theta_tilde.size();
  const PeriodicField f = frechet_at_circle(theta_tilde, p.sigma, a) +
                          u0 * du_du0_at_circle(n, p) - residual;
  SteadyIterate out;
  out.theta_tilde = odd_part(invert_A(hilbert(project_qn(f, 1)), p.sigma, a));
  const cplx g2 = out.theta_tilde.coeff(2);
  out.u0 = (2.0 * f.coeff(1) + (4.0 / 3.0) * (1.0 + a) * kI * g2).real() / p.mu1_fraction();
  return out;
}

inline SteadyIterate steady_iterate(const PeriodicField& theta_tilde, double u0, double beta,
                                    const PhysicalParams& p) {
  return steady_update(theta_tilde, u0, steady_residual(theta_tilde, u0, beta, p), p);
}

struct SteadyOptions {
  int continuation_steps = 8;
  int max_iterations = 200;
  double tolerance = 1e-10;
  bool use_newton = false;
};

struct SteadySolution {
  PeriodicField theta_tilde;  // modes |k| >= 2
  cplx theta_hat1 = 0.0;
  PeriodicField theta_s;      // including the closure-determined k = +-1 modes
  double u0 = 0.0;
  VortexSheet gamma_s;
  double beta = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  std::vector<double> contraction_ratios;  // last continuation stage

  ShapeState shape() const {
    ShapeState s;
    s.theta_tilde = theta_tilde;
    s.theta_hat1 = theta_hat1;
    s.L = kTwoPi;
    s.V_target = compute_area(s);
    return s;
  }
};

namespace detail {

// Newton step on the unknowns (Im theta^(k), k = 2..K; u0) against the residual
// modes Re U^(k), k = 1..K, with a finite-difference Jacobian.
inline SteadyIterate newton_update(const PeriodicField& theta_tilde, double u0, double beta,
                                   const PhysicalParams& p, const PeriodicField& residual) {
  const int n = theta_tilde.size(), K = theta_tilde.max_mode();
  const int m = K;  // K - 1 shape unknowns plus u0
  auto unknowns_to_field = [&](const Eigen::VectorXd& x) {
    std::vector<cplx> c(n, 0.0);
    for (int k = 2; k <= K; ++k) {
      c[PeriodicField::index(k, n)] = cplx(0.0, x(k - 2));
      c[PeriodicField::index(-k, n)] = cplx(0.0, -x(k - 2));
    }
    return PeriodicField::from_coeffs(std::move(c), true);
  };
  auto residual_vector = [&](const PeriodicField& r) {
    Eigen::VectorXd v(m);
    for (int k = 1; k <= K; ++k) v(k - 1) = r.coeff(k).real();
    return v;
  };
  Eigen::VectorXd x(m);
  for (int k = 2; k <= K; ++k) x(k - 2) = theta_tilde.coeff(k).imag();
  x(m - 1) = u0;
  const Eigen::VectorXd r0 = residual_vector(residual);
  Eigen::MatrixXd J(m, m);
  const double h = 1e-7;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd xp = x;
    xp(j) += h;
    const PeriodicField r = steady_residual(unknowns_to_field(xp), xp(m - 1), beta, p);
    J.col(j) = (residual_vector(r) - r0) / h;
  }
  const Eigen::VectorXd dx = J.fullPivLu().solve(r0);
  const Eigen::VectorXd xn = x - dx;
  return {unknowns_to_field(xn), xn(m - 1)};
}

}  // namespace detail

/// Iterates to the given tolerance at fixed beta starting from (theta, u0).
inline SteadySolution solve_steady_at(double beta, const PhysicalParams& params,
                                      PeriodicField theta_tilde, double u0,
                                      const SteadyOptions& opt = {}) {
  SteadySolution sol;
  sol.beta = beta;
  PeriodicField gamma_warm;
  cplx closure_guess = 0.0;
  double prev_step = -1.0;
  for (int it = 0; it <= opt.max_iterations; ++it) {
    SteadyEvaluation ev = evaluate_steady(theta_tilde, u0, beta, params,
                                          gamma_warm.empty() ? nullptr : &gamma_warm, closure_guess);
    const double rn = sobolev_norm(ev.residual, 0.0);
    gamma_warm = ev.sheet.gamma;
    closure_guess = ev.state.theta_hat1;
    if (rn <= opt.tolerance) {
      sol.theta_tilde = ev.state.theta_tilde;
      sol.theta_hat1 = ev.state.theta_hat1;
      sol.theta_s = shape_angle(sol.theta_tilde, sol.theta_hat1);
      sol.u0 = u0;
      sol.gamma_s = ev.sheet;
      sol.residual_norm = rn;
      sol.iterations = it;
      return sol;
    }
    if (it == opt.max_iterations || !std::isfinite(rn)) {
      throw SolverFailure("steady iteration did not converge at beta = " + std::to_string(beta) +
                          " (residual " + std::to_string(rn) + ")");
    }
    SteadyIterate next = opt.use_newton
                             ? detail::newton_update(theta_tilde, u0, beta, params, ev.residual)
                             : steady_update(theta_tilde, u0, ev.residual, params);
    next.theta_tilde = odd_part(project_qn(next.theta_tilde, 1));
    const double step_size =
        sobolev_norm(next.theta_tilde - theta_tilde, 0.0) + std::abs(next.u0 - u0);
    if (prev_step > 0.0) sol.contraction_ratios.push_back(step_size / prev_step);
    prev_step = step_size;
    theta_tilde = next.theta_tilde;
    u0 = next.u0;
  }
  throw SolverFailure("steady iteration did not converge");
}

/// beta-continuation from the circle in equal steps.
inline SteadySolution solve_steady(double beta, const PhysicalParams& params, int n,
                                   const SteadyOptions& opt = {}) {
  params.validate();
  if (!(beta >= 0.0)) throw ConfigError("beta must be nonnegative");
  if (params.mu1 <= 0.0) throw ConfigError("steady solve requires mu1 > 0");
  // the wall guard at the target beta, checked on the circle before continuing
  (void)KernelContext(build_geometry(ShapeState::circle(n)), beta);
  PeriodicField theta = PeriodicField::zeros(n);
  double u0 = 0.0;
  const int steps = beta == 0.0 ? 1 : std::max(1, opt.continuation_steps);
  SteadySolution sol;
  int total = 0;
  for (int j = 1; j <= steps; ++j) {
    const double bj = beta * j / steps;
    sol = solve_steady_at(bj, params, theta, u0, opt);
    total += sol.iterations;
    theta = sol.theta_tilde;
    u0 = sol.u0;
  }
  sol.iterations = total;
  return sol;
}

/// Small-beta series for mu2 = 0.
struct AsymptoticSteady {
  PeriodicField theta_s;
  double u0 = 0.0;
  PeriodicField gamma_s;
};

inline AsymptoticSteady asymptotic_reference(double beta, double sigma, int n) {
  const double b2 = beta * beta, b4 = b2 * b2, s2 = sigma * sigma;
  AsymptoticSteady a;
  a.theta_s = PeriodicField::sample(
      n, [&](double x) { return b4 * (std::sin(3 * x) / (54 * sigma) + std::sin(2 * x) / (72 * s2)); },
      true);
  a.u0 = -b2 / 6 + b4 * (7.0 / 180 + 1.0 / (216 * s2));
  a.gamma_s = PeriodicField::sample(
      n,
      [&](double x) {
        return 2 * std::sin(x) - b2 / 6 * std::sin(x) +
               b4 * ((-19.0 / 120 + 1.0 / (72 * s2)) * std::sin(3 * x) +
                     (1.0 / 72 + 7.0 / (216 * s2)) * std::sin(x) + std::sin(4 * x) / (54 * sigma) -
                     std::sin(2 * x) / (54 * sigma));
      },
      true);
  return a;
}

}  // namespace hele_shaw
