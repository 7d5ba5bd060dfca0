#pragma once

// Interface velocities, the nonlinear right-hand side, integrating-factor time
// stepping, and the exact linear propagator about the circle.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "hele_shaw/errors.hpp"
#include "hele_shaw/geometry.hpp"
#include "hele_shaw/operators.hpp"
#include "hele_shaw/spectral.hpp"
#include "hele_shaw/vortex.hpp"

namespace hele_shaw {

// ---------------------------------------------------------------------------
// Linear theory

/// Mode symbols of the linearised operator. The two scale factors exist so a
/// deliberately wrong symbol can be injected into the check suite.
struct LinearSymbol {
  double a_mu = 1.0;
  double d_scale = 1.0;
  double m_scale = 1.0;

  double d(int k) const {
    const double kk = std::abs(k);
    return d_scale * 0.5 * kk * (kk * kk - 1.0);
  }
  double m(int k) const {
    const double kk = std::abs(k);
    return m_scale * (1.0 + a_mu) * (kk * kk - 1.0) * (kk + 1.0) / (kk * (kk + 2.0));
  }
};

/// (A theta)^(k) = -sigma d(k) theta^(k) + m(k) theta^(k+1) for k >= 2, and the
/// mirrored coupling to k - 1 for k <= -2.
inline PeriodicField apply_linear_operator(const PeriodicField& theta, double sigma,
                                           const LinearSymbol& sym) {
  const int n = theta.size(), kmax = theta.max_mode();
  std::vector<cplx> c(n, 0.0);
  for (int k = 2; k <= kmax; ++k) {
    c[PeriodicField::index(k, n)] = -sigma * sym.d(k) * theta.coeff(k) + sym.m(k) * theta.coeff(k + 1);
    c[PeriodicField::index(-k, n)] = -sigma * sym.d(k) * theta.coeff(-k) + sym.m(k) * theta.coeff(-k - 1);
  }
  return PeriodicField::from_coeffs(std::move(c), theta.is_real());
}

/// exp(tM) for the upper-bidiagonal M with diagonal lambda and superdiagonal
/// mu (M(i, i+1) = mu[i]), by the Parlett recurrence.
inline std::vector<std::vector<double>> bidiagonal_exponential(const std::vector<double>& lambda,
                                                               const std::vector<double>& mu,
                                                               double t) {
  const size_t n = lambda.size();
  std::vector<std::vector<double>> F(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) F[i][i] = std::exp(t * lambda[i]);
  for (size_t p = 1; p < n; ++p)
    for (size_t i = 0; i + p < n; ++i) {
      const size_t j = i + p;
      const double num = t * (mu[i] * F[i + 1][j] - F[i][j - 1] * mu[j - 1]);
      F[i][j] = num / (t * (lambda[j] - lambda[i]));
    }
  return F;
}

/// e^{tA} theta0 on modes 2 <= |k| <= N/2 - 1 (the truncation drops coupling
/// beyond the top resolved mode).
inline PeriodicField linear_propagator(const PeriodicField& theta0, double t, double sigma,
                                       const LinearSymbol& sym) {
  const int n = theta0.size(), kmax = theta0.max_mode();
  if (kmax < 2) return PeriodicField::zeros(n, theta0.is_real());
  const int m = kmax - 1;  // modes 2..kmax
  std::vector<double> lambda(m), mu(m, 0.0);
  for (int i = 0; i < m; ++i) {
    lambda[i] = -sigma * sym.d(i + 2);
    if (i + 1 < m) mu[i] = sym.m(i + 2);
  }
  if (t == 0.0) return project_qn(theta0, 1);
  const auto F = bidiagonal_exponential(lambda, mu, t);
  std::vector<cplx> c(n, 0.0);
  for (int i = 0; i < m; ++i) {
    cplx sp = 0.0, sn = 0.0;
    for (int j = i; j < m; ++j) {
      sp += F[i][j] * theta0.coeff(j + 2);
      sn += F[i][j] * theta0.coeff(-(j + 2));
    }
    c[PeriodicField::index(i + 2, n)] = sp;
    c[PeriodicField::index(-(i + 2), n)] = sn;
  }
  return PeriodicField::from_coeffs(std::move(c), theta0.is_real());
}

// ---------------------------------------------------------------------------
// Nonlinear right-hand side

struct VelocityFields {
  PeriodicField U;
  PeriodicField T;
  double U_mean = 0.0;
  double U_integral = 0.0;
};

inline VelocityFields velocities(const InterfaceGeometry& g, const PeriodicField& gamma,
                                 const KernelContext& ctx, const PhysicalParams& p) {
  const int n = g.size();
  const PeriodicField Hg = hilbert(gamma);
  const PeriodicField ReG = apply_G(ctx, gamma).real_part();
  std::vector<cplx> u(n);
  for (int j = 0; j < n; ++j)
    u[j] = kPi / g.L * (Hg.value(j).real() + ReG.value(j).real()) +
           (p.u0 + 1.0) * std::cos(grid_point(j, n) + g.theta.value(j).real());
  VelocityFields v;
  v.U = PeriodicField::from_values(std::move(u), true);
  v.U_mean = v.U.coeff(0).real();
  v.U_integral = kTwoPi * v.U_mean;
  // T = int_0^a (1 + theta_a) U - (a / 2 pi) int_0^{2 pi} (1 + theta_a) U
  const PeriodicField P = product(g.theta_alpha.plus_constant(1.0), v.U);
  v.T = cumulative_integral(P).periodic;
  return v;
}

/// Everything computed from one shape state on the way to its time derivative.
struct Evaluation {
  InterfaceGeometry geometry;
  VortexSheet sheet;
  VelocityFields vel;
  PeriodicField theta_tilde_t;
  double theta_hat0_t = 0.0;
  double y0_t = 0.0;
  double x0_t = 0.0;
};

inline Evaluation evaluate(const ShapeState& s, const PhysicalParams& p,
                           const PeriodicField* gamma_warm = nullptr) {
  Evaluation e;
  e.geometry = build_geometry(s);
  const KernelContext ctx(e.geometry, p.beta);
  e.sheet = solve_gamma(e.geometry, ctx, p, gamma_warm);
  e.vel = velocities(e.geometry, e.sheet.gamma, ctx, p);
  const double scale = kTwoPi / s.L;
  const PeriodicField adv = product(e.vel.T, e.geometry.theta_alpha.plus_constant(1.0));
  e.theta_tilde_t = scale * project_qn(derivative(e.vel.U) + adv, 1);
  e.theta_hat0_t = scale * adv.coeff(0).real();
  const double U0 = e.vel.U.value(0).real();
  const double th0 = e.geometry.theta.value(0).real();
  e.y0_t = -U0 * std::sin(th0);
  e.x0_t = -U0 * std::cos(th0);
  return e;
}

struct RhsResult {
  PeriodicField theta_tilde_t;
  double theta_hat0_t = 0.0;
  double y0_t = 0.0;
};

inline RhsResult rhs(const ShapeState& s, const PhysicalParams& p) {
  Evaluation e = evaluate(s, p);
  return {e.theta_tilde_t, e.theta_hat0_t, e.y0_t};
}

/// Re-imposes closure and the area constraint after theta_tilde changed.
inline void enforce_constraints(ShapeState& s, cplx closure_guess) {
  s.theta_tilde = project_qn(s.theta_tilde, 1);
  s.theta_hat1 = solve_closure(s.theta_tilde, closure_guess);
  s.L = length_from_area(s.theta_tilde, s.theta_hat1, s.V_target);
}

// ---------------------------------------------------------------------------
// Time stepping

/// Integrating-factor Heun scheme: the Fourier-diagonal part
/// -sigma (2 pi / L)^3 d(|k|) is integrated exactly with L frozen over the
/// step, the rest explicitly.
class Integrator {
 public:
  Integrator(PhysicalParams p, double dt) : p_(p), dt_(dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  }

  double dt() const { return dt_; }
  const PhysicalParams& params() const { return p_; }

  /// Evaluation at the start of the most recent step.
  const std::optional<Evaluation>& last_start() const { return start_; }
  double max_abs_U_integral() const { return max_U_integral_; }

  ShapeState step(const ShapeState& s) {
    const int n = s.size();
    Evaluation e0 = evaluate(s, p_, warm());
    note(e0);
    const std::vector<double> lam = stiff_symbol(n, s.L);
    std::vector<double> E(n);
    for (int i = 0; i < n; ++i) E[i] = std::exp(lam[i] * dt_);

    const PeriodicField N0 = remainder(e0.theta_tilde_t, s.theta_tilde, lam);
    ShapeState s1 = s;
    s1.theta_tilde = scale_modes(s.theta_tilde + dt_ * N0, E);
    s1.theta_hat0 = s.theta_hat0 + dt_ * e0.theta_hat0_t;
    s1.y0 = s.y0 + dt_ * e0.y0_t;
    s1.x0 = s.x0 + dt_ * e0.x0_t;
    enforce_constraints(s1, s.theta_hat1);

    gamma_warm_ = e0.sheet.gamma;
    Evaluation e1 = evaluate(s1, p_, warm());
    note(e1);
    const PeriodicField N1 = remainder(e1.theta_tilde_t, s1.theta_tilde, lam);

    ShapeState out = s;
    out.theta_tilde = scale_modes(s.theta_tilde, E) +
                      (0.5 * dt_) * (scale_modes(N0, E) + N1);
    out.theta_hat0 = s.theta_hat0 + 0.5 * dt_ * (e0.theta_hat0_t + e1.theta_hat0_t);
    out.y0 = s.y0 + 0.5 * dt_ * (e0.y0_t + e1.y0_t);
    out.x0 = s.x0 + 0.5 * dt_ * (e0.x0_t + e1.x0_t);
    enforce_constraints(out, s1.theta_hat1);
    gamma_warm_ = e1.sheet.gamma;
    start_ = std::move(e0);
    return out;
  }

  /// lambda_k = -sigma (2 pi / L)^3 d(|k|) for |k| >= 2, zero otherwise.
  std::vector<double> stiff_symbol(int n, double L) const {
    const LinearSymbol sym{p_.a_mu()};
    const double c = std::pow(kTwoPi / L, 3);
    std::vector<double> lam(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const int k = std::abs(PeriodicField::wavenumber(i, n));
      if (k >= 2) lam[i] = -p_.sigma * c * sym.d(k);
    }
    return lam;
  }

 private:
  const PeriodicField* warm() const { return gamma_warm_.empty() ? nullptr : &gamma_warm_; }

  void note(const Evaluation& e) {
    max_U_integral_ = std::max(max_U_integral_, std::abs(e.vel.U_integral));
  }

  static PeriodicField scale_modes(const PeriodicField& f, const std::vector<double>& E) {
    std::vector<cplx> c = f.coeffs();
    for (size_t i = 0; i < c.size(); ++i) c[i] *= E[i];
    return PeriodicField::from_coeffs(std::move(c), f.is_real());
  }

  static PeriodicField remainder(const PeriodicField& rate, const PeriodicField& theta,
                                 const std::vector<double>& lam) {
    std::vector<cplx> c = rate.coeffs();
    for (size_t i = 0; i < c.size(); ++i) c[i] -= lam[i] * theta.coeffs()[i];
    return PeriodicField::from_coeffs(std::move(c), true);
  }

  PhysicalParams p_;
  double dt_;
  PeriodicField gamma_warm_;
  std::optional<Evaluation> start_;
  double max_U_integral_ = 0.0;
};

inline ShapeState step(const ShapeState& s, double dt, const PhysicalParams& p) {
  Integrator integ(p, dt);
  return integ.step(s);
}

// ---------------------------------------------------------------------------
// Trajectories

struct DiagnosticsRecord {
  int step = 0;
  double t = 0.0;
  double L = 0.0;
  double V = 0.0;
  double norm_r = 0.0;
  double weighted_norm = 0.0;
  double closure_res = 0.0;
  double q1_min = 0.0;
  double U_mean = 0.0;
  double theta_hat0 = 0.0;
  double y0 = 0.0;
  double gamma_res = 0.0;
};

struct EvolveConfig {
  PhysicalParams params;
  double dt = 1e-3;
  double t_end = 1.0;
  int record_interval = 10;
  int snapshot_interval = 0;  // 0 disables snapshots
  double norm_r = 2.0;
  /// Called after every accepted step with the step index, time, new state
  /// and the evaluation taken at the start of that step.
  std::function<void(int, double, const ShapeState&, const Evaluation&)> on_step;
  /// Called with each snapshot evaluation.
  std::function<void(int, double, const ShapeState&, const Evaluation&)> on_snapshot;
};

struct Trajectory {
  std::vector<DiagnosticsRecord> records;
  ShapeState final_state;
  double max_abs_U_integral = 0.0;
  int steps = 0;
};

inline DiagnosticsRecord make_record(int step, double t, const ShapeState& s, const Evaluation& e,
                                     const PhysicalParams& p, double norm_r) {
  DiagnosticsRecord r;
  r.step = step;
  r.t = t;
  r.L = s.L;
  r.V = compute_area(s);
  r.norm_r = sobolev_norm(s.theta_tilde, norm_r);
  r.weighted_norm = weighted_norm(s.theta_tilde, WeightProfile(p.sigma), norm_r);
  r.closure_res = std::abs(e.geometry.closure_residual);
  r.q1_min = e.geometry.q1_min;
  r.U_mean = e.vel.U_mean;
  r.theta_hat0 = s.theta_hat0;
  r.y0 = s.y0;
  r.gamma_res = e.sheet.residual;
  return r;
}

/// Steps from t = 0 to t_end. Failures are rethrown with the step index.
inline Trajectory evolve(const ShapeState& initial, const EvolveConfig& cfg) {
  cfg.params.validate();
  if (!(cfg.t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  const int record_interval = std::max(1, cfg.record_interval);
  const int nsteps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  Integrator integ(cfg.params, cfg.dt);
  Trajectory traj;
  ShapeState s = initial;
  int k = 0;
  auto wrap = [&](const Error& err) -> std::string {
    return "step " + std::to_string(k) + ": " + err.what();
  };
  try {
    for (k = 0; k < nsteps; ++k) {
      const double t = k * cfg.dt;
      ShapeState next = integ.step(s);
      const Evaluation& e = *integ.last_start();
      if (k % record_interval == 0) traj.records.push_back(make_record(k, t, s, e, cfg.params, cfg.norm_r));
      if (cfg.snapshot_interval > 0 && k % cfg.snapshot_interval == 0 && cfg.on_snapshot)
        cfg.on_snapshot(k, t, s, e);
      if (cfg.on_step) cfg.on_step(k + 1, (k + 1) * cfg.dt, next, e);
      s = std::move(next);
    }
    const Evaluation e = evaluate(s, cfg.params);
    traj.max_abs_U_integral = std::max(integ.max_abs_U_integral(), std::abs(e.vel.U_integral));
    traj.records.push_back(make_record(nsteps, nsteps * cfg.dt, s, e, cfg.params, cfg.norm_r));
    if (cfg.snapshot_interval > 0 && cfg.on_snapshot) cfg.on_snapshot(nsteps, nsteps * cfg.dt, s, e);
  } catch (const ClosureFailure& err) {
    throw ClosureFailure(wrap(err));
  } catch (const GeometryFailure& err) {
    throw GeometryFailure(wrap(err));
  } catch (const SolverFailure& err) {
    throw SolverFailure(wrap(err));
  }
  traj.final_state = s;
  traj.steps = nsteps;
  return traj;
}

/// max |f(a) + f(-a)| on the grid.
inline double oddness_defect(const PeriodicField& f) {
  const int n = f.size();
  double m = 0.0;
  for (int j = 0; j < n; ++j) m = std::max(m, std::abs(f.value(j) + f.value((n - j) % n)));
  return m;
}

}  // namespace hele_shaw
