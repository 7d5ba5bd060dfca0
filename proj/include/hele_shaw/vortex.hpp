#pragma once

// Vortex-sheet strength from the second-kind equation (I + a_mu F[z]) gamma = rhs.

#include <cmath>
#include <string>
#include <vector>

#include "hele_shaw/errors.hpp"
#include "hele_shaw/geometry.hpp"
#include "hele_shaw/krylov.hpp"
#include "hele_shaw/operators.hpp"
#include "hele_shaw/spectral.hpp"

namespace hele_shaw {

struct PhysicalParams {
  double sigma = 1.0;
  double beta = 0.0;
  double mu1 = 1.0;
  double mu2 = 0.0;
  double u0 = 0.0;

  double a_mu() const { return (mu1 - mu2) / (mu1 + mu2); }
  double mu2_fraction() const { return mu2 / (mu1 + mu2); }
  double mu1_fraction() const { return mu1 / (mu1 + mu2); }

  void validate() const {
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (!(beta >= 0.0)) throw ConfigError("beta must be nonnegative");
    if (!(mu1 >= 0.0) || !(mu2 >= 0.0) || !(mu1 + mu2 > 0.0))
      throw ConfigError("viscosities must be nonnegative with a positive sum");
  }
};

struct VortexSheet {
  PeriodicField gamma;
  double residual = 0.0;
  int iterations = 0;
};

struct GammaOptions {
  KrylovOptions krylov{};
  double damping = 0.5;
};

/// (2 pi / L) sigma theta_aa + (L / pi)(1 + mu2 u0 / (mu1 + mu2)) sin(alpha + theta).
inline PeriodicField gamma_rhs(const InterfaceGeometry& g, const PhysicalParams& p) {
  const int n = g.size();
  const PeriodicField theta_aa = derivative(g.theta, 2);
  const double amp = g.L / kPi * (1.0 + p.mu2_fraction() * p.u0);
  std::vector<cplx> v(n);
  for (int j = 0; j < n; ++j)
    v[j] = kTwoPi / g.L * p.sigma * theta_aa.value(j).real() +
           amp * std::sin(grid_point(j, n) + g.theta.value(j).real());
  return PeriodicField::from_values(std::move(v), true);
}

/// gamma + a_mu F[z] gamma.
inline PeriodicField apply_sheet_operator(const KernelContext& ctx, double a_mu,
                                          const PeriodicField& gamma) {
  if (a_mu == 0.0) return gamma;
  return gamma + a_mu * apply_F(ctx, gamma);
}

inline double relative_residual(const KernelContext& ctx, double a_mu, const PeriodicField& gamma,
                                const PeriodicField& rhs) {
  const double rn = grid_l2_norm(rhs);
  const double e = grid_l2_norm(apply_sheet_operator(ctx, a_mu, gamma) - rhs);
  return rn == 0.0 ? e : e / rn;
}

inline VortexSheet solve_gamma_rhs(const KernelContext& ctx, double a_mu, const PeriodicField& rhs,
                                   const PeriodicField* warm_start = nullptr,
                                   const GammaOptions& opt = {}) {
  VortexSheet out;
  if (a_mu == 0.0) {
    out.gamma = rhs;
    out.iterations = 1;
    return out;
  }
  auto apply = [&](const std::vector<double>& x) {
    auto y = apply_sheet_operator(ctx, a_mu, PeriodicField::from_real_values(x));
    return y.real_values();
  };
  std::vector<double> x0;
  if (warm_start != nullptr && warm_start->size() == rhs.size()) x0 = warm_start->real_values();
  KrylovResult kr = gmres(apply, rhs.real_values(), x0, opt.krylov);
  out.gamma = PeriodicField::from_real_values(kr.x);
  out.iterations = kr.iterations;
  out.residual = relative_residual(ctx, a_mu, out.gamma, rhs);
  if (kr.converged && out.residual <= 10.0 * opt.krylov.tolerance) return out;

  // damped fixed point gamma <- (1 - w) gamma + w (rhs - a_mu F gamma)
  PeriodicField gamma = warm_start != nullptr ? *warm_start : rhs;
  for (int it = 0; it < opt.krylov.max_iterations; ++it) {
    const PeriodicField update = rhs - a_mu * apply_F(ctx, gamma);
    gamma = (1.0 - opt.damping) * gamma + opt.damping * update;
    const double res = relative_residual(ctx, a_mu, gamma, rhs);
    if (res <= opt.krylov.tolerance) {
      out.gamma = gamma;
      out.residual = res;
      out.iterations += it + 1;
      return out;
    }
  }
  throw SolverFailure("vortex sheet solve did not converge (residual " +
                      std::to_string(out.residual) + ")");
}

inline VortexSheet solve_gamma(const InterfaceGeometry& g, const KernelContext& ctx,
                               const PhysicalParams& p, const PeriodicField* warm_start = nullptr,
                               const GammaOptions& opt = {}) {
  return solve_gamma_rhs(ctx, p.a_mu(), gamma_rhs(g, p), warm_start, opt);
}

}  // namespace hele_shaw
