#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <cstdio>
#include <random>

#include "hele_shaw/operators.hpp"

using namespace hele_shaw;

namespace {

double max_diff(const PeriodicField& a, const PeriodicField& b) {
  double m = 0.0;
  for (int j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a.value(j) - b.value(j)));
  return m;
}

PeriodicField real_sample(int n, const std::function<double(double)>& f) {
  return PeriodicField::sample(n, f, true);
}

InterfaceGeometry ellipse_like(int n, double eps) {
  ShapeState s;
  s.theta_tilde = real_sample(n, [eps](double a) { return eps * std::cos(2 * a); });
  s.theta_hat1 = solve_closure(s.theta_tilde);
  s.L = length_from_area(s.theta_tilde, s.theta_hat1, kPi);
  return build_geometry(s);
}

// Unit circle omega_0 = -i(e^{ia} - 1), as a curve in the kernel sense.
KernelContext omega0_context(int n, double beta, cplx factor = 1.0) {
  auto z = PeriodicField::sample(n, [&](double a) { return factor * -kI * (std::exp(kI * a) - 1.0); }, false);
  return KernelContext(z, derivative(z), derivative(z, 2), beta);
}

// Direct regularised K1 quadrature on an M = 10 N point grid built from the
// spectral interpolants of z and f.
std::vector<cplx> oversampled_k1(const InterfaceGeometry& g, const std::function<double(double)>& f, int factor) {
  const int n = g.size(), m = factor * n;
  std::vector<cplx> z(m), za(m), zaa(m), fv(m);
  for (int j = 0; j < m; ++j) {
    const double a = kTwoPi * j / m;
    z[j] = g.z.evaluate(a);
    za[j] = g.z_alpha.evaluate(a);
    zaa[j] = g.z_alphalpha.evaluate(a);
    fv[j] = f(a);
  }
  std::vector<cplx> out(n);
  for (int i = 0; i < n; ++i) {
    const int ii = i * factor;
    cplx s = 0.0;
    for (int j = 0; j < m; ++j) {
      cplx k;
      if (j == ii) {
        k = -zaa[ii] / (2.0 * za[ii] * za[ii]);
      } else {
        const double d = kTwoPi * (ii - j) / m;
        k = 1.0 / (z[ii] - z[j]) - 1.0 / std::tan(0.5 * d) / (2.0 * za[j]);
      }
      s += k * fv[j];
    }
    out[i] = s * (kTwoPi / m) / (2.0 * kPi * kI);
  }
  return out;
}

}  // namespace

TEST(RegularParts, SeriesMatchesClosedForm) {
  for (double r : {0.1, 0.3, 0.49}) {
    for (double ph : {0.0, 0.7, 1.9}) {
      const cplx w = std::polar(r, ph);
      const cplx d1 = 1.0 / std::tanh(w) - 1.0 / w;
      const cplx d2 = 1.0 / std::tan(w) - 1.0 / w;
      EXPECT_LE(std::abs(l1(w) - d1), 1e-14);
      EXPECT_LE(std::abs(l2(w) - d2), 1e-14);
    }
  }
  EXPECT_EQ(l1(0.0), cplx(0.0));
  EXPECT_NEAR(l1(1e-3).real(), 1e-3 / 3 - 1e-9 / 45, 1e-17);
  EXPECT_NEAR(l2(1e-3).real(), -1e-3 / 3 - 1e-9 / 45, 1e-17);
  const cplx near_lo = std::polar(0.4999999, 0.3), near_hi = std::polar(0.5000001, 0.3);
  EXPECT_LE(std::abs(l1(near_lo) - l1(near_hi)), 1e-6);
}

TEST(Commutator, Examples) {
  const int n = 64;
  auto e1 = PeriodicField::mode(n, 1, 1.0), em1 = PeriodicField::mode(n, -1, 1.0);
  EXPECT_LE(commutator_h(e1, e1).max_abs(), 1e-14);
  auto c = commutator_h(e1, em1);
  for (int j = 0; j < n; ++j) EXPECT_LE(std::abs(c.value(j) + kI), 1e-14);
  auto psi = PeriodicField::sample(n, [](double) { return 2.5; }, true);
  auto f = real_sample(n, [](double a) { return std::cos(3 * a) + std::sin(a); });
  EXPECT_LE(commutator_h(psi, f).max_abs(), 1e-14);
}

TEST(Commutator, ModeByModeIdentity) {
  const int n = 64;
  for (int m = -8; m <= 8; ++m)
    for (int k = -8; k <= 8; ++k) {
      auto c = commutator_h(PeriodicField::mode(n, m, 1.0), PeriodicField::mode(n, k, 1.0));
      const cplx amp = -kI * static_cast<double>(sgn(m + k)) + kI * static_cast<double>(sgn(k));
      auto expect = PeriodicField::mode(n, m + k, amp);
      EXPECT_LE(max_diff(c, expect), 1e-13) << m << " " << k;
    }
}

TEST(Kernel, CircleG1IsMeanTimesI) {
  const int n = 64;
  auto ctx = omega0_context(n, 0.0);
  std::mt19937 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<cplx> c(n, 0.0);
    for (int k = 0; k <= 10; ++k) {
      const cplx a = k == 0 ? cplx(g(rng)) : cplx(g(rng), g(rng)) / (1.0 + k * k);
      c[PeriodicField::index(k, n)] = a;
      if (k > 0) c[PeriodicField::index(-k, n)] = std::conj(a);
    }
    auto f = PeriodicField::from_coeffs(c, true);
    auto G1 = apply_G1(ctx, f);
    for (int j = 0; j < n; ++j) EXPECT_LE(std::abs(G1.value(j) - kI * f.coeff(0)), 1e-12);
  }
  auto e1 = PeriodicField::mode(n, 1, 1.0);
  EXPECT_LE(apply_G1(ctx, e1).max_abs(), 1e-12);
  auto gamma = real_sample(n, [](double a) { return 2 * std::sin(a); });
  EXPECT_LE(apply_F(ctx, gamma).max_abs(), 1e-12);
  auto cst = real_sample(n, [](double) { return 0.7; });
  auto Gc = apply_G(ctx, cst);
  for (int j = 0; j < n; ++j) EXPECT_LE(std::abs(Gc.value(j) - kI * 0.7), 1e-12);
}

TEST(Kernel, DiagonalLimit) {
  const int n = 64;
  auto g = ellipse_like(n, 0.05);
  KernelContext ctx(g, 0.0);
  for (int i : {0, 11, 30}) {
    const double a = grid_point(i, n);
    // z(a) - z(a - d) summed mode by mode to avoid cancellation at small d
    auto dz = [&](double d) {
      cplx s = 0.0;
      for (int k = -n / 2 + 1; k < n / 2; ++k)
        s += g.z.coeff(k) * std::exp(kI * (k * (a - 0.5 * d))) * (2.0 * kI * std::sin(0.5 * k * d));
      return s;
    };
    auto integrand = [&](double d) {
      return 1.0 / dz(d) - 1.0 / std::tan(0.5 * d) / (2.0 * g.z_alpha.evaluate(a - d));
    };
    const cplx f1 = integrand(1e-2), f2 = integrand(1e-3), f3 = integrand(1e-4);
    const cplx r1 = (10.0 * f2 - f1) / 9.0, r2 = (10.0 * f3 - f2) / 9.0;
    const cplx lim = (100.0 * r2 - r1) / 99.0;
    EXPECT_LE(std::abs(lim - ctx.k1_integrand(i, i)), 1e-8);
  }
}

TEST(Kernel, MatchesOversampledQuadrature) {
  const int n = 64;
  auto g = ellipse_like(n, 0.05);
  KernelContext ctx(g, 0.0);
  auto f = [](double a) { return std::cos(3 * a); };
  auto K = apply_K(ctx, real_sample(n, f));
  auto ref = oversampled_k1(g, f, 10);
  double err = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    err = std::max(err, std::abs(K.value(i) - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  EXPECT_LE(err / scale, 1e-8);
}

TEST(Kernel, SpectralConvergenceInN) {
  auto shape = [](double a) { return 0.1 * std::cos(2 * a) + 0.05 * std::sin(3 * a); };
  auto make = [&](int n) {
    ShapeState s;
    s.theta_tilde = project_qn(real_sample(n, shape), 1);
    s.theta_hat1 = solve_closure(s.theta_tilde);
    s.L = kTwoPi;
    return build_geometry(s);
  };
  auto f = [](double a) { return std::exp(std::cos(a)); };
  const auto g_ref = make(256);
  const auto K_ref = apply_K(KernelContext(g_ref, 0.0), real_sample(256, f));
  auto err_at = [&](int n) {
    auto g = make(n);
    auto K = apply_K(KernelContext(g, 0.0), real_sample(n, f));
    double e = 0.0;
    for (int i = 0; i < n; ++i) e = std::max(e, std::abs(K.value(i) - K_ref.value(i * (256 / n))));
    return e;
  };
  const double e16 = err_at(16), e32 = err_at(32), e64 = err_at(64);
  std::printf("K convergence: %.3e %.3e %.3e\n", e16, e32, e64);
  EXPECT_LE(e32, 1e-4 * e16);
  EXPECT_LE(e64, std::max(1e-4 * e32, 1e-13));
}

TEST(Kernel, GIsLinear) {
  const int n = 64;
  auto g = ellipse_like(n, 0.05);
  KernelContext ctx(g, 0.15);
  auto g1 = real_sample(n, [](double a) { return std::sin(a) + 0.2 * std::cos(4 * a); });
  auto g2 = real_sample(n, [](double a) { return std::cos(2 * a) - 0.5; });
  auto lhs = apply_G(ctx, 1.7 * g1 + (-0.3) * g2);
  auto rhs = 1.7 * apply_G(ctx, g1) + (-0.3) * apply_G(ctx, g2);
  EXPECT_LE(max_diff(lhs, rhs), 1e-12);
}

TEST(Kernel, G2ScalesLikeBetaSquared) {
  const int n = 64;
  auto gamma = real_sample(n, [](double a) { return 2 * std::sin(a); });
  std::vector<double> ratio;
  for (double beta : {0.1, 0.05, 0.025}) {
    auto ctx = omega0_context(n, beta, kI);
    ratio.push_back(grid_l2_norm(apply_G2(ctx, gamma)) / (beta * beta));
  }
  EXPECT_LT(std::abs(ratio[1] - ratio[2]), std::abs(ratio[0] - ratio[1]));
  EXPECT_NEAR(ratio[2] / ratio[1], 1.0, 1e-2);
}

TEST(Kernel, G2CurvatureIdentity) {
  const int n = 64;
  const double beta = 0.05;
  auto ctx = omega0_context(n, beta, kI);
  auto gamma = real_sample(n, [](double a) { return 2 * std::sin(a); });
  auto G2 = apply_G2(ctx, gamma);
  double err = 0.0;
  for (int j = 0; j < n; ++j)
    err = std::max(err, std::abs(2.0 / (beta * beta) * G2.value(j) -
                                 std::exp(kI * grid_point(j, n)) / 3.0));
  EXPECT_LE(err, 1e-3);
}

TEST(Kernel, BetaGuard) {
  auto g = build_geometry(ShapeState::circle(32));
  EXPECT_THROW(KernelContext(g, 2.0), GeometryFailure);
  EXPECT_NO_THROW(KernelContext(g, 0.5));
}

TEST(Kernel, RowwiseAboveTableLimit) {
  const int n = 1024;
  ShapeState s = ShapeState::circle(n);
  auto g = build_geometry(s, {false});
  KernelContext big(g, 0.1);
  auto f = real_sample(n, [](double a) { return std::cos(3 * a); });
  auto K = apply_K(big, f);
  const int m = 64;
  auto gs = build_geometry(ShapeState::circle(m));
  auto Ks = apply_K(KernelContext(gs, 0.1), real_sample(m, [](double a) { return std::cos(3 * a); }));
  for (int i = 0; i < m; ++i) EXPECT_LE(std::abs(K.value(i * (n / m)) - Ks.value(i)), 1e-12);
}
