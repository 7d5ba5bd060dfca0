#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "hele_shaw/vortex.hpp"

using namespace hele_shaw;

namespace {

PeriodicField real_sample(int n, const std::function<double(double)>& f) {
  return PeriodicField::sample(n, f, true);
}

InterfaceGeometry shape(int n, const std::function<double(double)>& tt) {
  ShapeState s;
  s.theta_tilde = project_qn(real_sample(n, tt), 1);
  s.theta_hat1 = solve_closure(s.theta_tilde);
  s.L = length_from_area(s.theta_tilde, s.theta_hat1, kPi);
  return build_geometry(s);
}

Eigen::VectorXd dense_solve(const KernelContext& ctx, double a_mu, const PeriodicField& rhs) {
  const int n = rhs.size();
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    auto col = apply_sheet_operator(ctx, a_mu, PeriodicField::from_real_values(e)).real_values();
    for (int i = 0; i < n; ++i) M(i, j) = col[i];
  }
  // fields carry no Nyquist mode; restore full rank on that direction
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) += ((i + j) % 2 == 0 ? 1.0 : -1.0) / n;
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = rhs.value(i).real();
  return M.partialPivLu().solve(b);
}

}  // namespace

TEST(Vortex, CircleSheet) {
  const int n = 64;
  auto g = build_geometry(ShapeState::circle(n));
  KernelContext ctx(g, 0.0);
  for (double sigma : {0.5, 1.0, 3.0})
    for (double mu2 : {0.0, 0.4}) {
      PhysicalParams p;
      p.sigma = sigma;
      p.mu2 = mu2;
      auto vs = solve_gamma(g, ctx, p);
      for (int j = 0; j < n; ++j)
        EXPECT_NEAR(vs.gamma.value(j).real(), 2 * std::sin(grid_point(j, n)), 1e-10);
      EXPECT_LE(vs.residual, 1e-12);
    }
}

TEST(Vortex, EqualViscositiesIsIdentity) {
  const int n = 64;
  auto g = shape(n, [](double a) { return 0.05 * std::cos(2 * a); });
  KernelContext ctx(g, 0.0);
  PhysicalParams p;
  p.mu1 = p.mu2 = 1.0;
  auto vs = solve_gamma(g, ctx, p);
  EXPECT_EQ(vs.iterations, 1);
  auto rhs = gamma_rhs(g, p);
  for (int j = 0; j < n; ++j) EXPECT_EQ(vs.gamma.value(j), rhs.value(j));
}

TEST(Vortex, MatchesDenseDirectSolve) {
  const int n = 64;
  auto g = shape(n, [](double a) { return 0.05 * std::cos(2 * a); });
  KernelContext ctx(g, 0.0);
  PhysicalParams p;  // a_mu = 1, sigma = 1
  auto vs = solve_gamma(g, ctx, p);
  auto ref = dense_solve(ctx, p.a_mu(), gamma_rhs(g, p));
  double err = 0.0;
  for (int j = 0; j < n; ++j) err = std::max(err, std::abs(vs.gamma.value(j).real() - ref(j)));
  EXPECT_LE(err, 1e-10);
  EXPECT_LE(vs.residual, 1e-12);
  EXPECT_LE(std::abs(vs.gamma.coeff(0)), 1e-10);
}

TEST(Vortex, SuperpositionInRhs) {
  const int n = 64;
  auto g = shape(n, [](double a) { return 0.04 * std::cos(3 * a) + 0.03 * std::sin(2 * a); });
  KernelContext ctx(g, 0.1);
  auto r1 = real_sample(n, [](double a) { return std::sin(a) + 0.3 * std::cos(5 * a); });
  auto r2 = real_sample(n, [](double a) { return std::cos(2 * a); });
  auto g1 = solve_gamma_rhs(ctx, 0.8, r1).gamma;
  auto g2 = solve_gamma_rhs(ctx, 0.8, r2).gamma;
  auto g12 = solve_gamma_rhs(ctx, 0.8, 2.0 * r1 + (-1.5) * r2).gamma;
  auto d = g12 - (2.0 * g1 + (-1.5) * g2);
  EXPECT_LE(d.max_abs(), 1e-11);
}

TEST(Vortex, OddShapeGivesOddSheet) {
  const int n = 64;
  auto g = shape(n, [](double a) { return 0.05 * std::sin(2 * a) + 0.02 * std::sin(3 * a); });
  KernelContext ctx(g, 0.1);
  PhysicalParams p;
  p.beta = 0.1;
  p.u0 = -0.0017;
  auto vs = solve_gamma(g, ctx, p);
  double defect = 0.0;
  for (int j = 0; j < n; ++j)
    defect = std::max(defect, std::abs(vs.gamma.value((n - j) % n) + vs.gamma.value(j)));
  EXPECT_LE(defect, 1e-10);
}

TEST(Vortex, CircleMeanZero) {
  const int n = 64;
  auto g = build_geometry(ShapeState::circle(n));
  KernelContext ctx(g, 0.0);
  auto rhs = real_sample(n, [](double a) { return std::cos(3 * a) - 0.2 * std::sin(a); });
  auto vs = solve_gamma_rhs(ctx, 1.0, rhs);
  EXPECT_LE(std::abs(vs.gamma.coeff(0)), 1e-12);
}

TEST(Gmres, SmallDenseSystem) {
  // diagonally dominant nonsymmetric 3x3
  auto apply = [](const std::vector<double>& x) {
    return std::vector<double>{4 * x[0] + x[1], -x[0] + 3 * x[1] + x[2], 2 * x[1] + 5 * x[2]};
  };
  auto r = gmres(apply, {1.0, 2.0, 3.0}, {});
  ASSERT_TRUE(r.converged);
  auto ax = apply(r.x);
  EXPECT_NEAR(ax[0], 1.0, 1e-12);
  EXPECT_NEAR(ax[1], 2.0, 1e-12);
  EXPECT_NEAR(ax[2], 3.0, 1e-12);
}
