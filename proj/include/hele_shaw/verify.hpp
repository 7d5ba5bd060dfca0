#pragma once

// Check suite shared by the verify run mode and the acceptance binary. Each
// numbered criterion yields one CheckResult; extra property checks follow.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hele_shaw/evolution.hpp"
#include "hele_shaw/geometry.hpp"
#include "hele_shaw/operators.hpp"
#include "hele_shaw/spectral.hpp"
#include "hele_shaw/steady.hpp"
#include "hele_shaw/vortex.hpp"

namespace hele_shaw {

struct Measurement {
  std::string label;
  double value = 0.0;
  double bound = 0.0;
  bool lower_bound = false;  // pass iff value >= bound

  bool pass() const { return std::isfinite(value) && (lower_bound ? value >= bound : value <= bound); }
};

struct CheckResult {
  std::string id;
  std::string name;
  std::vector<Measurement> parts;
  std::string note;
  double seconds = 0.0;

  bool pass() const {
    if (parts.empty()) return false;
    for (const auto& m : parts)
      if (!m.pass()) return false;
    return true;
  }

  std::string line() const {
    std::ostringstream os;
    os << (pass() ? "[PASS] " : "[FAIL] ") << id << " " << name << " |";
    char buf[160];
    for (size_t i = 0; i < parts.size(); ++i) {
      const auto& m = parts[i];
      std::snprintf(buf, sizeof buf, "%s %s=%.4g %s %.4g", i == 0 ? "" : ";", m.label.c_str(), m.value,
                    m.lower_bound ? ">=" : "<=", m.bound);
      os << buf;
    }
    if (!note.empty()) os << " (" << note << ")";
    std::snprintf(buf, sizeof buf, " [%.1fs]", seconds);
    os << buf;
    return os.str();
  }
};

struct VerifyOptions {
  unsigned seed = 0;
  LinearSymbol symbol{1.0};  // symbol used by the energy-inequality check
  int n_steady = 64;
};

namespace verify_detail {

inline PeriodicField real_sample(int n, const std::function<double(double)>& f) {
  return PeriodicField::sample(n, f, true);
}

inline double max_diff(const PeriodicField& a, const PeriodicField& b) {
  double m = 0.0;
  for (int j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a.value(j) - b.value(j)));
  return m;
}

inline PeriodicField random_field(int n, int kmax, std::mt19937& rng, double decay) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cplx> c(n, 0.0);
  for (int k = 2; k <= kmax; ++k) {
    const cplx a = cplx(g(rng), g(rng)) * std::pow(static_cast<double>(k), -decay);
    c[PeriodicField::index(k, n)] = a;
    c[PeriodicField::index(-k, n)] = std::conj(a);
  }
  return PeriodicField::from_coeffs(std::move(c), true);
}

inline ShapeState closed_shape(const PeriodicField& tt, double V = kPi) {
  ShapeState s;
  s.theta_tilde = project_qn(tt, 1);
  s.V_target = V;
  enforce_constraints(s, 0.0);
  return s;
}

template <class F>
CheckResult timed(const std::string& id, const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  r.id = id;
  r.name = name;
  try {
    body(r);
  } catch (const std::exception& e) {
    r.note = std::string("error: ") + e.what();
    if (r.parts.empty()) r.parts.push_back({"completed", 1.0, 0.0});
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Regularised K1 quadrature on an oversampled grid built from the spectral
// interpolants of z and f.
inline std::vector<cplx> oversampled_k1(const InterfaceGeometry& g, const PeriodicField& f, int factor) {
  const int n = g.size(), m = factor * n;
  std::vector<cplx> z(m), za(m), zaa(m), fv(m);
  for (int j = 0; j < m; ++j) {
    const double a = kTwoPi * j / m;
    z[j] = g.z.evaluate(a);
    za[j] = g.z_alpha.evaluate(a);
    zaa[j] = g.z_alphalpha.evaluate(a);
    fv[j] = f.evaluate(a);
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

// Dense LU solve of the discretised sheet equation. Fields carry no Nyquist
// mode, so that direction is restored with a rank-one term.
inline Eigen::VectorXd dense_sheet_solve(const KernelContext& ctx, double a_mu, const PeriodicField& rhs) {
  const int n = rhs.size();
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    const auto col = apply_sheet_operator(ctx, a_mu, PeriodicField::from_real_values(e)).real_values();
    for (int i = 0; i < n; ++i) M(i, j) = col[i];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) += ((i + j) % 2 == 0 ? 1.0 : -1.0) / n;
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = rhs.value(i).real();
  return M.partialPivLu().solve(b);
}

// Smallest ratio (v, -A v)_{w,r} / ||v||^2_{w,r+3/2} over modes 2..kmax, from
// the generalised symmetric eigenproblem.
inline double extremal_coercivity_ratio(int n, double sigma, const LinearSymbol& sym, double r) {
  const WeightProfile w(sigma);
  const int kmax = n / 2 - 1, m = kmax - 1;
  std::vector<PeriodicField> basis;
  for (int k = 2; k <= kmax; ++k) basis.push_back(PeriodicField::mode(n, k, 1.0, false) +
                                                  PeriodicField::mode(n, -k, 1.0, false));
  Eigen::MatrixXd H(m, m), D = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    const PeriodicField Av = apply_linear_operator(basis[j], sigma, sym);
    for (int i = 0; i < m; ++i) H(i, j) = -weighted_inner(basis[i], Av, w, r).real();
    D(j, j) = std::pow(weighted_norm(basis[j], w, r + 1.5), 2);
  }
  const Eigen::MatrixXd Hs = 0.5 * (H + H.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs, D);
  return es.eigenvalues().minCoeff() / (15.0 * sigma / 64.0);
}

}  // namespace verify_detail

// ---------------------------------------------------------------------------
// Criteria

inline CheckResult check_spectral_identities(const VerifyOptions& opt) {
  using namespace verify_detail;
  return timed("1", "spectral identities (H, Lambda, Q_n) at N=64", [&](CheckResult& res) {
    const int n = 64;
    const double r = 0.3;
    // f = Re F(e^{ia}), F = 1/(1 - r e^{ia}) = sum r^k e^{ika}: H f = Im F,
    // Lambda f = Re(F' e^{ia}), Q_q f drops r^k cos(ka) for k <= q
    auto F = [&](double a) { return 1.0 / (1.0 - r * std::exp(kI * a)); };
    auto dF = [&](double a) { const cplx d = 1.0 - r * std::exp(kI * a); return r / (d * d); };
    const PeriodicField f = real_sample(n, [&](double a) { return F(a).real(); });
    double eh = max_diff(hilbert(f), real_sample(n, [&](double a) { return F(a).imag(); }));
    double el = max_diff(lambda_op(f),
                         real_sample(n, [&](double a) { return (dF(a) * std::exp(kI * a)).real(); }));
    double eq = 0.0;
    for (int q : {0, 1, 2, 5}) {
      const PeriodicField ref = real_sample(n, [&](double a) {
        double s = F(a).real();
        for (int k = 0; k <= q; ++k) s -= std::pow(r, k) * std::cos(k * a);
        return s;
      });
      eq = std::max(eq, max_diff(project_qn(f, q), ref));
    }
    // random trigonometric polynomials against termwise transforms
    std::mt19937 rng(opt.seed + 1);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> ac(n / 2), bc(n / 2);
      for (int k = 1; k < n / 2; ++k) ac[k] = g(rng), bc[k] = g(rng);
      auto series = [&](auto term) {
        return real_sample(n, [&](double a) {
          double s = 0.0;
          for (int k = 1; k < n / 2; ++k) s += term(k, a);
          return s;
        });
      };
      const PeriodicField u = series([&](int k, double a) { return ac[k] * std::cos(k * a) + bc[k] * std::sin(k * a); });
      const double scale = u.max_abs();
      eh = std::max(eh, max_diff(hilbert(u), series([&](int k, double a) {
                                   return ac[k] * std::sin(k * a) - bc[k] * std::cos(k * a);
                                 })) / scale);
      el = std::max(el, max_diff(lambda_op(u), series([&](int k, double a) {
                                   return k * (ac[k] * std::cos(k * a) + bc[k] * std::sin(k * a));
                                 })) / (scale * n));
    }
    res.parts = {{"H_err", eh, 1e-12}, {"Lambda_err", el, 1e-12}, {"Q_err", eq, 1e-12}};
  });
}

inline CheckResult check_circle_fixed_point(const VerifyOptions&) {
  using namespace verify_detail;
  return timed("2", "circle fixed point (gamma = 2 sin, U = 0)", [&](CheckResult& res) {
    const int n = 64;
    const ShapeState s = ShapeState::circle(n);
    const PhysicalParams p;
    const Evaluation e = evaluate(s, p);
    const double eg = max_diff(e.sheet.gamma, real_sample(n, [](double a) { return 2 * std::sin(a); }));
    res.parts = {{"gamma_err", eg, 1e-10}, {"max|U|", e.vel.U.max_abs(), 1e-10}};
  });
}

struct DecayRunResult {
  double max_abs_U_integral = 0.0;
  double area_drift = 0.0;
  double decay_rate = 0.0;
  double linear_mismatch = 0.0;
  std::string error;
};

/// The perturbed-circle run shared by the area and decay criteria.
inline DecayRunResult decay_run() {
  using namespace verify_detail;
  DecayRunResult out;
  const int n = 128;
  const double dt = 1e-3;
  PhysicalParams p;
  try {
    const ShapeState s0 = closed_shape(real_sample(n, [](double a) { return 0.01 * std::cos(3 * a); }));
    EvolveConfig cfg;
    cfg.params = p;
    cfg.dt = dt;
    cfg.t_end = 2.0;
    cfg.record_interval = 1;
    cfg.norm_r = 2.0;
    const double V0 = compute_area(s0);
    double drift = 0.0;
    cfg.on_step = [&](int, double, const ShapeState& st, const Evaluation&) {
      drift = std::max(drift, std::abs(compute_area(st) - V0) / V0);
    };
    const Trajectory traj = evolve(s0, cfg);
    out.max_abs_U_integral = traj.max_abs_U_integral;
    out.area_drift = drift;
    // least-squares slope of log ||theta_tilde||_2 over [0.05, 0.5]
    double st = 0, sy = 0, stt = 0, sty = 0;
    int cnt = 0;
    for (const auto& rec : traj.records) {
      if (rec.t < 0.05 - 1e-12 || rec.t > 0.5 + 1e-12 || rec.norm_r <= 0.0) continue;
      const double y = std::log(rec.norm_r);
      st += rec.t, sy += y, stt += rec.t * rec.t, sty += rec.t * y;
      ++cnt;
    }
    out.decay_rate = cnt > 2 ? -(cnt * sty - st * sy) / (cnt * stt - st * st) : 0.0;

    // small-amplitude run against the linear propagator
    const double eps = 1e-6;
    const ShapeState l0 = closed_shape(real_sample(n, [&](double a) { return eps * std::cos(3 * a); }));
    const double amp = sobolev_norm(l0.theta_tilde, 0.0);
    EvolveConfig lc = cfg;
    lc.t_end = 0.05;
    double worst = 0.0;
    lc.on_step = [&](int, double t, const ShapeState& st, const Evaluation&) {
      const PeriodicField ref = linear_propagator(l0.theta_tilde, t, p.sigma, LinearSymbol{p.a_mu()});
      worst = std::max(worst, sobolev_norm(st.theta_tilde - ref, 0.0) / amp);
    };
    evolve(l0, lc);
    out.linear_mismatch = worst;
  } catch (const std::exception& e) {
    out.error = e.what();
    out.max_abs_U_integral = out.area_drift = out.linear_mismatch = NAN;
    out.decay_rate = NAN;
  }
  return out;
}

inline CheckResult check_area_invariance(const DecayRunResult& run) {
  return verify_detail::timed("3", "area invariance (N=128, dt=1e-3, t in [0,2])", [&](CheckResult& res) {
    res.parts = {{"max|intU|", run.max_abs_U_integral, 1e-10}, {"area_drift", run.area_drift, 1e-6}};
    res.note = run.error;
  });
}

inline CheckResult check_decay_rate(const DecayRunResult& run, double sigma = 1.0) {
  return verify_detail::timed("4", "decay rate and linear regime", [&](CheckResult& res) {
    res.parts = {{"fitted_rate", run.decay_rate, sigma / 2, true},
                 {"linear_mismatch", run.linear_mismatch, 1e-4}};
    res.note = run.error;
  });
}

inline CheckResult check_energy_inequality(const VerifyOptions& opt) {
  using namespace verify_detail;
  return timed("5", "energy inequality (v, -A v)_{w,r} >= 15 sigma/64 ||v||^2_{w,r+3/2}",
               [&](CheckResult& res) {
                 const int n = 64;
                 std::mt19937 rng(opt.seed + 5);
                 int violations = 0;
                 double worst = INFINITY, extremal = INFINITY;
                 for (double sigma : {0.5, 1.0, 2.0}) {
                   const WeightProfile w(sigma);
                   for (double r : {0.0, 3.0}) {
                     for (int trial = 0; trial < 100; ++trial) {
                       const PeriodicField v = random_field(n, n / 2 - 1, rng, trial % 2 == 0 ? 0.0 : 2.0);
                       const double lhs = -weighted_inner(v, apply_linear_operator(v, sigma, opt.symbol), w, r).real();
                       const double rhs = 15.0 * sigma / 64.0 * std::pow(weighted_norm(v, w, r + 1.5), 2);
                       worst = std::min(worst, lhs / rhs);
                       if (lhs < rhs) ++violations;
                     }
                     extremal = std::min(extremal, extremal_coercivity_ratio(n, sigma, opt.symbol, r));
                   }
                 }
                 res.parts = {{"violations", static_cast<double>(violations), 0.0},
                              {"min_ratio_random", worst, 1.0, true},
                              {"min_ratio_extremal", extremal, 1.0, true}};
               });
}

struct SteadySweepEntry {
  double beta = 0.0;
  SteadySolution sol;
  AsymptoticSteady ref;
};

inline std::vector<SteadySweepEntry> steady_sweep(const VerifyOptions& opt, std::string* error) {
  std::vector<SteadySweepEntry> out;
  try {
    PhysicalParams p;
    for (double beta : {0.05, 0.1, 0.2}) {
      SteadySweepEntry e;
      e.beta = beta;
      e.sol = solve_steady(beta, p, opt.n_steady);
      e.ref = asymptotic_reference(beta, p.sigma, opt.n_steady);
      out.push_back(std::move(e));
    }
  } catch (const std::exception& e) {
    if (error) *error = e.what();
  }
  return out;
}

inline CheckResult check_steady_asymptotics(const std::vector<SteadySweepEntry>& sweep,
                                            const std::string& error) {
  return verify_detail::timed("6", "steady asymptotics vs small-beta series (mu2=0, sigma=1)", [&](CheckResult& res) {
    if (sweep.size() != 3) throw SolverFailure(error.empty() ? "steady sweep incomplete" : error);
    std::ostringstream note;
    for (const auto& e : sweep) {
      const double b = e.beta, b4 = std::pow(b, 4), b6 = std::pow(b, 6);
      const double du = std::abs(e.sol.u0 - e.ref.u0);
      const double s3 = -2.0 * e.sol.theta_s.coeff(3).imag();
      const double s3_ref = b4 / 54.0;
      const double dg = sobolev_norm(e.sol.gamma_s.gamma - e.ref.gamma_s, 0.0);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f", b);
      const std::string tag = std::string("b=") + buf;
      res.parts.push_back({tag + " |du0|", du, 5 * b6});
      res.parts.push_back({tag + " sin3_relerr", std::abs(s3 - s3_ref) / s3_ref, 0.1});
      res.parts.push_back({tag + " |dgamma|_0", dg, 10 * b6});
      std::snprintf(buf, sizeof buf, "%s%.2f: u0=%.9g sin3/b^4=%.5g", note.tellp() > 0 ? ", " : "", b,
                    e.sol.u0, s3 / b4);
      note << buf;
    }
    res.note = note.str();
  });
}

inline CheckResult check_steady_scaling(const std::vector<SteadySweepEntry>& sweep, const std::string& error) {
  return verify_detail::timed("7", "steady size <= C beta^2 with stable C", [&](CheckResult& res) {
    if (sweep.size() != 3) throw SolverFailure(error.empty() ? "steady sweep incomplete" : error);
    std::vector<double> C;
    for (const auto& e : sweep) {
      const int n = e.sol.theta_s.size();
      const PeriodicField two_sin = verify_detail::real_sample(n, [](double a) { return 2 * std::sin(a); });
      C.push_back((sobolev_norm(e.sol.theta_s, 3.0) + std::abs(e.sol.u0) +
                   sobolev_norm(e.sol.gamma_s.gamma - two_sin, 1.0)) /
                  (e.beta * e.beta));
    }
    const double mean = (C[0] + C[1] + C[2]) / 3.0;
    double spread = 0.0;
    for (double c : C) spread = std::max(spread, std::abs(c / mean - 1.0));
    res.parts = {{"max|C/mean-1|", spread, 0.25}};
    char buf[96];
    std::snprintf(buf, sizeof buf, "C = %.5g, %.5g, %.5g", C[0], C[1], C[2]);
    res.note = buf;
  });
}

inline CheckResult check_g2_identity(const VerifyOptions&) {
  return verify_detail::timed("8", "G2 curvature identity at beta=0.05", [&](CheckResult& res) {
    const int n = 64;
    const double beta = 0.05;
    const PeriodicField z = PeriodicField::sample(n, [](double a) { return std::exp(kI * a) - 1.0; }, false);
    const KernelContext ctx(z, derivative(z), derivative(z, 2), beta);
    const PeriodicField gamma = verify_detail::real_sample(n, [](double a) { return 2 * std::sin(a); });
    const PeriodicField G2 = apply_G2(ctx, gamma);
    double err = 0.0;
    for (int j = 0; j < n; ++j)
      err = std::max(err, std::abs(2.0 / (beta * beta) * G2.value(j) - std::exp(kI * grid_point(j, n)) / 3.0));
    res.parts = {{"sup_err", err, 1e-3}};
  });
}

inline CheckResult check_symmetric_evolution(const VerifyOptions& opt) {
  using namespace verify_detail;
  return timed("9", "symmetry preservation and approach to the steady bubble (beta=0.1)", [&](CheckResult& res) {
    const int n = opt.n_steady;
    PhysicalParams p;
    p.beta = 0.1;
    const SteadySolution sol = solve_steady(p.beta, p, n);
    p.u0 = sol.u0;
    const ShapeState steady = sol.shape();
    ShapeState s0;
    s0.theta_tilde = sol.theta_tilde + real_sample(n, [](double a) { return 0.01 * std::sin(2 * a); });
    s0.V_target = steady.V_target;
    enforce_constraints(s0, sol.theta_hat1);
    auto distance = [&](const ShapeState& s) {
      const PeriodicField th = shape_angle(s.theta_tilde, s.theta_hat1).plus_constant(s.theta_hat0);
      return sobolev_norm(th - sol.theta_s, 2.0);
    };
    EvolveConfig cfg;
    cfg.params = p;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    double defect = oddness_defect(s0.theta_tilde);
    cfg.on_step = [&](int, double, const ShapeState& st, const Evaluation& e) {
      defect = std::max({defect, oddness_defect(st.theta_tilde), oddness_defect(e.geometry.theta)});
    };
    const Trajectory traj = evolve(s0, cfg);
    const double d0 = distance(s0), d1 = distance(traj.final_state);
    res.parts = {{"oddness_defect", defect, 1e-9}, {"dist_ratio", d1 / d0, 0.5}};
    char buf[96];
    std::snprintf(buf, sizeof buf, "|theta-theta_s|_2: %.4g -> %.4g", d0, d1);
    res.note = buf;
  });
}

inline CheckResult check_oracles(const VerifyOptions& opt) {
  using namespace verify_detail;
  return timed("10", "oracle equivalences", [&](CheckResult& res) {
    const int n = 64;
    // K against 10x oversampled direct quadrature
    const ShapeState s = closed_shape(real_sample(n, [](double a) { return 0.05 * std::cos(2 * a); }));
    const InterfaceGeometry g = build_geometry(s);
    const KernelContext ctx(g, 0.0);
    const PeriodicField f = real_sample(n, [](double a) { return std::cos(3 * a); });
    const PeriodicField K = apply_K(ctx, f);
    const auto ref = oversampled_k1(g, f, 10);
    double ek = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
      ek = std::max(ek, std::abs(K.value(i) - ref[i]));
      scale = std::max(scale, std::abs(ref[i]));
    }
    ek /= scale;
    // sheet solve against dense LU
    const PhysicalParams p;
    const VortexSheet vs = solve_gamma(g, ctx, p);
    const Eigen::VectorXd dense = dense_sheet_solve(ctx, p.a_mu(), gamma_rhs(g, p));
    double eg = 0.0;
    for (int j = 0; j < n; ++j) eg = std::max(eg, std::abs(vs.gamma.value(j).real() - dense(j)));
    // A round trip
    std::mt19937 rng(opt.seed + 10);
    double ea = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const PeriodicField u = random_field(n, n / 2 - 1, rng, 1.0);
      ea = std::max(ea, (apply_A(invert_A(u, 1.0, 1.0), 1.0, 1.0) - u).max_abs());
      ea = std::max(ea, (invert_A(apply_A(u, 1.0, 1.0), 1.0, 1.0) - u).max_abs());
    }
    // q2 diagonal against Richardson extrapolation of off-diagonal values
    const ShapeState s2 = closed_shape(real_sample(n, [](double a) {
      return 0.05 * std::cos(2 * a) + 0.02 * std::sin(4 * a);
    }));
    const DividedDifferences dd(build_geometry(s2).z);
    double eq = 0.0;
    for (int i : {0, 7, 21, 40}) {
      const double a = grid_point(i, n), h = 1e-2;
      const cplx f1 = dd.q2_at(a, a - h), f2 = dd.q2_at(a, a - h / 2), f3 = dd.q2_at(a, a - h / 4);
      const cplx r1 = 2.0 * f2 - f1, r2 = 2.0 * f3 - f2;
      eq = std::max(eq, std::abs((4.0 * r2 - r1) / 3.0 - dd.q2(i, i)));
    }
    res.parts = {{"K_vs_oversampled_rel", ek, 1e-8},
                 {"gamma_vs_dense", eg, 1e-10},
                 {"A_roundtrip", ea, 1e-12},
                 {"q2_diag_vs_richardson", eq, 1e-8}};
  });
}

// ---------------------------------------------------------------------------
// Extra property checks (verify mode only)

inline CheckResult check_steady_under_dynamics(const VerifyOptions& opt) {
  return verify_detail::timed("P1", "steady bubble is stationary under the full dynamics", [&](CheckResult& res) {
    PhysicalParams p;
    p.beta = 0.1;
    const SteadySolution sol = solve_steady(p.beta, p, opt.n_steady);
    p.u0 = sol.u0;
    const Evaluation e = evaluate(sol.shape(), p);
    res.parts = {{"|theta_t|_0", sobolev_norm(e.theta_tilde_t, 0.0), 1e-8},
                 {"steady_residual", sol.residual_norm, 1e-10},
                 {"oddness", oddness_defect(sol.theta_s), 1e-10}};
  });
}

inline CheckResult check_weight_cutoff(const VerifyOptions&) {
  return verify_detail::timed("P2", "weighted-norm cutoff K(sigma)", [&](CheckResult& res) {
    const double k05 = WeightProfile(0.5).cutoff_K;
    const double k01 = WeightProfile(0.1).cutoff_K;
    const double k1 = WeightProfile(1.0).cutoff_K;
    res.parts = {{"|K(0.5)-4|", std::abs(k05 - 4), 0.0}, {"|K(0.1)-8|", std::abs(k01 - 8), 0.0},
                 {"|K(1)-2|", std::abs(k1 - 2), 0.0}};
  });
}

inline CheckResult check_frechet(const VerifyOptions&) {
  return verify_detail::timed("P3", "Frechet derivative at the circle vs finite differences", [&](CheckResult& res) {
    const int n = 64;
    const double eps = 1e-6;
    const PhysicalParams p;
    const PeriodicField h = verify_detail::real_sample(n, [](double a) { return std::cos(3 * a); });
    const PeriodicField fd = (1.0 / eps) * (steady_residual(eps * h, 0.0, 0.0, p) -
                                            steady_residual(PeriodicField::zeros(n), 0.0, 0.0, p));
    res.parts = {{"fd_err", (fd - frechet_at_circle(h, p.sigma, p.a_mu())).max_abs(), 1e-5}};
  });
}

/// The numbered acceptance criteria 1..10, in order.
inline std::vector<CheckResult> run_acceptance_suite(const VerifyOptions& opt,
                                                     const std::function<void(const CheckResult&)>& sink = {}) {
  std::vector<CheckResult> out;
  auto add = [&](CheckResult r) {
    if (sink) sink(r);
    out.push_back(std::move(r));
  };
  add(check_spectral_identities(opt));
  add(check_circle_fixed_point(opt));
  const auto t0 = std::chrono::steady_clock::now();
  const DecayRunResult run = decay_run();
  const double run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CheckResult c3 = check_area_invariance(run), c4 = check_decay_rate(run);
  c3.seconds += run_seconds;
  add(c3);
  add(c4);
  add(check_energy_inequality(opt));
  std::string err;
  const auto s0 = std::chrono::steady_clock::now();
  const auto sweep = steady_sweep(opt, &err);
  const double sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
  CheckResult c6 = check_steady_asymptotics(sweep, err);
  c6.seconds += sweep_seconds;
  add(c6);
  add(check_steady_scaling(sweep, err));
  add(check_g2_identity(opt));
  add(check_symmetric_evolution(opt));
  add(check_oracles(opt));
  return out;
}

/// Acceptance criteria followed by the extra property checks.
inline std::vector<CheckResult> run_verify_suite(const VerifyOptions& opt,
                                                 const std::function<void(const CheckResult&)>& sink = {}) {
  auto out = run_acceptance_suite(opt, sink);
  for (auto* fn : {&check_steady_under_dynamics, &check_weight_cutoff, &check_frechet}) {
    CheckResult r = (*fn)(opt);
    if (sink) sink(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hele_shaw
