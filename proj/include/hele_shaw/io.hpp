#pragma once

// Output formats: diagnostics JSONL, snapshot CSV, steady-solution JSON.

#include <cstdio>
#include <fstream>
#include <string>

#include "json.hpp"

#include "hele_shaw/errors.hpp"
#include "hele_shaw/evolution.hpp"
#include "hele_shaw/steady.hpp"

namespace hele_shaw {

using json = nlohmann::json;

inline json record_to_json(const DiagnosticsRecord& r) {
  return json{{"t", r.t},
              {"L", r.L},
              {"V", r.V},
              {"norm_r", r.norm_r},
              {"weighted_norm", r.weighted_norm},
              {"closure_res", r.closure_res},
              {"q1_min", r.q1_min},
              {"U_mean", r.U_mean},
              {"theta_hat0", r.theta_hat0},
              {"y0", r.y0},
              {"gamma_res", r.gamma_res}};
}

inline void write_diagnostics(const std::string& path, const std::vector<DiagnosticsRecord>& records) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  for (const auto& r : records) os << record_to_json(r).dump() << '\n';
}

inline const char* kSnapshotHeader = "alpha,x,y,theta,gamma,U,T";

inline void write_snapshot(const std::string& path, const ShapeState& s, const Evaluation& e) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << kSnapshotHeader << '\n';
  const int n = s.size();
  char buf[256];
  for (int j = 0; j < n; ++j) {
    const cplx z = e.geometry.z.value(j);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", grid_point(j, n), z.real(),
                  z.imag(), e.geometry.theta.value(j).real(), e.sheet.gamma.value(j).real(),
                  e.vel.U.value(j).real(), e.vel.T.value(j).real());
    os << buf << '\n';
  }
}

/// [[k, re, im], ...] for 1 <= k <= N/2 - 1.
inline json modes_to_json(const PeriodicField& f, int k_min = 1) {
  json out = json::array();
  for (int k = k_min; k <= f.max_mode(); ++k) out.push_back({k, f.coeff(k).real(), f.coeff(k).imag()});
  return out;
}

inline json steady_to_json(const SteadySolution& sol, const PhysicalParams& p) {
  return json{{"beta", sol.beta},
              {"sigma", p.sigma},
              {"a_mu", p.a_mu()},
              {"u0", sol.u0},
              {"theta_modes", modes_to_json(sol.theta_s)},
              {"gamma_modes", modes_to_json(sol.gamma_s.gamma)},
              {"residual", sol.residual_norm},
              {"iterations", sol.iterations}};
}

/// Differences against the small-beta series (meaningful for mu2 = 0).
inline json steady_comparison(const SteadySolution& sol, const PhysicalParams& p) {
  const int n = sol.theta_s.size();
  const AsymptoticSteady ref = asymptotic_reference(sol.beta, p.sigma, n);
  const double b = sol.beta, b4 = std::pow(b, 4), b6 = std::pow(b, 6);
  return json{{"u0_asym", ref.u0},
              {"du0", std::abs(sol.u0 - ref.u0)},
              {"du0_bound", 5 * b6},
              {"theta_sin3", -2.0 * sol.theta_s.coeff(3).imag()},
              {"theta_sin3_asym", b4 / (54 * p.sigma)},
              {"theta_sin2", -2.0 * sol.theta_s.coeff(2).imag()},
              {"theta_sin2_asym", b4 / (72 * p.sigma * p.sigma)},
              {"gamma_err_0", sobolev_norm(sol.gamma_s.gamma - ref.gamma_s, 0.0)},
              {"gamma_err_bound", 10 * b6}};
}

}  // namespace hele_shaw
