#pragma once

// Batch front end: JSON run configuration, the four run modes and the
// exit-code contract (0 ok, 1 verify failures, 2 config, 3 solver, 4 geometry).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "hele_shaw/errors.hpp"
#include "hele_shaw/evolution.hpp"
#include "hele_shaw/io.hpp"
#include "hele_shaw/steady.hpp"
#include "hele_shaw/verify.hpp"

namespace hele_shaw {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitVerify = 1, kExitConfig = 2, kExitSolver = 3, kExitGeometry = 4 };

struct ThetaMode {
  int k = 0;
  double re = 0.0;
  double im = 0.0;
};

struct RunConfig {
  std::string mode;
  double sigma = 1.0;
  double beta = 0.0;
  double mu1 = 1.0;
  double mu2 = 0.0;
  int n_modes = 64;
  double dt = 1e-3;
  double t_end = 1.0;
  int record_interval = 10;
  std::vector<ThetaMode> initial_theta;
  bool symmetric = false;
  std::optional<double> u0;  // empty: steady-solve
  std::string output_dir = "out";
  unsigned seed = 0;

  // optional extras
  int snapshot_interval = 100;
  double norm_r = 2.0;
  int continuation_steps = 8;
  bool newton = false;
  std::optional<double> area;
  std::string sweep_mode = "steady";
  std::string sweep_param = "beta";
  std::vector<double> sweep_values;

  PhysicalParams params() const {
    PhysicalParams p;
    p.sigma = sigma;
    p.beta = beta;
    p.mu1 = mu1;
    p.mu2 = mu2;
    p.u0 = u0.value_or(0.0);
    return p;
  }
};

namespace cli_detail {

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

template <class T>
T optional_key(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

inline bool is_mode(const std::string& m) {
  return m == "evolve" || m == "steady" || m == "verify" || m == "sweep";
}

}  // namespace cli_detail

inline void validate(const RunConfig& c) {
  if (!cli_detail::is_mode(c.mode)) throw ConfigError("mode must be evolve, steady, verify or sweep");
  c.params().validate();
  if (!is_power_of_two(c.n_modes) || c.n_modes < 8) throw ConfigError("n_modes must be a power of two >= 8");
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  if (c.record_interval < 1) throw ConfigError("record_interval must be >= 1");
  if (c.snapshot_interval < 0) throw ConfigError("snapshot_interval must be >= 0");
  if (c.continuation_steps < 1) throw ConfigError("continuation_steps must be >= 1");
  if (c.area && !(*c.area > 0.0)) throw ConfigError("area must be positive");
  for (const auto& m : c.initial_theta) {
    if (m.k < 0 || m.k > c.n_modes / 2 - 1)
      throw ConfigError("initial_theta mode " + std::to_string(m.k) + " outside 0..N/2-1");
    if (m.k == 0 && m.im != 0.0) throw ConfigError("initial_theta mode 0 must be real");
    if (c.symmetric && m.k != 1 && m.re != 0.0)
      throw ConfigError("symmetric run needs odd data: mode " + std::to_string(m.k) + " has a cosine part");
  }
  if (c.mode == "sweep") {
    if (c.sweep_values.empty()) throw ConfigError("sweep_values must be a nonempty list");
    if (c.sweep_mode != "evolve" && c.sweep_mode != "steady") throw ConfigError("sweep_mode must be evolve or steady");
    static const char* params[] = {"beta", "sigma", "mu1", "mu2", "dt", "t_end"};
    bool ok = false;
    for (const char* p : params) ok = ok || c.sweep_param == p;
    if (!ok) throw ConfigError("sweep_param must be one of beta, sigma, mu1, mu2, dt, t_end");
  }
}

inline RunConfig parse_config(const json& j) {
  using namespace cli_detail;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.mode = required<std::string>(j, "mode");
  c.sigma = required<double>(j, "sigma");
  c.beta = required<double>(j, "beta");
  c.mu1 = required<double>(j, "mu1");
  c.mu2 = required<double>(j, "mu2");
  c.n_modes = required<int>(j, "n_modes");
  c.dt = required<double>(j, "dt");
  c.t_end = required<double>(j, "t_end");
  c.symmetric = required<bool>(j, "symmetric");
  c.output_dir = required<std::string>(j, "output_dir");
  if (!j.contains("initial_theta") || !j["initial_theta"].is_array())
    throw ConfigError("initial_theta must be a list of [k, re, im] triples");
  for (const auto& t : j["initial_theta"]) {
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number() || !t[2].is_number())
      throw ConfigError("initial_theta entries must be [k, re, im]");
    c.initial_theta.push_back({t[0].get<int>(), t[1].get<double>(), t[2].get<double>()});
  }
  if (!j.contains("u0_source")) throw ConfigError("missing key 'u0_source'");
  const json& u = j["u0_source"];
  if (u.is_string()) {
    if (u.get<std::string>() != "steady-solve") throw ConfigError("u0_source must be \"steady-solve\" or a number");
  } else if (u.is_number()) {
    c.u0 = u.get<double>();
  } else {
    throw ConfigError("u0_source must be \"steady-solve\" or a number");
  }
  c.seed = optional_key<unsigned>(j, "seed", 0u);
  c.record_interval = optional_key<int>(j, "record_interval", 10);
  c.snapshot_interval = optional_key<int>(j, "snapshot_interval", 100);
  c.norm_r = optional_key<double>(j, "norm_r", 2.0);
  c.continuation_steps = optional_key<int>(j, "continuation_steps", 8);
  c.newton = optional_key<bool>(j, "newton", false);
  if (j.contains("area")) c.area = required<double>(j, "area");
  c.sweep_mode = optional_key<std::string>(j, "sweep_mode", "steady");
  c.sweep_param = optional_key<std::string>(j, "sweep_param", "beta");
  c.sweep_values = optional_key<std::vector<double>>(j, "sweep_values", {});
  validate(c);
  return c;
}

inline json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

inline RunConfig load_config(const std::string& path) { return parse_config(load_json(path)); }

/// Adds the configured modes to theta_tilde (k >= 2) and theta_hat0 (k = 0).
/// Modes k = 1 are fixed by closure and ignored.
inline void apply_initial_modes(ShapeState& s, const std::vector<ThetaMode>& modes) {
  const int n = s.size();
  std::vector<cplx> c(n, 0.0);
  for (const auto& m : modes) {
    if (m.k == 0) {
      s.theta_hat0 += m.re;
    } else if (m.k >= 2) {
      c[PeriodicField::index(m.k, n)] += cplx(m.re, m.im);
      c[PeriodicField::index(-m.k, n)] += cplx(m.re, -m.im);
    }
  }
  s.theta_tilde = s.theta_tilde + PeriodicField::from_coeffs(std::move(c), true);
}

inline SteadyOptions steady_options(const RunConfig& c) {
  SteadyOptions o;
  o.continuation_steps = c.continuation_steps;
  o.use_newton = c.newton;
  return o;
}

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error("cannot create directory " + p.string() + ": " + ec.message());
}

inline int run_evolve(const RunConfig& c) {
  PhysicalParams p = c.params();
  ShapeState s0 = ShapeState::circle(c.n_modes);
  std::optional<SteadySolution> steady;
  if (!c.u0) {
    steady = solve_steady(c.beta, p, c.n_modes, steady_options(c));
    p.u0 = steady->u0;
    s0 = steady->shape();
  }
  apply_initial_modes(s0, c.initial_theta);
  if (c.area) s0.V_target = *c.area;
  enforce_constraints(s0, s0.theta_hat1);

  const fs::path out(c.output_dir);
  ensure_dir(out / "snapshots");
  EvolveConfig ec;
  ec.params = p;
  ec.dt = c.dt;
  ec.t_end = c.t_end;
  ec.record_interval = c.record_interval;
  ec.snapshot_interval = c.snapshot_interval;
  ec.norm_r = c.norm_r;
  ec.on_snapshot = [&](int step, double, const ShapeState& s, const Evaluation& e) {
    char name[64];
    std::snprintf(name, sizeof name, "step_%08d.csv", step);
    write_snapshot((out / "snapshots" / name).string(), s, e);
  };
  if (c.snapshot_interval == 0) {
    // initial and final shapes only
    ec.snapshot_interval = 1 << 30;
  }
  const Trajectory traj = evolve(s0, ec);
  write_diagnostics((out / "diagnostics.jsonl").string(), traj.records);
  const auto& last = traj.records.back();
  std::printf("evolve: %d steps to t=%g, |theta_tilde|_%g = %.6g, L = %.12g, V = %.12g, u0 = %.9g\n",
              traj.steps, last.t, c.norm_r, last.norm_r, last.L, last.V, p.u0);
  return kExitOk;
}

inline int run_steady(const RunConfig& c) {
  const PhysicalParams p = c.params();
  const SteadySolution sol = solve_steady(c.beta, p, c.n_modes, steady_options(c));
  json j = steady_to_json(sol, p);
  if (c.mu2 == 0.0) j["comparison"] = steady_comparison(sol, p);
  const fs::path out(c.output_dir);
  ensure_dir(out);
  std::ofstream os(out / "steady.json");
  if (!os) throw Error("cannot write steady.json");
  os << j.dump(2) << '\n';
  std::printf("steady: beta=%g sigma=%g u0=%.12g residual=%.3g iterations=%d\n", sol.beta, p.sigma, sol.u0,
              sol.residual_norm, sol.iterations);
  if (c.mu2 == 0.0)
    std::printf("        asymptotic u0=%.12g |du0|=%.3g\n", j["comparison"]["u0_asym"].get<double>(),
                j["comparison"]["du0"].get<double>());
  return kExitOk;
}

inline int run_verify(const RunConfig& c, const VerifyOptions* override_opt = nullptr) {
  VerifyOptions opt;
  opt.seed = c.seed;
  if (override_opt) opt = *override_opt;
  const fs::path out(c.output_dir);
  ensure_dir(out);
  std::ofstream report(out / "verify_report.txt");
  if (!report) throw Error("cannot write verify_report.txt");
  int failed = 0;
  run_verify_suite(opt, [&](const CheckResult& r) {
    std::printf("%s\n", r.line().c_str());
    std::fflush(stdout);
    report << r.line() << '\n';
    if (!r.pass()) ++failed;
  });
  report << failed << " checks failed\n";
  std::printf("%d checks failed\n", failed);
  return failed == 0 ? kExitOk : kExitVerify;
}

inline std::string self_executable(const char* argv0) {
  std::error_code ec;
  const fs::path p = fs::read_symlink("/proc/self/exe", ec);
  return ec ? std::string(argv0) : p.string();
}

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char ch : s) q += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return q + "'";
}

/// One child process per sweep value, each with its own config and output
/// directory; summary in sweep.jsonl.
inline int run_sweep(const json& raw, const RunConfig& c, const std::string& exe) {
  const fs::path out(c.output_dir);
  ensure_dir(out);
  std::ofstream summary(out / "sweep.jsonl");
  int worst = kExitOk;
  for (size_t i = 0; i < c.sweep_values.size(); ++i) {
    json child = raw;
    child["mode"] = c.sweep_mode;
    child[c.sweep_param] = c.sweep_values[i];
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu", i);
    const fs::path dir = out / name;
    ensure_dir(dir);
    child["output_dir"] = dir.string();
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << child.dump(2) << '\n';
    const std::string cmd = shell_quote(exe) + " " + c.sweep_mode + " --config " + shell_quote(cfg.string()) +
                            " --out " + shell_quote(dir.string()) + " > " + shell_quote((dir / "log.txt").string()) +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = status == -1 ? kExitSolver : (WIFEXITED(status) ? WEXITSTATUS(status) : kExitSolver);
    summary << json{{"index", i}, {"param", c.sweep_param}, {"value", c.sweep_values[i]}, {"exit_code", code},
                    {"output_dir", dir.string()}}
                   .dump()
            << '\n';
    std::printf("sweep %s=%g -> exit %d (%s)\n", c.sweep_param.c_str(), c.sweep_values[i], code, dir.c_str());
    worst = std::max(worst, code);
  }
  return worst;
}

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const GeometryFailure*>(&e)) return kExitGeometry;
  return kExitSolver;
}

/// `<binary> <mode> --config <path> [--out <dir>]`
inline int run_main(int argc, char** argv) {
  CLI::App app{"Hele-Shaw bubble simulator"};
  std::string mode, config_path, out_dir;
  app.add_option("mode", mode, "evolve | steady | verify | sweep")->required();
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  try {
    if (!cli_detail::is_mode(mode)) throw ConfigError("unknown mode '" + mode + "'");
    json raw = load_json(config_path);
    if (raw.is_object() && raw.contains("mode") && raw["mode"].is_string() && raw["mode"].get<std::string>() != mode)
      throw ConfigError("mode '" + mode + "' does not match config mode '" + raw["mode"].get<std::string>() + "'");
    if (!out_dir.empty() && raw.is_object()) raw["output_dir"] = out_dir;
    const RunConfig c = parse_config(raw);
    if (mode == "evolve") return run_evolve(c);
    if (mode == "steady") return run_steady(c);
    if (mode == "verify") return run_verify(c);
    return run_sweep(raw, c, self_executable(argv[0]));
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    std::fprintf(stderr, "error (exit %d): %s\n", code, e.what());
    return code;
  }
}

}  // namespace hele_shaw
