#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hele_shaw/cli.hpp"

using namespace hele_shaw;

namespace {

json base_config(const std::string& mode) {
  return json{{"mode", mode},        {"sigma", 1.0},          {"beta", 0.0},
              {"mu1", 1.0},          {"mu2", 0.0},            {"n_modes", 32},
              {"dt", 1e-3},          {"t_end", 0.01},         {"initial_theta", json::array({{3, 0.01, 0.0}})},
              {"symmetric", false},  {"u0_source", 0.0},      {"output_dir", "unused"}};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hele_shaw_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const json& cfg, const fs::path& dir) {
  const fs::path path = dir / "config.json";
  std::ofstream(path) << cfg.dump();
  const std::string mode = cfg["mode"].get<std::string>();
  std::vector<std::string> args = {"hele_shaw_cli", mode, "--config", path.string(), "--out", dir.string()};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Config, ParsesRequiredAndOptionalKeys) {
  json j = base_config("evolve");
  j["u0_source"] = "steady-solve";
  j["seed"] = 7;
  j["area"] = 2.0;
  const RunConfig c = parse_config(j);
  EXPECT_EQ(c.mode, "evolve");
  EXPECT_EQ(c.n_modes, 32);
  EXPECT_FALSE(c.u0.has_value());
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.record_interval, 10);
  ASSERT_TRUE(c.area.has_value());
  EXPECT_EQ(*c.area, 2.0);
  ASSERT_EQ(c.initial_theta.size(), 1u);
  EXPECT_EQ(c.initial_theta[0].k, 3);
}

TEST(Config, RejectsBadInput) {
  auto expect_bad = [](json j) { EXPECT_THROW(parse_config(j), ConfigError) << j.dump(); };
  json j = base_config("evolve");
  j.erase("sigma");
  expect_bad(j);
  j = base_config("evolve");
  j["sigma"] = 0.0;
  expect_bad(j);
  j = base_config("evolve");
  j["n_modes"] = 48;
  expect_bad(j);
  j = base_config("evolve");
  j["dt"] = -1e-3;
  expect_bad(j);
  j = base_config("evolve");
  j["mode"] = "relax";
  expect_bad(j);
  j = base_config("evolve");
  j["u0_source"] = "guess";
  expect_bad(j);
  j = base_config("evolve");
  j["initial_theta"] = json::array({{20, 0.1, 0.0}});
  expect_bad(j);
  j = base_config("evolve");
  j["initial_theta"] = json::array({{-2, 0.1, 0.0}});
  expect_bad(j);
  j = base_config("evolve");
  j["symmetric"] = true;  // cos 3 alpha is even
  expect_bad(j);
  j = base_config("sweep");
  expect_bad(j);
  expect_bad(json::array());
}

TEST(Config, SymmetricAcceptsOddData) {
  json j = base_config("evolve");
  j["symmetric"] = true;
  j["initial_theta"] = json::array({{3, 0.0, -0.01}});
  EXPECT_NO_THROW(parse_config(j));
}

TEST(Config, InitialModesLandInState) {
  ShapeState s = ShapeState::circle(32);
  apply_initial_modes(s, {{0, 0.2, 0.0}, {1, 5.0, 5.0}, {3, 0.01, -0.02}});
  EXPECT_DOUBLE_EQ(s.theta_hat0, 0.2);
  EXPECT_EQ(s.theta_tilde.coeff(1), cplx(0.0));
  EXPECT_NEAR(std::abs(s.theta_tilde.coeff(3) - cplx(0.01, -0.02)), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(s.theta_tilde.coeff(-3) - cplx(0.01, 0.02)), 0.0, 1e-16);
}

TEST(Cli, ExitCodesForConfigProblems) {
  const fs::path dir = scratch("codes");
  EXPECT_EQ(run_cli(json{{"mode", "evolve"}}, dir), kExitConfig);
  std::vector<std::string> args = {"hele_shaw_cli", "steady", "--config", (dir / "missing.json").string()};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  EXPECT_EQ(run_main(static_cast<int>(argv.size()), argv.data()), kExitConfig);
  // positional mode disagreeing with the file
  const fs::path path = dir / "c.json";
  std::ofstream(path) << base_config("evolve").dump();
  args = {"hele_shaw_cli", "steady", "--config", path.string()};
  argv.clear();
  for (auto& a : args) argv.push_back(a.data());
  EXPECT_EQ(run_main(static_cast<int>(argv.size()), argv.data()), kExitConfig);
}

TEST(Cli, EvolveWritesDiagnosticsAndSnapshots) {
  const fs::path dir = scratch("evolve");
  json cfg = base_config("evolve");
  cfg["record_interval"] = 2;
  cfg["snapshot_interval"] = 5;
  ASSERT_EQ(run_cli(cfg, dir), kExitOk);
  const auto diag = lines(dir / "diagnostics.jsonl");
  ASSERT_EQ(diag.size(), 6u);
  for (const auto& l : diag) {
    const json r = json::parse(l);
    for (const char* key : {"t", "L", "V", "norm_r", "closure_res", "q1_min", "U_mean"}) EXPECT_TRUE(r.contains(key));
    EXPECT_NEAR(r["V"].get<double>(), kPi, 1e-12);
  }
  EXPECT_NEAR(json::parse(diag.back())["t"].get<double>(), 0.01, 1e-12);
  int snaps = 0;
  for (const auto& e : fs::directory_iterator(dir / "snapshots")) {
    ++snaps;
    const auto rows = lines(e.path());
    ASSERT_EQ(rows.size(), 33u);
    EXPECT_EQ(rows[0], kSnapshotHeader);
    std::stringstream ss(rows[1]);
    int fields = 0;
    for (std::string tok; std::getline(ss, tok, ',');) ++fields;
    EXPECT_EQ(fields, 7);
  }
  EXPECT_EQ(snaps, 3);  // steps 0, 5, 10
}

TEST(Cli, SteadyAtZeroBetaIsCircle) {
  const fs::path dir = scratch("steady");
  json cfg = base_config("steady");
  cfg["u0_source"] = "steady-solve";
  cfg["initial_theta"] = json::array();
  ASSERT_EQ(run_cli(cfg, dir), kExitOk);
  std::ifstream is(dir / "steady.json");
  const json j = json::parse(is);
  EXPECT_EQ(j["u0"].get<double>(), 0.0);
  for (const auto& m : j["theta_modes"]) {
    EXPECT_EQ(m[1].get<double>(), 0.0);
    EXPECT_EQ(m[2].get<double>(), 0.0);
  }
  EXPECT_TRUE(j.contains("comparison"));
}

TEST(Cli, BetaBeyondWallGuardIsGeometryFailure) {
  const fs::path dir = scratch("guard");
  json cfg = base_config("steady");
  cfg["u0_source"] = "steady-solve";
  cfg["initial_theta"] = json::array();
  cfg["beta"] = 2.0;  // channel half-width pi/2 < bubble radius reach
  EXPECT_EQ(run_cli(cfg, dir), kExitGeometry);
}

TEST(Cli, SweepRunsChildren) {
  const fs::path dir = scratch("sweep");
  json cfg = base_config("sweep");
  cfg["sweep_mode"] = "steady";
  cfg["sweep_values"] = {0.0, 0.05};
  cfg["u0_source"] = "steady-solve";
  cfg["initial_theta"] = json::array();
  // the test binary cannot re-dispatch modes, so locate the CLI next to it
  const fs::path exe = fs::read_symlink("/proc/self/exe").parent_path() / "hele_shaw_cli";
  if (!fs::exists(exe)) GTEST_SKIP() << "hele_shaw_cli not built";
  cfg["output_dir"] = dir.string();
  ASSERT_EQ(run_sweep(cfg, parse_config(cfg), exe.string()), kExitOk);
  const auto rows = lines(dir / "sweep.jsonl");
  ASSERT_EQ(rows.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    const json r = json::parse(rows[i]);
    EXPECT_EQ(r["exit_code"].get<int>(), 0);
    EXPECT_TRUE(fs::exists(fs::path(r["output_dir"].get<std::string>()) / "steady.json"));
  }
}

// A wrong linear symbol must be caught by the energy check.
TEST(EnergyCheck, FlagsMutatedSymbols) {
  VerifyOptions opt;
  EXPECT_TRUE(check_energy_inequality(opt).pass());
  for (LinearSymbol bad : {LinearSymbol{1.0, -1.0, 1.0}, LinearSymbol{1.0, 0.5, 1.0}, LinearSymbol{1.0, 1.0, 3.0}}) {
    opt.symbol = bad;
    EXPECT_FALSE(check_energy_inequality(opt).pass()) << bad.d_scale << " " << bad.m_scale;
  }
}

// Flipping the sign of m leaves the quadratic form invariant under
// v(k) -> (-1)^k v(k), so it is invisible to any energy test.
TEST(EnergyCheck, MSignFlipIsSpectrallyInvisible) {
  for (double sigma : {0.1, 1.0}) {
    const double good = verify_detail::extremal_coercivity_ratio(64, sigma, LinearSymbol{1.0, 1.0, 1.0}, 2.0);
    const double flipped = verify_detail::extremal_coercivity_ratio(64, sigma, LinearSymbol{1.0, 1.0, -1.0}, 2.0);
    EXPECT_NEAR(good, flipped, 1e-9 * std::abs(good));
  }
}

TEST(WeightProfile, CutoffBranches) {
  EXPECT_EQ(WeightProfile(0.5).cutoff_K, 4);
  EXPECT_EQ(WeightProfile(0.1).cutoff_K, 8);
  EXPECT_TRUE(check_weight_cutoff(VerifyOptions{}).pass());
}
