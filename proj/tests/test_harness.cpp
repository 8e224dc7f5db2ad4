#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mgrid/harness/config.hpp"
#include "mgrid/harness/run.hpp"

using namespace mgrid;
using namespace mgrid::harness;

namespace {

const char* kFullConfig = R"(
[problem]
name = demo
kind = scalar-burgers
initial = ramp
u_left = 2
u_right = -0.5
x_left = 4
x_right = 9

[grid]
length = 20
cells = 80
mode = fixed

[monitor]
type = gradient
alpha = 3
beta = 40
sigma = 7
init_tol = 1e-9
init_max_iter = 50
init_relaxation = 0.5
init_on_cap = keep-best

[scheme]
cfl = 0.4
final_time = 2.5
theta = upwind

[output]
frames = 6
directory = some/where
)";

std::string profiles_text(const RunReport& r) {
  std::ostringstream o;
  write_profiles(o, r);
  return o.str();
}

std::string trajectory_text(const RunReport& r) {
  std::ostringstream o;
  write_trajectory(o, r);
  return o.str();
}

void expect_config_error(const std::string& text, const std::string& fragment) {
  try {
    parse_config_string(text);
    ADD_FAILURE() << "accepted: " << text;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Config, ParsesEverySection) {
  auto c = parse_config_string(kFullConfig);
  EXPECT_EQ(c.name, "demo");
  EXPECT_EQ(c.kind, ProblemKind::ScalarBurgers);
  EXPECT_EQ(c.u_left, 2.0);
  EXPECT_EQ(c.u_right, -0.5);
  EXPECT_EQ(c.x_left, 4.0);
  EXPECT_EQ(c.x_right, 9.0);
  EXPECT_EQ(c.length, 20.0);
  EXPECT_EQ(c.cells, 80);
  EXPECT_EQ(c.mode, GridMode::Fixed);
  ASSERT_TRUE(std::holds_alternative<GradientMonitor>(c.monitor.kind));
  EXPECT_EQ(std::get<GradientMonitor>(c.monitor.kind).alpha, 3.0);
  EXPECT_EQ(c.motion.beta, 40.0);
  EXPECT_EQ(c.motion.sigma, 7.0);
  EXPECT_EQ(c.motion.init_tol, 1e-9);
  EXPECT_EQ(c.motion.init_max_iter, 50);
  EXPECT_EQ(c.motion.init_relaxation, 0.5);
  EXPECT_EQ(c.motion.init_on_cap, InitCapPolicy::KeepBest);
  EXPECT_EQ(c.cfl, 0.4);
  EXPECT_EQ(c.final_time, 2.5);
  EXPECT_EQ(c.theta, ThetaKind::Upwind);
  EXPECT_EQ(c.frames, 6);
  EXPECT_EQ(c.output_dir, "some/where");
}

TEST(Config, IniRoundTrip) {
  for (const auto& [name, make] : presets()) {
    const ExperimentConfig c = make();
    const ExperimentConfig d = parse_config_string(to_ini(c));
    EXPECT_EQ(to_ini(c), to_ini(d)) << name;
  }
}

TEST(Config, UnknownKeysAndSections) {
  expect_config_error("[grid]\ncells = 10\nspacing = 2\n", "unknown key 'spacing'");
  expect_config_error("[solver]\ncfl = 0.5\n", "unknown section [solver]");
  expect_config_error("cells = 10\n", "outside any section");
}

TEST(Config, RejectsBadValues) {
  expect_config_error("[scheme]\ncfl = 1.5\n", "cfl");
  expect_config_error("[scheme]\ncfl = 0\n", "cfl");
  expect_config_error("[grid]\nlength = -3\n", "length");
  expect_config_error("[grid]\ncells = 12.5\n", "integer");
  expect_config_error("[grid]\ncells = 1\n", "cells");
  expect_config_error("[scheme]\nfinal_time = soon\n", "number");
  expect_config_error("[grid]\nmode = wobbly\n", "grid.mode");
  expect_config_error("[monitor]\nalpha = -1\n", "monitor");
  expect_config_error("[monitor]\ntype = combined\nalpha = 1\n", "alpha0");
  expect_config_error("[problem]\nkind = swe\ninitial = step\n", "swe supports");
  expect_config_error("[problem]\nkind = scalar-burgers\ninitial = ramp\nu_left = -1\n",
                      "u_left");
  expect_config_error("[output]\nframes = 1\n", "frames");
}

TEST(Config, LoadConfigAcceptsPresetOrFile) {
  EXPECT_EQ(load_config("table3b").name, "table3b");
  const auto path = std::filesystem::temp_directory_path() / "mgrid_test_config.ini";
  {
    std::ofstream o(path);
    o << kFullConfig;
  }
  EXPECT_EQ(load_config(path.string()).name, "demo");
  std::filesystem::remove(path);
  EXPECT_THROW(load_config("/no/such/file.ini"), ConfigError);
}

TEST(Presets, TableParameters) {
  auto t1 = preset_table1();
  EXPECT_EQ(t1.length, 30.0);
  EXPECT_EQ(t1.cells, 150);
  EXPECT_EQ(t1.cfl, 0.8);
  EXPECT_EQ(t1.final_time, 10.0);
  EXPECT_EQ(t1.step_position, 10.0);
  EXPECT_EQ(std::get<GradientMonitor>(t1.monitor.kind).alpha, 10.0);
  EXPECT_EQ(t1.motion.beta, 150.0);
  EXPECT_EQ(t1.motion.sigma, 100.0);

  auto t2 = preset_table2();
  EXPECT_EQ(t2.length, 5.0);
  EXPECT_EQ(t2.final_time, 3.0);
  EXPECT_EQ(t2.gaussian_center, 1.0);
  EXPECT_EQ(std::get<AmplitudeMonitor>(t2.monitor.kind).alpha, 20.0);
  EXPECT_EQ(t2.motion.beta, 20.0);
  EXPECT_EQ(t2.motion.sigma, 10.0);

  auto t3 = preset_table3();
  EXPECT_EQ(t3.cells, 60);
  EXPECT_EQ(t3.cfl, 0.2);
  EXPECT_EQ(std::get<GradientMonitor>(t3.monitor.kind).alpha, 15.0);
  EXPECT_EQ(t3.motion.beta, 80.0);
  EXPECT_EQ(t3.motion.sigma, 60.0);
  auto t3b = preset_table3b();
  EXPECT_EQ(t3b.u_right, 0.0);
  EXPECT_EQ(t3b.final_time, 20.0);

  auto t4 = preset_table4();
  EXPECT_EQ(t4.length, 40.0);
  EXPECT_EQ(t4.cells, 100);
  EXPECT_EQ(t4.cfl, 0.95);
  EXPECT_EQ(t4.amplitude, 0.2);
  EXPECT_EQ(t4.crest, 30.0);
  EXPECT_EQ(t4.wavelength, 10.0);
  const auto& m = std::get<CombinedMonitor>(t4.monitor.kind);
  EXPECT_EQ(m.alpha0, 10.0);
  EXPECT_EQ(m.alpha1, 10.0);
  EXPECT_EQ(t4.monitor.target, MonitorTarget::FreeSurface);
  EXPECT_EQ(t4.motion.beta, 5.0);
  EXPECT_EQ(t4.motion.sigma, 5.0);
  EXPECT_FALSE(t4.wall);
}

TEST(Run, FramesAndTrajectoryInvariants) {
  auto c = preset_table3();
  RunReport r = run(c);
  ASSERT_EQ(r.frames.size(), 11u);
  for (int k = 0; k < 11; ++k) EXPECT_DOUBLE_EQ(r.frames[k].t, k * 1.0);
  EXPECT_EQ(r.frames.back().t, 10.0);
  ASSERT_EQ(r.trajectory_t.size(), static_cast<std::size_t>(r.steps) + 1);
  for (std::size_t k = 0; k < r.trajectory_t.size(); ++k) {
    if (k > 0) {
      ASSERT_GT(r.trajectory_t[k], r.trajectory_t[k - 1]);
    }
    const auto& x = r.trajectory_x[k];
    ASSERT_EQ(x.size(), 61u);
    EXPECT_EQ(x.front(), 0.0);
    EXPECT_EQ(x.back(), 30.0);
    EXPECT_NO_THROW(PhysicalGrid(x, 30.0)) << "row " << k;
  }
  EXPECT_TRUE(r.init_converged);
}

TEST(Run, Deterministic) {
  for (const char* name : {"table2", "table4"}) {
    auto c = load_config(name);
    RunReport a = run(c);
    RunReport b = run(c);
    EXPECT_EQ(profiles_text(a), profiles_text(b)) << name;
    EXPECT_EQ(trajectory_text(a), trajectory_text(b)) << name;
    EXPECT_EQ(summary_json(a, false).dump(), summary_json(b, false).dump()) << name;
  }
}

TEST(Run, LedgerMatchesBoundaryFluxes) {
  for (const auto& [name, make] : presets()) {
    for (GridMode mode : {GridMode::Fixed, GridMode::Moving}) {
      auto c = make();
      c.mode = mode;
      RunReport r = run(c);
      EXPECT_LE(r.max_mass_drift, 1e-10) << name << " " << mode_name(mode);
      EXPECT_LE(r.max_gcl, 1e-12) << name << " " << mode_name(mode);
      if (r.momentum_tracked) {
        EXPECT_LE(r.max_momentum_drift, 1e-10) << name << " " << mode_name(mode);
      }
      ASSERT_EQ(r.ledger.size(), static_cast<std::size_t>(r.steps) + 1);
    }
  }
}

TEST(Run, ClosedSweChannelKeepsMass) {
  auto c = preset_table4();
  c.wall = true;
  c.final_time = 2.0;
  RunReport r = run(c);
  EXPECT_LE(r.max_mass_drift, 1e-12);
  EXPECT_NEAR(r.ledger.back().mass, r.ledger.front().mass, 1e-12 * r.ledger.front().mass);
  EXPECT_FALSE(r.momentum_tracked);
}

TEST(Run, UnitCflLaxWendroffIsExactShift) {
  for (int n : {50, 100, 200}) {
    auto c = preset_table2();
    c.mode = GridMode::Fixed;
    c.cells = n;
    c.cfl = 1.0;
    c.theta = ThetaKind::LaxWendroff;
    c.frames = 2;
    RunReport r = run(c);
    EXPECT_LE(r.error.linf, 1e-12) << "N = " << n;
  }
}

TEST(Compare, ZeroAmplitudeModesAgree) {
  auto c = preset_table4();
  c.amplitude = 0.0;
  c.final_time = 1.0;
  Comparison cmp = compare(c);
  const auto& f = cmp.fixed.final_frame();
  const auto& m = cmp.moving.final_frame();
  ASSERT_EQ(f.x.size(), m.x.size());
  for (std::size_t j = 0; j < f.x.size(); ++j) {
    EXPECT_NEAR(f.x[j], m.x[j], 1e-12 * c.length);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
      EXPECT_NEAR(f.values[k][j], m.values[k][j], 1e-12);
    }
  }
  EXPECT_LE(cmp.moving.error.linf, 1e-12);
}

TEST(Compare, TableOneMovingGridReducesL1) {
  Comparison cmp = compare(preset_table1());
  EXPECT_LT(cmp.moving.error.l1, cmp.fixed.error.l1);
  EXPECT_LT(cmp.l1_ratio, 1.0);
  EXPECT_FALSE(cmp.moving.init_converged);
  // Front at x = 20: the half-value crossing of the final profile.
  const Frame& f = cmp.moving.final_frame();
  const auto& u = f.values[0];
  std::size_t j = 0;
  while (j + 1 < u.size() && u[j + 1] >= 0.5) ++j;
  const double front = f.x[j] + (f.x[j + 1] - f.x[j]) * (u[j] - 0.5) / (u[j] - u[j + 1]);
  EXPECT_NEAR(front, 20.0, 0.05);
}

TEST(Run, TableThreeFixedTransitionWidth) {
  auto c = preset_table3();
  c.mode = GridMode::Fixed;
  RunReport r = run(c);
  auto u = r.final_values();
  int last_high = -1, first_low = -1;
  for (int j = 0; j < static_cast<int>(u.size()); ++j) {
    if (u[j] >= 0.9) last_high = j;
    if (first_low < 0 && u[j] <= -0.9) first_low = j;
  }
  ASSERT_GE(last_high, 0);
  ASSERT_GT(first_low, last_high);
  EXPECT_LE(first_low - last_high, 3);
}

TEST(Run, TableTwoMovingPeakBeatsFixed) {
  Comparison cmp = compare(preset_table2());
  auto peak = [](const RunReport& r) {
    auto u = r.final_values();
    return *std::max_element(u.begin(), u.end());
  };
  EXPECT_GT(peak(cmp.moving), peak(cmp.fixed));
  EXPECT_GT(peak(cmp.moving), 0.99);
}

TEST(Convergence, OrdersAreLogRatios) {
  auto c = preset_table2();
  c.mode = GridMode::Fixed;
  c.cells = 50;
  c.frames = 2;
  auto table = convergence(c, 3);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[1].cells, 100);
  EXPECT_EQ(table[2].cells, 200);
  EXPECT_TRUE(std::isnan(table[0].order_l1));
  for (int k = 1; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(table[k].order_l1, std::log2(table[k - 1].error.l1 / table[k].error.l1));
    EXPECT_GT(table[k].order_l1, 0.5);
  }
  EXPECT_THROW(convergence(c, 1), ConfigError);
}

TEST(Errors, ContextKeepsExceptionType) {
  try {
    try {
      throw CflError("cell 4");
    } catch (const Error&) {
      mgrid::harness::detail::rethrow_with_context(7, 1.25);
    }
  } catch (const CflError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("step 7"), std::string::npos);
    EXPECT_NE(what.find("t = 1.25"), std::string::npos);
    EXPECT_NE(what.find("cell 4"), std::string::npos);
    return;
  }
  FAIL();
}

TEST(Errors, DryStateSurfacesWithStep) {
  // Deep trough drained by a strong outflow dries out within a few steps.
  auto c = preset_table4();
  c.amplitude = -0.999;
  c.mode = GridMode::Fixed;
  try {
    run(c);
    FAIL() << "expected a dry state";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step "), std::string::npos) << e.what();
  }
}

TEST(Output, WritesFilesWithHeaders) {
  auto c = preset_table3();
  c.final_time = 1.0;
  c.frames = 3;
  RunReport r = run(c);
  const auto dir = std::filesystem::temp_directory_path() / "mgrid_test_output";
  std::filesystem::remove_all(dir);
  write_outputs(r, dir);
  std::ifstream p(dir / "profiles.csv"), t(dir / "trajectory.csv"), s(dir / "summary.json");
  std::string line;
  std::getline(p, line);
  EXPECT_EQ(line, "t,j,x,u");
  std::getline(t, line);
  EXPECT_EQ(line.rfind("t,x_0,x_1,", 0), 0u);
  EXPECT_NE(line.find(",x_60"), std::string::npos);
  auto j = nlohmann::json::parse(s);
  EXPECT_EQ(j["steps"], r.steps);
  EXPECT_EQ(j["name"], "table3");
  EXPECT_TRUE(j.contains("wall_seconds"));
  EXPECT_EQ(j["frame_errors"].size(), 3u);
  std::filesystem::remove_all(dir);
}

TEST(Output, SweProfilesCarryThreeColumns) {
  auto c = preset_table4();
  c.final_time = 0.5;
  c.frames = 2;
  RunReport r = run(c);
  std::istringstream in(profiles_text(r));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,j,x,H,u,eta");
  ASSERT_TRUE(r.velocity_error.has_value());
}
