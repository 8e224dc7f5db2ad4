#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mgrid/core.hpp"
#include "mgrid/exact.hpp"
#include "mgrid/mesh.hpp"

using namespace mgrid;

TEST(Monitor, ConstantField) {
  auto g = PhysicalGrid::uniform(5, 1.0);
  std::vector<double> u(6, 0.4);
  for (double w : evaluate_monitor(u, g, {GradientMonitor{10.0}})) EXPECT_EQ(w, 1.0);
  for (double w : evaluate_monitor(u, g, {AmplitudeMonitor{5.0}})) EXPECT_DOUBLE_EQ(w, 3.0);
}

TEST(Monitor, GradientHandValue) {
  PhysicalGrid g({0.0, 0.2, 1.0}, 1.0);
  std::vector<double> u{0.0, 1.0, 1.0};
  auto w = evaluate_monitor(u, g, {GradientMonitor{10.0}});
  EXPECT_DOUBLE_EQ(w[0], 51.0);
  EXPECT_DOUBLE_EQ(w[1], 1.0);
}

TEST(Monitor, CombinedFlatElevation) {
  auto g = PhysicalGrid::uniform(4, 40.0);
  std::vector<double> eta(5, 0.2);
  for (double w : evaluate_monitor(eta, g, {CombinedMonitor{10.0, 10.0}})) {
    EXPECT_DOUBLE_EQ(w, 3.0);
  }
}

TEST(Monitor, AmplitudeUsesNodeMean) {
  auto g = PhysicalGrid::uniform(2, 1.0);
  std::vector<double> u{1.0, -1.0, 3.0};
  auto w = evaluate_monitor(u, g, {AmplitudeMonitor{2.0}});
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 3.0);
}

TEST(Monitor, RejectsNegativeWeightsAndBadSizes) {
  auto g = PhysicalGrid::uniform(2, 1.0);
  std::vector<double> u{0, 0, 0};
  EXPECT_THROW(evaluate_monitor(u, g, {GradientMonitor{-1.0}}), DomainError);
  EXPECT_THROW(evaluate_monitor(std::vector<double>{0, 0}, g, {GradientMonitor{1.0}}),
               DomainError);
}

TEST(Monitor, AlwaysAtLeastOne) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  auto g = PhysicalGrid::uniform(20, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> f(21);
    for (auto& v : f) v = u(rng);
    for (const MonitorSpec& s :
         {MonitorSpec{GradientMonitor{3.0}}, MonitorSpec{AmplitudeMonitor{2.0}},
          MonitorSpec{CombinedMonitor{1.0, 4.0}}}) {
      for (double w : evaluate_monitor(f, g, s)) ASSERT_GE(w, 1.0);
    }
  }
}

TEST(Smoothing, ZeroSigmaAndConstants) {
  std::vector<double> w{1, 4, 2, 8, 3};
  EXPECT_EQ(smooth_monitor(w, 0.0), w);
  std::vector<double> c(9, 2.5);
  for (double v : smooth_monitor(c, 37.0)) EXPECT_NEAR(v, 2.5, 1e-14);
}

TEST(Smoothing, HandOracle) {
  auto s = smooth_monitor(std::vector<double>{1, 1, 5, 1, 1}, 1.0);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_NEAR(s[1], 11.0 / 7.0, 1e-15);
  EXPECT_NEAR(s[2], 23.0 / 7.0, 1e-15);
  EXPECT_NEAR(s[3], 11.0 / 7.0, 1e-15);
  EXPECT_EQ(s[4], 1.0);
}

TEST(Smoothing, TotalVariationDoesNotGrow) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(1.0, 20.0);
  std::uniform_real_distribution<double> sig(0.0, 100.0);
  std::uniform_int_distribution<int> n_dist(3, 60);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> w(n_dist(rng));
    for (auto& v : w) v = u(rng);
    auto s = smooth_monitor(w, sig(rng));
    ASSERT_LE(total_variation(s), total_variation(w) * (1.0 + 1e-12));
    for (double v : s) ASSERT_GE(v, 1.0 - 1e-12);
  }
}

TEST(InitialGrid, ConstantMonitorGivesUniformGrid) {
  auto r = build_initial_grid([](double) { return 0.3; }, {GradientMonitor{10.0}},
                              {}, 10, 2.0);
  EXPECT_LE(r.iterations, 2);
  for (int j = 0; j <= 10; ++j) EXPECT_NEAR(r.grid[j], 0.2 * j, 1e-14);
}

TEST(InitialGrid, FrozenStepMonitor) {
  // w(x) = 1 on [0,2), 3 on [2,4], cell value = exact cell average.
  auto monitor = [](const PhysicalGrid& g) {
    auto integral = [](double x) { return x < 2.0 ? x : 2.0 + 3.0 * (x - 2.0); };
    std::vector<double> w(g.cells());
    for (int j = 0; j < g.cells(); ++j) {
      w[j] = (integral(g[j + 1]) - integral(g[j])) / g.width(j);
    }
    return w;
  };
  auto r = build_initial_grid(monitor, {}, 2, 4.0);
  EXPECT_NEAR(r.grid[1], 8.0 / 3.0, 1e-9);
  EXPECT_LE(r.residual, 1e-9);
}

TEST(InitialGrid, TableOneHasNoDiscreteFixedPoint) {
  // Node-sampled step data: the jump cell can never contain x* at a fixed
  // point, so the plain iteration cycles and hits the cap.
  GridMotionParams p;
  p.sigma = 100.0;
  EXPECT_THROW(build_initial_grid(step_ic(10.0), {GradientMonitor{10.0}}, p, 150, 30.0),
               NumericError);
}

TEST(InitialGrid, TableOneClustersAtStep) {
  GridMotionParams p;
  p.sigma = 100.0;
  p.init_relaxation = 0.1;
  p.init_on_cap = InitCapPolicy::KeepBest;
  auto r = build_initial_grid(step_ic(10.0), {GradientMonitor{10.0}}, p, 150, 30.0);
  EXPECT_FALSE(r.converged);
  const auto& g = r.grid;
  EXPECT_LT(g.min_width(), 30.0 / 150);
  int argmin = 0;
  for (int j = 0; j < g.cells(); ++j) {
    if (g.width(j) < g.width(argmin)) argmin = j;
  }
  EXPECT_TRUE(g[argmin] <= 10.0 && 10.0 < g[argmin + 1])
      << "smallest cell [" << g[argmin] << ", " << g[argmin + 1] << "]";
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[150], 30.0);
  for (int j = 0; j < 150; ++j) ASSERT_GT(g[j + 1], g[j]);
}

TEST(InitialGrid, SmoothDataEquidistributes) {
  GridMotionParams p;
  auto r = build_initial_grid(gaussian_ic(1.0), {AmplitudeMonitor{20.0}}, p, 150, 5.0);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual, 10 * p.init_tol);
  EXPECT_LE(r.displacement, p.init_tol * 5.0);
}

TEST(InitialGrid, RejectsBadRelaxation) {
  GridMotionParams p;
  p.init_relaxation = 0.0;
  EXPECT_THROW(build_initial_grid(gaussian_ic(1.0), {AmplitudeMonitor{20.0}}, p, 50, 5.0),
               DomainError);
}

TEST(InitialGrid, IterationCap) {
  GridMotionParams p;
  p.init_max_iter = 1;
  EXPECT_THROW(build_initial_grid(gaussian_ic(1.0), {AmplitudeMonitor{20.0}}, p, 50, 5.0),
               NumericError);
}

TEST(Equidistribution, Examples) {
  auto g = PhysicalGrid::uniform(6, 3.0);
  auto r = equidistribution_residual(g, std::vector<double>(6, 1.0));
  EXPECT_NEAR(r.relative, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.integral, 3.0);

  PhysicalGrid s({0.0, 8.0 / 3.0, 4.0}, 4.0);
  auto r2 = equidistribution_residual(s, std::vector<double>{1.5, 3.0});
  EXPECT_NEAR(r2.relative, 0.0, 1e-15);
}

TEST(AdvanceGrid, UniformSteadyState) {
  auto g = PhysicalGrid::uniform(12, 5.0);
  auto n = advance_grid(g, std::vector<double>(12, 4.0), 2.0, 0.1);
  for (int j = 0; j <= 12; ++j) EXPECT_NEAR(n[j], g[j], 1e-14);
}

TEST(AdvanceGrid, LargeBetaFreezes) {
  auto g = PhysicalGrid::uniform(10, 1.0);
  std::vector<double> w{1, 1, 1, 50, 50, 50, 1, 1, 1, 1};
  auto n = advance_grid(g, w, 1e12, 0.1);
  for (int j = 0; j <= 10; ++j) EXPECT_LE(std::abs(n[j] - g[j]), 1e-6);
}

TEST(AdvanceGrid, HandOracle) {
  auto g = PhysicalGrid::uniform(4, 1.0);
  auto n = advance_grid(g, std::vector<double>{1, 1, 3, 3}, 1.0, 1.0);
  EXPECT_NEAR(n[1], 156865.0 / 428804.0, 1e-14);
  EXPECT_NEAR(n[2], 158417.0 / 214402.0, 1e-14);
  EXPECT_NEAR(n[3], 372291.0 / 428804.0, 1e-14);
}

TEST(AdvanceGrid, RelaxesTowardUniform) {
  PhysicalGrid g({0.0, 0.05, 0.1, 0.3, 0.9, 1.0}, 1.0);
  std::vector<double> w(5, 1.0);
  auto dev = [](const PhysicalGrid& x) {
    double d = 0.0;
    for (int j = 0; j <= x.cells(); ++j) d = std::max(d, std::abs(x[j] - 0.2 * j));
    return d;
  };
  double prev = dev(g);
  for (int k = 0; k < 20; ++k) {
    g = advance_grid(g, w, 1.0, 0.05);
    double d = dev(g);
    ASSERT_LT(d, prev);
    prev = d;
  }
}

TEST(AdvanceGrid, MonitorScalingEqualsBetaScaling) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  auto g = PhysicalGrid::uniform(16, 2.0);
  std::vector<double> w(16), cw(16);
  const double c = 4.0;  // power of two keeps the comparison exact
  for (int j = 0; j < 16; ++j) {
    w[j] = u(rng);
    cw[j] = c * w[j];
  }
  auto a = advance_grid(g, cw, 3.0, 0.01);
  auto b = advance_grid(g, w, 3.0 / c, 0.01);
  for (int j = 0; j <= 16; ++j) EXPECT_NEAR(a[j], b[j], 1e-14);
}
