#ifndef MGRID_SCHEME_LINEAR_HPP_
#define MGRID_SCHEME_LINEAR_HPP_

// Predictor-corrector scheme for u_t + a u_x = 0 on a moving grid.
//
// In reference coordinates the predictor uses v_t + (abar/J) v_q = 0 and the
// corrector the conservative form (J v)_t + (abar v)_q = 0, abar = a - x_t:
//
//   v*_{j+1/2} = v_{j+1/2} - tau*_{j+1/2} (abar/J v_q)_{j+1/2}
//   (J v)^{n+1}_j = (J v)^n_j - tau/h [(abar v*)_{j+1/2} - (abar v*)_{j-1/2}]

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mgrid/core.hpp"
#include "mgrid/error.hpp"
#include "mgrid/theta.hpp"

namespace mgrid {

struct AdvectionProblem {
  double speed = 1.0;
  double length = 1.0;
  std::function<double(double)> initial;
};

/// Dirichlet values imposed on the end nodes after a step.
struct BoundaryValues {
  double left = 0.0;
  double right = 0.0;
};

struct CflField {
  std::vector<double> cells;
  double global = 0.0;
};

/// Result of one scalar step. The fluxes are the corrector fluxes through
/// the first and last cell, so that the interior total changes by
/// tau (flux_left - flux_right).
struct ScalarStep {
  std::vector<double> values;
  std::vector<double> theta;
  double max_cfl = 0.0;
  double flux_left = 0.0;
  double flux_right = 0.0;
};

/// C_{j+1/2} = tau/h |abar| / J for per-cell relative speeds.
inline CflField cfl_from_speeds(const GridMetrics& metrics,
                                std::span<const double> relative_speed,
                                double tau) {
  CflField c;
  c.cells.resize(relative_speed.size());
  for (std::size_t j = 0; j < relative_speed.size(); ++j) {
    c.cells[j] = tau / metrics.step * std::abs(relative_speed[j]) /
                 metrics.jacobian_cell[j];
    c.global = std::max(c.global, c.cells[j]);
  }
  return c;
}

inline CflField local_cfl(const GridMetrics& metrics, double a, double tau) {
  std::vector<double> speed(metrics.cells());
  for (int j = 0; j < metrics.cells(); ++j) {
    speed[j] = a - metrics.velocity_cell[j];
  }
  return cfl_from_speeds(metrics, speed, tau);
}

/// Largest tau with max_j tau |s_j| / dx_j = target, or tau_max if every
/// speed vanishes.
inline double choose_tau_for_speeds(const PhysicalGrid& grid,
                                    std::span<const double> speed,
                                    double target, double tau_max) {
  if (!(target > 0.0 && target <= 1.0)) {
    throw DomainError("target CFL must lie in (0, 1]");
  }
  double tau = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.cells(); ++j) {
    const double s = std::abs(speed[j]);
    if (s > 0.0) tau = std::min(tau, target * grid.width(j) / s);
  }
  return std::min(tau, tau_max);
}

/// `velocity_cell` is the previous step's cell velocity estimate; pass an
/// empty span on the first step.
inline double choose_tau(const PhysicalGrid& grid,
                         std::span<const double> velocity_cell, double a,
                         double target, double tau_max) {
  std::vector<double> speed(grid.cells(), a);
  for (std::size_t j = 0; j < velocity_cell.size(); ++j) speed[j] -= velocity_cell[j];
  return choose_tau_for_speeds(grid, speed, target, tau_max);
}

inline std::vector<double> select_theta(std::span<const double> v,
                                        const GridMetrics& metrics, double a,
                                        double tau,
                                        const ThetaStrategy& strategy) {
  const int n = metrics.cells();
  std::vector<double> speed(n);
  std::vector<double> grad(n);
  for (int j = 0; j < n; ++j) {
    speed[j] = a - metrics.velocity_cell[j];
    grad[j] = (v[j + 1] - v[j]) / metrics.step;
  }
  CflField c = cfl_from_speeds(metrics, speed, tau);
  return select_theta_cells(speed, c.cells, grad, strategy);
}

namespace detail {

inline void check_stability(std::span<const double> theta,
                            std::span<const double> cfl) {
  int worst = -1;
  double worst_value = 1.0 + 1e-12;
  for (std::size_t j = 0; j < cfl.size(); ++j) {
    if (cfl[j] == 0.0) continue;
    double bound = theta[j] >= -1.0 ? std::sqrt(1.0 + theta[j]) * cfl[j]
                                    : std::numeric_limits<double>::infinity();
    if (bound > worst_value) {
      worst = static_cast<int>(j);
      worst_value = bound;
    }
  }
  if (worst >= 0) {
    throw CflError("stability bound sqrt(1+theta)*C = " +
                   std::to_string(worst_value) + " > 1 in cell " +
                   std::to_string(worst));
  }
}

// Conservative corrector shared by the scalar schemes; `flux` holds the
// corrector fluxes per cell.
inline ScalarStep scalar_corrector(std::span<const double> v,
                                   const GridMetrics& metrics,
                                   std::vector<double> flux,
                                   const BoundaryValues& boundary) {
  const int n = metrics.cells();
  const double ratio = metrics.tau / metrics.step;
  ScalarStep out;
  out.values.resize(n + 1);
  for (int j = 1; j < n; ++j) {
    const double mass = metrics.jacobian_node[j] * v[j] -
                        ratio * (flux[j] - flux[j - 1]);
    out.values[j] = mass / metrics.jacobian_node_new[j];
  }
  out.values[0] = boundary.left;
  out.values[n] = boundary.right;
  out.flux_left = flux.front();
  out.flux_right = flux.back();
  return out;
}

}  // namespace detail

inline ScalarStep step_moving(std::span<const double> v,
                              const GridMetrics& metrics, double a,
                              const ThetaStrategy& strategy,
                              const BoundaryValues& boundary) {
  const int n = metrics.cells();
  if (static_cast<int>(v.size()) != n + 1) {
    throw DomainError("step_moving: state must have N+1 values");
  }
  const double h = metrics.step;
  const double tau = metrics.tau;
  std::vector<double> speed(n);
  std::vector<double> grad(n);
  for (int j = 0; j < n; ++j) {
    speed[j] = a - metrics.velocity_cell[j];
    grad[j] = (v[j + 1] - v[j]) / h;
  }
  CflField cfl = cfl_from_speeds(metrics, speed, tau);
  std::vector<double> theta = select_theta_cells(speed, cfl.cells, grad, strategy);
  detail::check_stability(theta, cfl.cells);

  std::vector<double> flux(n);
  for (int j = 0; j < n; ++j) {
    const double tau_star = 0.5 * tau * (1.0 + theta[j]);
    const double v_star = 0.5 * (v[j] + v[j + 1]) -
                          tau_star * speed[j] / metrics.jacobian_cell[j] * grad[j];
    flux[j] = speed[j] * v_star;
  }
  ScalarStep out = detail::scalar_corrector(v, metrics, std::move(flux), boundary);
  out.theta = std::move(theta);
  out.max_cfl = cfl.global;
  return out;
}

inline ScalarStep step_moving(std::span<const double> v,
                              const PhysicalGrid& grid_n,
                              const PhysicalGrid& grid_np1, double tau,
                              const AdvectionProblem& problem,
                              const ThetaStrategy& strategy,
                              const BoundaryValues& boundary) {
  return step_moving(v, compute_metrics(grid_n, grid_np1, tau), problem.speed,
                     strategy, boundary);
}

/// One-step canonical form on a uniform fixed grid of spacing `dx`:
///   u^{n+1}_j = u_j - tau a (u_{j+1} - u_{j-1})/(2 dx)
///             + tau^2 a^2/(2 dx) [((1+theta) u_x)_{j+1/2} - ((1+theta) u_x)_{j-1/2}]
/// End nodes are copied unchanged.
inline std::vector<double> step_fixed_canonical(std::span<const double> u,
                                                double dx, double a, double tau,
                                                std::span<const double> theta) {
  const std::size_t n = u.size() - 1;
  if (theta.size() != n) {
    throw DomainError("step_fixed_canonical: theta must have N values");
  }
  std::vector<double> out(u.begin(), u.end());
  for (std::size_t j = 1; j < n; ++j) {
    const double ux_p = (u[j + 1] - u[j]) / dx;
    const double ux_m = (u[j] - u[j - 1]) / dx;
    out[j] = u[j] - tau * a * (u[j + 1] - u[j - 1]) / (2.0 * dx) +
             tau * tau * a * a / (2.0 * dx) *
                 ((1.0 + theta[j]) * ux_p - (1.0 + theta[j - 1]) * ux_m);
  }
  return out;
}

}  // namespace mgrid

#endif  // MGRID_SCHEME_LINEAR_HPP_
