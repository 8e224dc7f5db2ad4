#ifndef MGRID_SCHEME_SCALAR_HPP_
#define MGRID_SCHEME_SCALAR_HPP_

// Predictor-corrector scheme for u_t + f(u)_x = 0 on a moving grid, in the
// compact two-stage form: a flux predictor
//   fhat_{j+1/2} = f_{j+1/2} - tau*_{j+1/2} (abar^2/J v_q)_{j+1/2}
// followed by the conservative corrector with fluxes fhat - x_t v.
// The numerical speed a_{j+1/2} is the divided flux difference, so that
// f_q = a v_q holds cell by cell.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "mgrid/core.hpp"
#include "mgrid/error.hpp"
#include "mgrid/scheme_linear.hpp"
#include "mgrid/theta.hpp"

namespace mgrid {

struct FluxFunction {
  std::function<double(double)> flux;
  std::function<double(double)> derivative;
};

inline FluxFunction burgers_flux() {
  return {[](double u) { return 0.5 * u * u; }, [](double u) { return u; }};
}

inline FluxFunction linear_flux(double a) {
  return {[a](double u) { return a * u; }, [a](double) { return a; }};
}

/// Relative threshold below which two states count as equal.
inline constexpr double kEqualStateTolerance = 1e-12;

inline double harten_speed(const FluxFunction& f, double v_left,
                           double v_right) {
  const double scale = std::max({std::abs(v_left), std::abs(v_right), 1.0});
  const double dv = v_right - v_left;
  if (std::abs(dv) > kEqualStateTolerance * scale) {
    return (f.flux(v_right) - f.flux(v_left)) / dv;
  }
  return f.derivative(v_left);
}

inline ScalarStep step_scalar_moving(std::span<const double> v,
                                     const GridMetrics& metrics,
                                     const FluxFunction& f,
                                     const ThetaStrategy& strategy,
                                     const BoundaryValues& boundary) {
  const int n = metrics.cells();
  if (static_cast<int>(v.size()) != n + 1) {
    throw DomainError("step_scalar_moving: state must have N+1 values");
  }
  const double h = metrics.step;
  const double tau = metrics.tau;
  std::vector<double> fv(n + 1);
  for (int j = 0; j <= n; ++j) fv[j] = f.flux(v[j]);

  std::vector<double> speed(n);
  std::vector<double> grad(n);
  for (int j = 0; j < n; ++j) {
    speed[j] = harten_speed(f, v[j], v[j + 1]) - metrics.velocity_cell[j];
    grad[j] = (v[j + 1] - v[j]) / h;
  }
  CflField cfl = cfl_from_speeds(metrics, speed, tau);
  std::vector<double> theta = select_theta_cells(speed, cfl.cells, grad, strategy);
  detail::check_stability(theta, cfl.cells);

  std::vector<double> flux(n);
  for (int j = 0; j < n; ++j) {
    const double tau_star = 0.5 * tau * (1.0 + theta[j]);
    const double f_hat = 0.5 * (fv[j] + fv[j + 1]) -
                         tau_star * speed[j] * speed[j] /
                             metrics.jacobian_cell[j] * grad[j];
    flux[j] = f_hat - metrics.velocity_cell[j] * 0.5 * (v[j] + v[j + 1]);
  }
  ScalarStep out = detail::scalar_corrector(v, metrics, std::move(flux), boundary);
  out.theta = std::move(theta);
  out.max_cfl = cfl.global;
  return out;
}

inline ScalarStep step_scalar_moving(std::span<const double> v,
                                     const PhysicalGrid& grid_n,
                                     const PhysicalGrid& grid_np1, double tau,
                                     const FluxFunction& f,
                                     const ThetaStrategy& strategy,
                                     const BoundaryValues& boundary) {
  return step_scalar_moving(v, compute_metrics(grid_n, grid_np1, tau), f,
                            strategy, boundary);
}

/// Relative speeds harten_speed - x_t per cell, for time-step selection.
inline std::vector<double> scalar_relative_speeds(
    std::span<const double> v, const FluxFunction& f,
    std::span<const double> velocity_cell) {
  const std::size_t n = v.size() - 1;
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = harten_speed(f, v[j], v[j + 1]);
    if (!velocity_cell.empty()) s[j] -= velocity_cell[j];
  }
  return s;
}

// Burgers schemes on a uniform static grid contrasting conservative and
// non-conservative discretisations. End nodes are copied unchanged.

/// u_j - tau/dx * u_j (u_j - u_{j-1}): speed estimated by u_j. Not
/// conservative; shocks travel at the wrong speed.
inline std::vector<double> nonconservative_demo_step(std::span<const double> u,
                                                     double dx, double tau) {
  std::vector<double> out(u.begin(), u.end());
  for (std::size_t j = 1; j + 1 < u.size(); ++j) {
    out[j] = u[j] - tau / dx * u[j] * (u[j] - u[j - 1]);
  }
  return out;
}

/// u_j - tau/dx * (u_j + u_{j-1})/2 (u_j - u_{j-1}).
inline std::vector<double> averaged_speed_step(std::span<const double> u,
                                               double dx, double tau) {
  std::vector<double> out(u.begin(), u.end());
  for (std::size_t j = 1; j + 1 < u.size(); ++j) {
    out[j] = u[j] - tau / dx * 0.5 * (u[j] + u[j - 1]) * (u[j] - u[j - 1]);
  }
  return out;
}

/// u_j - tau/dx * (u_j^2/2 - u_{j-1}^2/2).
inline std::vector<double> conservative_upwind_step(std::span<const double> u,
                                                    double dx, double tau) {
  std::vector<double> out(u.begin(), u.end());
  for (std::size_t j = 1; j + 1 < u.size(); ++j) {
    out[j] = u[j] - tau / dx * (0.5 * u[j] * u[j] - 0.5 * u[j - 1] * u[j - 1]);
  }
  return out;
}

}  // namespace mgrid

#endif  // MGRID_SCHEME_SCALAR_HPP_
