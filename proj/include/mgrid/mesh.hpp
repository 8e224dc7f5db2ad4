#ifndef MGRID_MESH_HPP_
#define MGRID_MESH_HPP_

// Adaptive grid construction and motion driven by a monitor function w >= 1.
// The initial grid solves (w x_q)_q = 0 by fixed-point iteration; later
// layers solve the linear parabolic problem (w^n x_q)_q = beta x_t.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "mgrid/core.hpp"
#include "mgrid/error.hpp"

namespace mgrid {

/// w = 1 + alpha |u_x|
struct GradientMonitor {
  double alpha = 0.0;
};

/// w = 1 + alpha |u|, with the cell value of |u| taken from the node mean.
struct AmplitudeMonitor {
  double alpha = 0.0;
};

/// w = 1 + alpha0 |u| + alpha1 |u_x|
struct CombinedMonitor {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
};

/// Which field feeds the monitor. Shallow water runs always use eta.
enum class MonitorTarget { Solution, FreeSurface };

struct MonitorSpec {
  std::variant<GradientMonitor, AmplitudeMonitor, CombinedMonitor> kind;
  MonitorTarget target = MonitorTarget::Solution;
};

enum class InitCapPolicy { Throw, KeepBest };

struct GridMotionParams {
  double beta = 1.0;   // grid diffusion
  double sigma = 0.0;  // monitor smoothing
  double init_tol = 1e-10;
  int init_max_iter = 200;
  // Initial grid fixed point: x^{k+1} = x^k + relaxation * (solve(x^k) - x^k).
  double init_relaxation = 1.0;
  // KeepBest returns the lowest-residual iterate instead of throwing at the cap.
  InitCapPolicy init_on_cap = InitCapPolicy::Throw;
};

inline void validate(const MonitorSpec& spec) {
  bool ok = std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CombinedMonitor>) {
          return m.alpha0 >= 0.0 && m.alpha1 >= 0.0;
        } else {
          return m.alpha >= 0.0;
        }
      },
      spec.kind);
  if (!ok) throw DomainError("monitor weights must be non-negative");
}

inline std::vector<double> evaluate_monitor(std::span<const double> field,
                                            const PhysicalGrid& grid,
                                            const MonitorSpec& spec) {
  const int n = grid.cells();
  if (static_cast<int>(field.size()) != n + 1) {
    throw DomainError("evaluate_monitor: field must have N+1 node values");
  }
  validate(spec);
  double amp = 0.0;
  double grad = 0.0;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GradientMonitor>) {
          grad = m.alpha;
        } else if constexpr (std::is_same_v<T, AmplitudeMonitor>) {
          amp = m.alpha;
        } else {
          amp = m.alpha0;
          grad = m.alpha1;
        }
      },
      spec.kind);

  const double min_dx = kCollapseFraction * grid.length();
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) {
    const double dx = grid.width(j);
    if (!(dx > min_dx)) {
      throw DomainError("evaluate_monitor: collapsed cell " + std::to_string(j));
    }
    double value = 1.0;
    if (amp != 0.0) value += amp * std::abs(0.5 * (field[j] + field[j + 1]));
    if (grad != 0.0) value += grad * std::abs(field[j + 1] - field[j]) / dx;
    w[j] = value;
  }
  return w;
}

/// Implicit smoothing
///   (1 + sigma) wbar_i - sigma/2 (wbar_{i-1} + wbar_{i+1}) = w_i,
/// for the interior cells, first and last cell pinned to their input values.
inline std::vector<double> smooth_monitor(std::span<const double> w,
                                          double sigma) {
  std::vector<double> out(w.begin(), w.end());
  const std::size_t n = w.size();
  if (sigma < 0.0) throw DomainError("smoothing weight must be non-negative");
  if (sigma == 0.0 || n < 3) return out;

  const std::size_t m = n - 2;
  std::vector<double> lower(m - 1, -0.5 * sigma);
  std::vector<double> upper(m - 1, -0.5 * sigma);
  std::vector<double> diag(m, 1.0 + sigma);
  std::vector<double> rhs(w.begin() + 1, w.end() - 1);
  rhs.front() += 0.5 * sigma * w.front();
  rhs.back() += 0.5 * sigma * w.back();
  std::vector<double> inner = solve_tridiagonal(lower, diag, upper, rhs);
  std::copy(inner.begin(), inner.end(), out.begin() + 1);
  return out;
}

namespace detail {

// Assembles and solves
//   w_{j-1/2} x_{j-1} - (w_{j-1/2} + w_{j+1/2} + d) x_j + w_{j+1/2} x_{j+1}
//     = -d * anchor_j
// with pinned ends; d = 0 is the elliptic (equidistribution) problem.
inline std::vector<double> solve_grid_system(std::span<const double> w,
                                             double length, double d,
                                             std::span<const double> anchor) {
  const std::size_t n = w.size();
  const std::size_t m = n - 1;
  std::vector<double> lower(m - 1);
  std::vector<double> upper(m - 1);
  std::vector<double> diag(m);
  std::vector<double> rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + 1;
    diag[i] = -(w[j - 1] + w[j] + d);
    rhs[i] = d != 0.0 ? -d * anchor[j] : 0.0;
    if (i > 0) lower[i - 1] = w[j - 1];
    if (i + 1 < m) upper[i] = w[j];
  }
  rhs.back() -= w[n - 1] * length;
  std::vector<double> inner = solve_tridiagonal(lower, diag, upper, rhs);
  std::vector<double> x(n + 1);
  x[0] = 0.0;
  std::copy(inner.begin(), inner.end(), x.begin() + 1);
  x[n] = length;
  return x;
}

}  // namespace detail

struct EquidistributionResidual {
  double relative = 0.0;
  double integral = 0.0;  // C_h = sum dx * w
};

/// max_j |w_j dx_j / h - C_h| / C_h
inline EquidistributionResidual equidistribution_residual(
    const PhysicalGrid& grid, std::span<const double> w) {
  const int n = grid.cells();
  if (static_cast<int>(w.size()) != n) {
    throw DomainError("equidistribution_residual: monitor must have N values");
  }
  EquidistributionResidual r;
  for (int j = 0; j < n; ++j) r.integral += grid.width(j) * w[j];
  const double h = grid.step();
  for (int j = 0; j < n; ++j) {
    r.relative = std::max(
        r.relative, std::abs(w[j] * grid.width(j) / h - r.integral));
  }
  r.relative /= r.integral;
  return r;
}

struct InitialGrid {
  PhysicalGrid grid;
  int iterations = 0;
  double displacement = 0.0;  // last max node displacement
  double residual = 0.0;      // equidistribution residual of the result
  bool converged = true;
};

/// Fixed-point iteration for (w(x) x_q)_q = 0 from a uniform start.
/// `cell_monitor(grid)` returns the unsmoothed per-cell monitor on `grid`.
/// Stops once the displacement is below init_tol * length and the residual
/// on the returned grid is below 10 * init_tol.
template <class CellMonitor>
InitialGrid build_initial_grid(CellMonitor&& cell_monitor,
                               const GridMotionParams& params, int cells,
                               double length) {
  if (!(params.init_tol > 0.0 && params.init_tol < 1.0)) {
    throw DomainError("init_tol must lie in (0, 1)");
  }
  const double omega = params.init_relaxation;
  if (!(omega > 0.0 && omega <= 1.0)) {
    throw DomainError("init_relaxation must lie in (0, 1]");
  }
  if (params.init_max_iter < 1) throw DomainError("init_max_iter must be positive");
  PhysicalGrid grid = PhysicalGrid::uniform(cells, length);
  std::vector<double> w = smooth_monitor(cell_monitor(grid), params.sigma);
  double residual = equidistribution_residual(grid, w).relative;
  InitialGrid best{grid, 0, 0.0, residual, false};
  double displacement = 0.0;
  for (int k = 1; k <= params.init_max_iter; ++k) {
    std::vector<double> x = detail::solve_grid_system(w, length, 0.0, {});
    displacement = 0.0;
    for (int j = 1; j < cells; ++j) {
      x[j] = grid[j] + omega * (x[j] - grid[j]);
      displacement = std::max(displacement, std::abs(x[j] - grid[j]));
    }
    grid = PhysicalGrid(std::move(x), length);
    w = smooth_monitor(cell_monitor(grid), params.sigma);
    residual = equidistribution_residual(grid, w).relative;
    if (residual < best.residual) best = InitialGrid{grid, k, displacement, residual, false};
    if (displacement <= params.init_tol * length && residual <= 10.0 * params.init_tol) {
      return InitialGrid{std::move(grid), k, displacement, residual, true};
    }
  }
  if (params.init_on_cap == InitCapPolicy::KeepBest) return best;
  throw NumericError("initial grid iteration did not converge in " +
                     std::to_string(params.init_max_iter) +
                     " iterations; last displacement " + std::to_string(displacement) +
                     ", last residual " + std::to_string(residual) +
                     " (lower the relaxation, or keep the best iterate)");
}

/// Initial grid adapted to the node samples of `ic` (the monitor target).
inline InitialGrid build_initial_grid(const std::function<double(double)>& ic,
                                      const MonitorSpec& spec,
                                      const GridMotionParams& params,
                                      int cells, double length) {
  auto monitor = [&](const PhysicalGrid& g) {
    std::vector<double> u(g.cells() + 1);
    for (int j = 0; j <= g.cells(); ++j) u[j] = ic(g[j]);
    return evaluate_monitor(u, g, spec);
  };
  return build_initial_grid(monitor, params, cells, length);
}

/// One implicit step of the grid PDE with the monitor frozen at t^n.
inline PhysicalGrid advance_grid(const PhysicalGrid& grid,
                                 std::span<const double> w_smoothed,
                                 double beta, double tau) {
  if (!(tau > 0.0)) throw DomainError("advance_grid: tau must be positive");
  if (!(beta > 0.0)) throw DomainError("advance_grid: beta must be positive");
  if (static_cast<int>(w_smoothed.size()) != grid.cells()) {
    throw DomainError("advance_grid: monitor must have N values");
  }
  const double h = grid.step();
  const double d = beta * h * h / tau;
  return PhysicalGrid(
      detail::solve_grid_system(w_smoothed, grid.length(), d, grid.nodes()),
      grid.length());
}

}  // namespace mgrid

#endif  // MGRID_MESH_HPP_
