#ifndef MGRID_CORE_HPP_
#define MGRID_CORE_HPP_

// Geometric substrate shared by every scheme: the uniform reference grid
// q_j = j/N, the physical grid x_j = x(q_j, t), the metric quantities of the
// map (Jacobians and node velocities), and a few small numeric utilities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mgrid/error.hpp"

namespace mgrid {

/// Cells whose width falls to this fraction of the domain length count as
/// collapsed.
inline constexpr double kCollapseFraction = 1e-14;

class ReferenceGrid {
 public:
  explicit ReferenceGrid(int cells) : cells_(cells) {
    if (cells < 2) {
      throw DomainError("reference grid needs at least 2 cells, got " +
                        std::to_string(cells));
    }
    step_ = 1.0 / cells;
  }

  int cells() const { return cells_; }
  double step() const { return step_; }
  double node(int j) const { return j * step_; }

 private:
  int cells_;
  double step_;
};

/// Node positions x_0 = 0 < x_1 < ... < x_N = length.
class PhysicalGrid {
 public:
  PhysicalGrid(std::vector<double> nodes, double length)
      : x_(std::move(nodes)), length_(length) {
    validate();
  }

  static PhysicalGrid uniform(int cells, double length) {
    if (cells < 2) {
      throw DomainError("grid needs at least 2 cells, got " +
                        std::to_string(cells));
    }
    std::vector<double> x(static_cast<std::size_t>(cells) + 1);
    for (int j = 0; j <= cells; ++j) x[j] = length * j / cells;
    x[cells] = length;
    return PhysicalGrid(std::move(x), length);
  }

  int cells() const { return static_cast<int>(x_.size()) - 1; }
  double length() const { return length_; }
  double step() const { return 1.0 / cells(); }
  std::span<const double> nodes() const { return x_; }
  double operator[](int j) const { return x_[j]; }
  double width(int j) const { return x_[j + 1] - x_[j]; }

  double min_width() const {
    double w = std::numeric_limits<double>::infinity();
    for (int j = 0; j < cells(); ++j) w = std::min(w, width(j));
    return w;
  }

  /// Index of the cell [x_j, x_{j+1}) containing x, clamped to the domain.
  int locate(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    int j = static_cast<int>(it - x_.begin()) - 1;
    return std::clamp(j, 0, cells() - 1);
  }

  friend bool operator==(const PhysicalGrid&, const PhysicalGrid&) = default;

 private:
  void validate() const {
    if (x_.size() < 3) {
      throw DomainError("grid needs at least 2 cells");
    }
    if (!(length_ > 0.0) || !std::isfinite(length_)) {
      throw DomainError("domain length must be positive and finite");
    }
    if (x_.front() != 0.0 || x_.back() != length_) {
      throw DomainError("grid end nodes must be pinned at 0 and length");
    }
    const double min_dx = kCollapseFraction * length_;
    for (std::size_t j = 0; j + 1 < x_.size(); ++j) {
      double dx = x_[j + 1] - x_[j];
      if (!(dx > min_dx)) {
        throw DomainError("grid not strictly increasing: cell " +
                          std::to_string(j) + " has width " +
                          std::to_string(dx));
      }
    }
  }

  std::vector<double> x_;
  double length_;
};

/// Metric data of the map between two time layers.
///
/// Cell arrays have N entries (index j is cell j+1/2), node arrays N+1.
/// Boundary node Jacobians take the value of the single adjacent cell.
struct GridMetrics {
  double step = 0.0;  // h = 1/N
  double tau = 0.0;
  std::vector<double> jacobian_cell;      // J^n_{j+1/2}
  std::vector<double> jacobian_node;      // J^n_j
  std::vector<double> jacobian_cell_new;  // J^{n+1}_{j+1/2}
  std::vector<double> jacobian_node_new;  // J^{n+1}_j
  std::vector<double> velocity_node;      // x_{t,j}
  std::vector<double> velocity_cell;      // x_{t,j+1/2}

  int cells() const { return static_cast<int>(jacobian_cell.size()); }
};

namespace detail {

inline std::vector<double> cell_jacobians(const PhysicalGrid& grid) {
  const int n = grid.cells();
  const double h = grid.step();
  std::vector<double> jac(n);
  for (int j = 0; j < n; ++j) jac[j] = grid.width(j) / h;
  return jac;
}

inline std::vector<double> node_average(std::span<const double> cell) {
  const std::size_t n = cell.size();
  std::vector<double> node(n + 1);
  node[0] = cell[0];
  node[n] = cell[n - 1];
  for (std::size_t j = 1; j < n; ++j) node[j] = 0.5 * (cell[j - 1] + cell[j]);
  return node;
}

}  // namespace detail

inline GridMetrics compute_metrics(const PhysicalGrid& grid_old,
                                   const PhysicalGrid& grid_new, double tau) {
  if (grid_old.cells() != grid_new.cells() ||
      grid_old.length() != grid_new.length()) {
    throw DomainError("grids at consecutive layers must share N and length");
  }
  if (!(tau > 0.0)) throw DomainError("time step must be positive");

  const int n = grid_old.cells();
  GridMetrics m;
  m.step = grid_old.step();
  m.tau = tau;
  m.jacobian_cell = detail::cell_jacobians(grid_old);
  m.jacobian_node = detail::node_average(m.jacobian_cell);
  m.jacobian_cell_new = detail::cell_jacobians(grid_new);
  m.jacobian_node_new = detail::node_average(m.jacobian_cell_new);
  m.velocity_node.resize(n + 1);
  for (int j = 0; j <= n; ++j) {
    m.velocity_node[j] = (grid_new[j] - grid_old[j]) / tau;
  }
  m.velocity_cell.resize(n);
  for (int j = 0; j < n; ++j) {
    m.velocity_cell[j] = 0.5 * (m.velocity_node[j] + m.velocity_node[j + 1]);
  }
  return m;
}

/// Static-grid metrics (x_t = 0); used wherever the grid does not move.
inline GridMetrics static_metrics(const PhysicalGrid& grid, double tau) {
  return compute_metrics(grid, grid, tau);
}

struct GclResidual {
  double node = 0.0;  // max over interior nodes
  double cell = 0.0;  // max over cells
};

/// Residuals of the discrete geometric conservation law
///   (J^{n+1}_j - J^n_j)/tau = (x_{t,j+1/2} - x_{t,j-1/2})/h,
///   (J^{n+1}_{j+1/2} - J^n_{j+1/2})/tau = (x_{t,j+1} - x_{t,j})/h.
inline GclResidual check_gcl(const GridMetrics& metrics,
                             std::span<const double> jac_cell_old,
                             std::span<const double> jac_cell_new,
                             std::span<const double> jac_node_old,
                             std::span<const double> jac_node_new) {
  const int n = metrics.cells();
  if (static_cast<int>(jac_cell_old.size()) != n ||
      static_cast<int>(jac_cell_new.size()) != n ||
      static_cast<int>(jac_node_old.size()) != n + 1 ||
      static_cast<int>(jac_node_new.size()) != n + 1) {
    throw DomainError("check_gcl: inconsistent array sizes");
  }
  const double tau = metrics.tau;
  const double h = metrics.step;
  GclResidual r;
  for (int j = 1; j < n; ++j) {
    double lhs = (jac_node_new[j] - jac_node_old[j]) / tau;
    double rhs = (metrics.velocity_cell[j] - metrics.velocity_cell[j - 1]) / h;
    r.node = std::max(r.node, std::abs(lhs - rhs));
  }
  for (int j = 0; j < n; ++j) {
    double lhs = (jac_cell_new[j] - jac_cell_old[j]) / tau;
    double rhs = (metrics.velocity_node[j + 1] - metrics.velocity_node[j]) / h;
    r.cell = std::max(r.cell, std::abs(lhs - rhs));
  }
  return r;
}

inline GclResidual check_gcl(const GridMetrics& m) {
  return check_gcl(m, m.jacobian_cell, m.jacobian_cell_new, m.jacobian_node,
                   m.jacobian_node_new);
}

/// Thomas algorithm. `lower` and `upper` hold the n-1 off-diagonal entries:
/// row i reads lower[i-1]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i].
inline std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0) throw DomainError("solve_tridiagonal: empty system");
  if (rhs.size() != n || lower.size() + 1 != n || upper.size() + 1 != n) {
    throw DomainError("solve_tridiagonal: inconsistent sizes");
  }
  std::vector<double> c(n, 0.0);
  std::vector<double> x(n);
  double pivot = diag[0];
  if (pivot == 0.0) throw NumericError("solve_tridiagonal: zero pivot at row 0");
  x[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    c[i - 1] = upper[i - 1] / pivot;
    pivot = diag[i] - lower[i - 1] * c[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw NumericError("solve_tridiagonal: zero pivot at row " +
                         std::to_string(i));
    }
    x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

struct ErrorNorms {
  double l1 = 0.0;
  double linf = 0.0;
};

inline ErrorNorms error_norms(std::span<const double> numeric,
                              std::span<const double> exact,
                              std::span<const double> weights) {
  if (numeric.size() != exact.size() || numeric.size() != weights.size()) {
    throw DomainError("error_norms: length mismatch");
  }
  ErrorNorms e;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    double d = std::abs(numeric[i] - exact[i]);
    e.l1 += d * weights[i];
    e.linf = std::max(e.linf, d);
  }
  return e;
}

/// Dual-cell widths of the nodes: (x_{j+1} - x_{j-1})/2, half cells at ends.
inline std::vector<double> node_weights(const PhysicalGrid& grid) {
  const int n = grid.cells();
  std::vector<double> w(n + 1);
  w[0] = 0.5 * grid.width(0);
  w[n] = 0.5 * grid.width(n - 1);
  for (int j = 1; j < n; ++j) w[j] = 0.5 * (grid[j + 1] - grid[j - 1]);
  return w;
}

/// h * sum_j J_j v_j over interior nodes; with `include_ends` the end nodes
/// enter with weight 1/2.
inline double weighted_total(std::span<const double> jacobian_node,
                             std::span<const double> values, double step,
                             bool include_ends) {
  const std::size_t n = values.size() - 1;
  double sum = 0.0;
  for (std::size_t j = 1; j < n; ++j) sum += jacobian_node[j] * values[j];
  if (include_ends) {
    sum += 0.5 * (jacobian_node[0] * values[0] + jacobian_node[n] * values[n]);
  }
  return step * sum;
}

inline double total_variation(std::span<const double> v) {
  double tv = 0.0;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) tv += std::abs(v[j + 1] - v[j]);
  return tv;
}

}  // namespace mgrid

#endif  // MGRID_CORE_HPP_
