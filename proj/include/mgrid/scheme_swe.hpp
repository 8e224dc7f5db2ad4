#ifndef MGRID_SCHEME_SWE_HPP_
#define MGRID_SCHEME_SWE_HPP_

// Predictor-corrector scheme for the shallow water equations
//   (J v)_t + (f - x_t v)_q = G,  v = (H, Hu),  f = (Hu, Hu^2 + g H^2/2),
//   G = (0, g H h_q)
// on a moving grid. The cell Jacobian uses the product u_j u_{j+1} so that
// f_{j+1} - f_j = A_{j+1/2} (v_{j+1} - v_j) exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mgrid/core.hpp"
#include "mgrid/error.hpp"
#include "mgrid/scheme_linear.hpp"
#include "mgrid/theta.hpp"

namespace mgrid {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double operator[](int k) const { return k == 0 ? x : y; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
};

struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  friend Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
  }
  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a11 * n.a11 + m.a12 * n.a21, m.a11 * n.a12 + m.a12 * n.a22,
            m.a21 * n.a11 + m.a22 * n.a21, m.a21 * n.a12 + m.a22 * n.a22};
  }
  static Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
};

/// Node values of total depth H and discharge Hu.
struct SweState {
  std::vector<double> depth;
  std::vector<double> discharge;

  int cells() const { return static_cast<int>(depth.size()) - 1; }
  double velocity(int j) const { return discharge[j] / depth[j]; }
  Vec2 conservative(int j) const { return {depth[j], discharge[j]}; }
};

/// Still-water depth h(x), positive below the mean level.
struct Bathymetry {
  std::function<double(double)> depth;

  std::vector<double> sample(const PhysicalGrid& grid) const {
    std::vector<double> h(grid.cells() + 1);
    for (int j = 0; j <= grid.cells(); ++j) h[j] = depth(grid[j]);
    return h;
  }

  static Bathymetry flat(double h0) {
    return {[h0](double) { return h0; }};
  }
};

/// Builds a state from node values of eta and u over the sampled bottom.
inline SweState make_swe_state(std::span<const double> eta,
                               std::span<const double> u,
                               std::span<const double> h) {
  SweState s;
  s.depth.resize(eta.size());
  s.discharge.resize(eta.size());
  for (std::size_t j = 0; j < eta.size(); ++j) {
    s.depth[j] = eta[j] + h[j];
    s.discharge[j] = s.depth[j] * u[j];
  }
  return s;
}

inline std::vector<double> free_surface(const SweState& s,
                                        std::span<const double> h) {
  std::vector<double> eta(s.depth.size());
  for (std::size_t j = 0; j < eta.size(); ++j) eta[j] = s.depth[j] - h[j];
  return eta;
}

inline std::vector<double> velocities(const SweState& s) {
  std::vector<double> u(s.depth.size());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = s.velocity(static_cast<int>(j));
  return u;
}

struct EigenStructure {
  double c = 0.0;
  double c2 = 0.0;  // radicand, c = sqrt(c2)
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Mat2 A;
  Mat2 L;
  Mat2 R;
};

/// Depth below which a state counts as dry.
inline constexpr double kDefaultMinDepth = 1e-8;

inline EigenStructure eigen_structure(double u_left, double u_right,
                                      double depth_half, double g,
                                      double min_depth = kDefaultMinDepth) {
  if (!(depth_half >= min_depth)) {
    throw DryStateError("cell depth " + std::to_string(depth_half) +
                        " below minimum " + std::to_string(min_depth));
  }
  const double ubar = 0.5 * (u_left + u_right);
  const double cross = -u_left * u_right + g * depth_half;
  EigenStructure e;
  e.c2 = ubar * ubar + cross;
  e.c = std::sqrt(e.c2);
  e.lambda1 = ubar - e.c;
  e.lambda2 = ubar + e.c;
  e.A = {0.0, 1.0, cross, 2.0 * ubar};
  const double ic2 = 1.0 / e.c2;
  e.L = {-e.lambda2 * ic2, ic2, -e.lambda1 * ic2, ic2};
  const double hc = 0.5 * e.c;
  e.R = {-hc, hc, -e.lambda1 * hc, e.lambda2 * hc};
  return e;
}

inline Vec2 swe_flux(double depth, double discharge, double g) {
  return {discharge, discharge * discharge / depth + 0.5 * g * depth * depth};
}

enum class SweBoundary {
  Wall,      // reflective ends: mirrored ghost state, u = 0 at the end nodes
  FarField,  // end nodes held at their current values
};

struct SweParams {
  double gravity = 9.81;
  double min_depth = kDefaultMinDepth;
  SweBoundary boundary = SweBoundary::Wall;
};

/// Per-cell quantities at layer n shared by predictor, theta and diagnostics.
struct SweCell {
  EigenStructure eig;
  double jacobian = 1.0;
  double velocity = 0.0;  // x_t at the cell
  double depth = 0.0;     // H_{j+1/2}
  Vec2 v_mean;            // (v_j + v_{j+1})/2, conservative
  Vec2 v_q;               // conservative gradient
  Vec2 flux_mean;         // (f_j + f_{j+1})/2
  Vec2 source;            // (0, g H h_q)
  Vec2 indicator_base;    // p~ per family
  std::array<double, 2> speed{};  // lambda_k - x_t
  std::array<double, 2> cfl{};
};

inline void check_depth(const SweState& s, double min_depth) {
  for (std::size_t j = 0; j < s.depth.size(); ++j) {
    if (!(s.depth[j] >= min_depth)) {
      throw DryStateError("depth " + std::to_string(s.depth[j]) + " at node " +
                          std::to_string(j) + " below minimum " +
                          std::to_string(min_depth));
    }
  }
}

inline std::vector<SweCell> swe_cells(const SweState& s,
                                      const GridMetrics& metrics,
                                      std::span<const double> h,
                                      const SweParams& params) {
  const int n = metrics.cells();
  if (s.cells() != n || static_cast<int>(s.discharge.size()) != n + 1 ||
      static_cast<int>(h.size()) != n + 1) {
    throw DomainError("swe_cells: state and bathymetry must have N+1 values");
  }
  check_depth(s, params.min_depth);
  const double g = params.gravity;
  const double dq = metrics.step;
  std::vector<SweCell> cells(n);
  for (int j = 0; j < n; ++j) {
    SweCell& c = cells[j];
    const double uj = s.velocity(j);
    const double uk = s.velocity(j + 1);
    c.depth = 0.5 * (s.depth[j] + s.depth[j + 1]);
    c.eig = eigen_structure(uj, uk, c.depth, g, params.min_depth);
    c.jacobian = metrics.jacobian_cell[j];
    c.velocity = metrics.velocity_cell[j];
    c.v_mean = 0.5 * (s.conservative(j) + s.conservative(j + 1));
    c.v_q = {(s.depth[j + 1] - s.depth[j]) / dq,
             (s.discharge[j + 1] - s.discharge[j]) / dq};
    c.flux_mean = 0.5 * (swe_flux(s.depth[j], s.discharge[j], g) +
                         swe_flux(s.depth[j + 1], s.discharge[j + 1], g));
    const double h_q = (h[j + 1] - h[j]) / dq;
    c.source = {0.0, g * c.depth * h_q};

    const double eta_q = ((s.depth[j + 1] - h[j + 1]) - (s.depth[j] - h[j])) / dq;
    const double u_q = (uk - uj) / dq;
    const double cq = c.eig.c * eta_q;
    const double hu = c.depth * u_q;
    c.indicator_base = {(-cq + hu) / c.eig.c2, (cq + hu) / c.eig.c2};

    c.speed = {c.eig.lambda1 - c.velocity, c.eig.lambda2 - c.velocity};
    for (int k = 0; k < 2; ++k) {
      c.cfl[k] = metrics.tau / dq * std::abs(c.speed[k]) / c.jacobian;
    }
  }
  return cells;
}

using SweTheta = std::array<std::vector<double>, 2>;

/// Theta per characteristic family; throws CflError naming (k, j) when
/// sqrt(1+theta) C exceeds 1.
inline SweTheta select_theta_swe(std::span<const SweCell> cells,
                                 const ThetaStrategy& strategy) {
  const std::size_t n = cells.size();
  SweTheta theta;
  for (int k = 0; k < 2; ++k) {
    std::vector<double> speed(n), cfl(n), p(n);
    for (std::size_t j = 0; j < n; ++j) {
      speed[j] = cells[j].speed[k];
      cfl[j] = cells[j].cfl[k];
      p[j] = cells[j].indicator_base[k];
    }
    theta[k] = select_theta_cells(speed, cfl, p, strategy);
    try {
      detail::check_stability(theta[k], cfl);
    } catch (const CflError& e) {
      throw CflError("family " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  return theta;
}

/// fhat = fbar - tau/2 [1/J R Dtheta Dbar (Dbar L v_q - L G)]
/// The bracket is evaluated as L (A v_q - G) - x_t L v_q (D L = L A), which
/// vanishes exactly for a lake at rest.
inline std::vector<Vec2> predictor_flux(std::span<const SweCell> cells,
                                        const SweTheta& theta, double tau) {
  std::vector<Vec2> out(cells.size());
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const SweCell& c = cells[j];
    const Vec2 r = c.eig.L * (c.eig.A * c.v_q - c.source);
    const Vec2 p = c.eig.L * c.v_q;
    const Vec2 q = r - c.velocity * p;
    const Vec2 z{(1.0 + theta[0][j]) * c.speed[0] * q.x,
                 (1.0 + theta[1][j]) * c.speed[1] * q.y};
    out[j] = c.flux_mean - (0.5 * tau / c.jacobian) * (c.eig.R * z);
  }
  return out;
}

/// One corrector step. `flux` holds the full corrector fluxes
/// fhat - x_t v per cell. Interior ledger:
///   mass     changes by tau (F^H_{1/2} - F^H_{N-1/2})
///   momentum changes by tau (F^Hu_{1/2} - F^Hu_{N-1/2}) + tau * source_total
struct SweStep {
  SweState state;
  SweTheta theta;
  double max_cfl = 0.0;
  Vec2 flux_left;
  Vec2 flux_right;
  double source_total = 0.0;  // h sum of G*_j over interior nodes
};

namespace detail {

// G*_j from the four-point averages of H and h_q over both layers.
inline double source_star(const SweState& s_n, std::span<const double> depth_np1,
                          std::span<const double> h_n,
                          std::span<const double> h_np1, int j, double dq,
                          double g) {
  const double H = 0.25 * (depth_np1[j + 1] + depth_np1[j - 1] +
                           s_n.depth[j + 1] + s_n.depth[j - 1]);
  const double h_q = (h_np1[j + 1] - h_np1[j - 1] + h_n[j + 1] - h_n[j - 1]) /
                     (4.0 * dq);
  return g * H * h_q;
}

}  // namespace detail

inline SweStep corrector_step(const SweState& s_n,
                              std::span<const Vec2> flux,
                              const GridMetrics& metrics,
                              std::span<const double> h_n,
                              std::span<const double> h_np1,
                              const SweParams& params) {
  const int n = metrics.cells();
  const double dq = metrics.step;
  const double ratio = metrics.tau / dq;
  const auto& jn = metrics.jacobian_node;
  const auto& jn1 = metrics.jacobian_node_new;

  SweStep out;
  SweState& s = out.state;
  s.depth.resize(n + 1);
  s.discharge.resize(n + 1);

  // Mass first, so that the momentum source can use H^{n+1}.
  for (int j = 1; j < n; ++j) {
    s.depth[j] = (jn[j] * s_n.depth[j] - ratio * (flux[j].x - flux[j - 1].x)) /
                 jn1[j];
  }
  if (params.boundary == SweBoundary::Wall) {
    // Mirrored ghost: F^H_{-1/2} = -F^H_{1/2}, F^H_{N+1/2} = -F^H_{N-1/2}.
    s.depth[0] = (jn[0] * s_n.depth[0] - 2.0 * ratio * flux[0].x) / jn1[0];
    s.depth[n] = (jn[n] * s_n.depth[n] + 2.0 * ratio * flux[n - 1].x) / jn1[n];
  } else {
    s.depth[0] = s_n.depth[0];
    s.depth[n] = s_n.depth[n];
  }
  check_depth(s, params.min_depth);

  double source_sum = 0.0;
  for (int j = 1; j < n; ++j) {
    const double gs = detail::source_star(s_n, s.depth, h_n, h_np1, j, dq,
                                          params.gravity);
    source_sum += gs;
    s.discharge[j] = (jn[j] * s_n.discharge[j] -
                      ratio * (flux[j].y - flux[j - 1].y) + metrics.tau * gs) /
                     jn1[j];
  }
  if (params.boundary == SweBoundary::Wall) {
    s.discharge[0] = 0.0;
    s.discharge[n] = 0.0;
  } else {
    s.discharge[0] = s_n.discharge[0];
    s.discharge[n] = s_n.discharge[n];
  }
  out.flux_left = flux.front();
  out.flux_right = flux.back();
  out.source_total = dq * source_sum;
  return out;
}

namespace detail {

inline std::vector<Vec2> corrector_fluxes(std::span<const SweCell> cells,
                                          std::span<const Vec2> f_hat) {
  std::vector<Vec2> out(cells.size());
  for (std::size_t j = 0; j < cells.size(); ++j) {
    out[j] = f_hat[j] - cells[j].velocity * cells[j].v_mean;
  }
  return out;
}

}  // namespace detail

inline SweStep step_swe(const SweState& s_n, const GridMetrics& metrics,
                        std::span<const double> h_n,
                        std::span<const double> h_np1, const SweParams& params,
                        const ThetaStrategy& strategy) {
  std::vector<SweCell> cells = swe_cells(s_n, metrics, h_n, params);
  SweTheta theta = select_theta_swe(cells, strategy);
  std::vector<Vec2> f_hat = predictor_flux(cells, theta, metrics.tau);
  std::vector<Vec2> flux = detail::corrector_fluxes(cells, f_hat);
  SweStep out = corrector_step(s_n, flux, metrics, h_n, h_np1, params);
  out.theta = std::move(theta);
  for (const SweCell& c : cells) {
    out.max_cfl = std::max({out.max_cfl, c.cfl[0], c.cfl[1]});
  }
  return out;
}

inline SweStep step_swe(const SweState& s_n, const PhysicalGrid& grid_n,
                        const PhysicalGrid& grid_np1, double tau,
                        const Bathymetry& bathymetry, const SweParams& params,
                        const ThetaStrategy& strategy) {
  return step_swe(s_n, compute_metrics(grid_n, grid_np1, tau),
                  bathymetry.sample(grid_n), bathymetry.sample(grid_np1),
                  params, strategy);
}

/// max_k |lambda_k - x_t| per cell for time-step selection; `velocity_cell`
/// may be empty.
inline std::vector<double> swe_max_speeds(const SweState& s,
                                          std::span<const double> velocity_cell,
                                          const SweParams& params) {
  const int n = s.cells();
  check_depth(s, params.min_depth);
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) {
    const double H = 0.5 * (s.depth[j] + s.depth[j + 1]);
    EigenStructure e = eigen_structure(s.velocity(j), s.velocity(j + 1), H,
                                       params.gravity, params.min_depth);
    const double xt = velocity_cell.empty() ? 0.0 : velocity_cell[j];
    out[j] = std::max(std::abs(e.lambda1 - xt), std::abs(e.lambda2 - xt));
  }
  return out;
}

struct FluxFormDiscrepancy {
  double conservative = 0.0;     // flux form vs predictor-corrector
  double nonconservative = 0.0;  // splitting form vs predictor-corrector
};

/// With theta = theta0 in both families the scheme can be written as
///   F = fbar - 1/2 R |Lbar| L dv - x_t vbar + dq/2 R S L G
/// and, using the discrete GCL, as
///   J^{n+1} v^{n+1} = J^{n+1} v - tau/dq [Abar+ dv_{j-1/2} + Abar- dv_{j+1/2}]
///                     + tau G* - tau/2 [(R S L G)_{j+1/2} - (R S L G)_{j-1/2}]
/// with Abar+- = R Lbar+- L and S = sign(Lbar). Returns the largest
/// discrepancy of either form against the predictor-corrector update over
/// interior nodes, relative to max(|v|, 1).
inline FluxFormDiscrepancy flux_form_equivalence_check(
    const SweState& s_n, const GridMetrics& metrics,
    std::span<const double> h_n, std::span<const double> h_np1,
    const SweParams& params) {
  const int n = metrics.cells();
  const double dq = metrics.step;
  const double tau = metrics.tau;
  const double ratio = tau / dq;
  const double g = params.gravity;
  std::vector<SweCell> cells = swe_cells(s_n, metrics, h_n, params);
  SweStep reference = step_swe(s_n, metrics, h_n, h_np1, params, UpwindTheta{});

  std::vector<Vec2> flux(n);
  std::vector<Mat2> a_plus(n), a_minus(n);
  std::vector<Vec2> rslg(n);
  for (int j = 0; j < n; ++j) {
    const SweCell& c = cells[j];
    const double l1 = c.speed[0];
    const double l2 = c.speed[1];
    const Mat2 abs_l = Mat2::diag(std::abs(l1), std::abs(l2));
    const Mat2 sign_l = Mat2::diag(l1 > 0.0 ? 1.0 : (l1 < 0.0 ? -1.0 : 0.0),
                                   l2 > 0.0 ? 1.0 : (l2 < 0.0 ? -1.0 : 0.0));
    const Vec2 dv = dq * c.v_q;
    rslg[j] = c.eig.R * (sign_l * (c.eig.L * c.source));
    flux[j] = c.flux_mean - 0.5 * (c.eig.R * (abs_l * (c.eig.L * dv))) -
              c.velocity * c.v_mean + (0.5 * dq) * rslg[j];
    a_plus[j] = c.eig.R * Mat2::diag(0.5 * (l1 + std::abs(l1)),
                                     0.5 * (l2 + std::abs(l2))) * c.eig.L;
    a_minus[j] = c.eig.R * Mat2::diag(0.5 * (l1 - std::abs(l1)),
                                      0.5 * (l2 - std::abs(l2))) * c.eig.L;
  }
  SweState conservative = corrector_step(s_n, flux, metrics, h_n, h_np1, params).state;

  // Splitting form: mass first, then momentum with its own H^{n+1}.
  const auto& jn1 = metrics.jacobian_node_new;
  SweState split = reference.state;
  std::vector<Vec2> update(n + 1);
  for (int j = 1; j < n; ++j) {
    const Vec2 dv_m = s_n.conservative(j) - s_n.conservative(j - 1);
    const Vec2 dv_p = s_n.conservative(j + 1) - s_n.conservative(j);
    update[j] = -ratio * (a_plus[j - 1] * dv_m + a_minus[j] * dv_p) -
                (0.5 * tau) * (rslg[j] - rslg[j - 1]);
    split.depth[j] = s_n.depth[j] + update[j].x / jn1[j];
  }
  for (int j = 1; j < n; ++j) {
    const double gs = detail::source_star(s_n, split.depth, h_n, h_np1, j, dq, g);
    split.discharge[j] = s_n.discharge[j] + (update[j].y + tau * gs) / jn1[j];
  }

  double scale = 1.0;
  for (int j = 0; j <= n; ++j) {
    scale = std::max({scale, std::abs(reference.state.depth[j]),
                      std::abs(reference.state.discharge[j])});
  }
  FluxFormDiscrepancy d;
  for (int j = 1; j < n; ++j) {
    d.conservative = std::max(
        {d.conservative, std::abs(conservative.depth[j] - reference.state.depth[j]),
         std::abs(conservative.discharge[j] - reference.state.discharge[j])});
    d.nonconservative = std::max(
        {d.nonconservative, std::abs(split.depth[j] - reference.state.depth[j]),
         std::abs(split.discharge[j] - reference.state.discharge[j])});
  }
  d.conservative /= scale;
  d.nonconservative /= scale;
  return d;
}

/// Total of J H over the nodes times h; end nodes weighted 1/2 for wall runs
/// (their control volumes are half inside the domain), excluded otherwise.
inline double swe_mass(const SweState& s, std::span<const double> jacobian_node,
                       double step, SweBoundary boundary) {
  return weighted_total(jacobian_node, s.depth, step,
                        boundary == SweBoundary::Wall);
}

inline double swe_momentum(const SweState& s,
                           std::span<const double> jacobian_node, double step,
                           SweBoundary boundary) {
  return weighted_total(jacobian_node, s.discharge, step,
                        boundary == SweBoundary::Wall);
}

}  // namespace mgrid

#endif  // MGRID_SCHEME_SWE_HPP_
