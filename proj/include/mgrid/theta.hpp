#ifndef MGRID_THETA_HPP_
#define MGRID_THETA_HPP_

// Per-cell scheme parameter theta of the predictor-corrector family.
//
// With tau*_{j+1/2} = tau (1 + theta)/2, theta = 0 gives Lax-Wendroff,
// theta = 1/C - 1 first-order upwind and theta = 1/C^2 - 1 Lax-Friedrichs.
// The adaptive choice switches between these using the indicators
// g = |abar| (1 - C) v_q of the cell and of its upwind neighbour.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "mgrid/error.hpp"

namespace mgrid {

/// Upper bound on theta; reached only where the relative speed vanishes.
inline constexpr double kThetaCap = 1e6;

struct AdaptiveTheta {};
struct LaxWendroffTheta {};
struct UpwindTheta {};
struct LaxFriedrichsTheta {};

/// Data available to a user-supplied rule for cell j+1/2.
struct ThetaCell {
  int cell = 0;
  double cfl = 0.0;
  double speed = 0.0;          // relative speed abar
  double indicator = 0.0;      // g_{j+1/2}
  double upwind_indicator = std::numeric_limits<double>::quiet_NaN();
  bool upwind_inside = false;  // false when j+1/2-s lies outside the grid
};

struct CustomTheta {
  std::function<double(const ThetaCell&)> rule;
};

using ThetaStrategy = std::variant<AdaptiveTheta, LaxWendroffTheta,
                                   UpwindTheta, LaxFriedrichsTheta,
                                   CustomTheta>;

inline double upwind_theta(double cfl) {
  if (!(cfl > 0.0)) return kThetaCap;
  return std::min(1.0 / cfl - 1.0, kThetaCap);
}

inline double lax_friedrichs_theta(double cfl) {
  if (!(cfl > 0.0)) return kThetaCap;
  return std::min(1.0 / (cfl * cfl) - 1.0, kThetaCap);
}

/// Three-case TVD rule given the cell indicator and its upwind neighbour.
///   0                   if |g| <= |g_up| and g g_up >= 0
///   theta0 (1 - g_up/g)  if |g| >  |g_up| and g g_up >= 0
///   theta0              if g g_up < 0
/// A zero cell indicator with a non-zero neighbour takes the last branch,
/// two zero indicators the first.
inline double tvd_theta(double g, double g_up, double theta0) {
  if (g == 0.0) return g_up == 0.0 ? 0.0 : theta0;
  if (g * g_up < 0.0) return theta0;
  if (std::abs(g) <= std::abs(g_up)) return 0.0;
  return theta0 * (1.0 - g_up / g);
}

/// Applies `strategy` cell by cell. `gradient` holds v_q per cell; the
/// indicators are built here from the relative speeds and CFL numbers.
inline std::vector<double> select_theta_cells(std::span<const double> speed,
                                              std::span<const double> cfl,
                                              std::span<const double> gradient,
                                              const ThetaStrategy& strategy) {
  const int n = static_cast<int>(speed.size());
  std::vector<double> g(n);
  for (int j = 0; j < n; ++j) {
    g[j] = std::abs(speed[j]) * (1.0 - cfl[j]) * gradient[j];
  }
  std::vector<double> theta(n);
  for (int j = 0; j < n; ++j) {
    const double c = cfl[j];
    theta[j] = std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, LaxWendroffTheta>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, UpwindTheta>) {
            return upwind_theta(c);
          } else if constexpr (std::is_same_v<T, LaxFriedrichsTheta>) {
            return lax_friedrichs_theta(c);
          } else {
            const int up = speed[j] >= 0.0 ? j - 1 : j + 1;
            const bool inside = up >= 0 && up < n;
            if constexpr (std::is_same_v<T, AdaptiveTheta>) {
              const double theta0 = upwind_theta(c);
              return inside ? tvd_theta(g[j], g[up], theta0) : theta0;
            } else {
              ThetaCell cell{j, c, speed[j], g[j],
                             inside ? g[up]
                                    : std::numeric_limits<double>::quiet_NaN(),
                             inside};
              return s.rule(cell);
            }
          }
        },
        strategy);
  }
  return theta;
}

}  // namespace mgrid

#endif  // MGRID_THETA_HPP_
