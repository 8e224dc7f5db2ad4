#ifndef MGRID_EXACT_HPP_
#define MGRID_EXACT_HPP_

// Exact solutions and initial data for the validation problems.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "mgrid/error.hpp"

namespace mgrid {

using Profile = std::function<double(double)>;

inline double advection_exact(const Profile& ic, double a, double x, double t) {
  return ic(x - a * t);
}

// Initial conditions --------------------------------------------------------

/// 1 for x < x_step, 0 otherwise.
inline Profile step_ic(double x_step) {
  return [x_step](double x) { return x < x_step ? 1.0 : 0.0; };
}

inline Profile gaussian_ic(double x0) {
  return [x0](double x) { return std::exp(-25.0 * (x - x0) * (x - x0)); };
}

/// a/2 (1 + cos(2 pi (x - x_w)/lambda)) on |x - x_w| <= lambda/2, else 0.
inline Profile cosine_pulse_ic(double a, double x_w, double lambda) {
  return [=](double x) {
    const double d = x - x_w;
    if (std::abs(d) > 0.5 * lambda) return 0.0;
    return 0.5 * a * (1.0 + std::cos(2.0 * std::numbers::pi * d / lambda));
  };
}

struct SolitaryWave {
  Profile eta;
  Profile velocity;
};

inline SolitaryWave solitary_wave_ic(double a, double h0, double g, double x0) {
  if (!(a > 0.0 && h0 > 0.0 && g > 0.0)) {
    throw DomainError("solitary wave needs positive a, h0 and g");
  }
  const double k = std::sqrt(3.0 * g * a) / (2.0 * h0 * std::sqrt(g * (h0 + a)));
  const double speed = std::sqrt(g * (h0 + a));
  auto eta = [=](double x) {
    const double s = 1.0 / std::cosh(k * (x - x0));
    return a * s * s;
  };
  auto u = [=](double x) {
    const double e = eta(x);
    return -speed * e / (h0 + e);
  };
  return {eta, u};
}

// Burgers ramp ----------------------------------------------------------------

struct BurgersRampProblem {
  double u_left = 1.0;
  double u_right = -1.0;
  double x_left = 10.0;
  double x_right = 20.0;

  void validate() const {
    if (!(u_left > u_right)) throw DomainError("ramp must be compressive (u_l > u_r)");
    if (!(x_right > x_left)) throw DomainError("ramp needs x_l < x_r");
  }
  double catastrophe_time() const {
    return -(x_right - x_left) / (u_right - u_left);
  }
  double catastrophe_position() const {
    return x_left + u_left * catastrophe_time();
  }
  double shock_speed() const { return 0.5 * (u_left + u_right); }
};

/// Piecewise linear initial ramp between the two states.
inline Profile burgers_ramp_ic(const BurgersRampProblem& p) {
  return [p](double x) {
    if (x <= p.x_left) return p.u_left;
    if (x >= p.x_right) return p.u_right;
    return p.u_left + (p.u_right - p.u_left) * (x - p.x_left) / (p.x_right - p.x_left);
  };
}

inline double burgers_exact(const BurgersRampProblem& p, double x, double t) {
  if (t < 0.0) throw DomainError("burgers_exact: t must be non-negative");
  const double ts = p.catastrophe_time();
  if (t < ts) {
    const double xl = p.x_left + p.u_left * t;
    const double xr = p.x_right + p.u_right * t;
    if (x <= xl) return p.u_left;
    if (x >= xr) return p.u_right;
    return p.u_left + (p.u_right - p.u_left) * (x - xl) / (xr - xl);
  }
  const double xs = p.catastrophe_position() + p.shock_speed() * (t - ts);
  return x < xs ? p.u_left : p.u_right;
}

// Shallow water r-wave --------------------------------------------------------

/// Simple wave with s = u + 2 sqrt(g H) = 2 c0 everywhere. `eta_max` and
/// `eta_min` bound eta0; [support_left, support_right] contains every point
/// where eta0 varies.
struct RWaveProblem {
  Profile eta0;
  double h0 = 1.0;
  double g = 9.81;
  double eta_max = 0.0;
  double eta_min = 0.0;
  double support_left = 0.0;
  double support_right = 0.0;

  double c0() const { return std::sqrt(g * h0); }
  double s0() const { return 2.0 * c0(); }
};

inline RWaveProblem cosine_pulse_rwave(double a, double x_w, double lambda,
                                       double h0, double g) {
  return {cosine_pulse_ic(a, x_w, lambda), h0, g, a, 0.0,
          x_w - 0.5 * lambda, x_w + 0.5 * lambda};
}

namespace detail {

inline double rwave_root_term(const RWaveProblem& p, double eta) {
  const double d = eta + p.h0;
  if (!(d > 0.0)) {
    throw DomainError("r-wave elevation " + std::to_string(eta) +
                      " does not exceed -h0");
  }
  return std::sqrt(p.g * d);
}

}  // namespace detail

inline double rwave_p0(const RWaveProblem& p, double x) {
  return 2.0 * p.c0() - 3.0 * detail::rwave_root_term(p, p.eta0(x));
}

inline double rwave_u0(const RWaveProblem& p, double x) {
  return 2.0 * p.c0() - 2.0 * detail::rwave_root_term(p, p.eta0(x));
}

namespace detail {

// Central-difference slope of p0.
inline double rwave_p0_slope(const RWaveProblem& p, double x, double dx) {
  return (rwave_p0(p, x + dx) - rwave_p0(p, x - dx)) / (2.0 * dx);
}

}  // namespace detail

/// t* = -1 / min p0'. +infinity when p0 is nowhere decreasing.
inline double rwave_catastrophe_time(const RWaveProblem& p) {
  const double lo = p.support_left;
  const double hi = p.support_right;
  if (!(hi > lo)) return std::numeric_limits<double>::infinity();
  constexpr int kSamples = 10000;
  const double step = (hi - lo) / kSamples;
  const double dx = 1e-5 * (hi - lo);
  int best = 0;
  double best_slope = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kSamples; ++i) {
    const double s = detail::rwave_p0_slope(p, lo + i * step, dx);
    if (s < best_slope) {
      best_slope = s;
      best = i;
    }
  }
  // Golden-section refinement on the neighbouring samples.
  double a = lo + std::max(best - 1, 0) * step;
  double b = lo + std::min(best + 1, kSamples) * step;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = detail::rwave_p0_slope(p, c, dx);
  double fd = detail::rwave_p0_slope(p, d, dx);
  for (int k = 0; k < 100 && b - a > 1e-12 * (hi - lo); ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = detail::rwave_p0_slope(p, c, dx);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = detail::rwave_p0_slope(p, d, dx);
    }
  }
  const double m = std::min({best_slope, fc, fd});
  if (!(m < 0.0)) return std::numeric_limits<double>::infinity();
  return -1.0 / m;
}

/// Time at which the characteristic from the top of the compressive flank
/// reaches the one from its foot: the flank is bounded by the extrema of
/// p0 around the steepest point. A diagnostic next to
/// rwave_catastrophe_time, which marks the first crossing of neighbouring
/// characteristics.
inline double rwave_overtaking_time(const RWaveProblem& p) {
  const double lo = p.support_left;
  const double hi = p.support_right;
  if (!(hi > lo)) return std::numeric_limits<double>::infinity();
  constexpr int kSamples = 10000;
  const double step = (hi - lo) / kSamples;
  const double dx = 1e-5 * (hi - lo);
  int steepest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kSamples; ++i) {
    const double s = detail::rwave_p0_slope(p, lo + i * step, dx);
    if (s < best) {
      best = s;
      steepest = i;
    }
  }
  if (!(best < 0.0)) return std::numeric_limits<double>::infinity();
  // Walk outwards while p0 keeps decreasing.
  int left = steepest;
  while (left > 0 && rwave_p0(p, lo + (left - 1) * step) >= rwave_p0(p, lo + left * step)) {
    --left;
  }
  int right = steepest;
  while (right < kSamples &&
         rwave_p0(p, lo + (right + 1) * step) <= rwave_p0(p, lo + right * step)) {
    ++right;
  }
  const double xa = lo + left * step;
  const double xb = lo + right * step;
  const double drop = rwave_p0(p, xa) - rwave_p0(p, xb);
  if (!(drop > 0.0)) return std::numeric_limits<double>::infinity();
  return (xb - xa) / drop;
}

struct RWaveSolveOptions {
  double tol = 1e-12;
  int max_iter = 200;
  // Solve past t* as well; the root is then one branch of a folded profile.
  bool allow_past_catastrophe = false;
};

struct RWaveSample {
  double p = 0.0;
  double eta = 0.0;
  double u = 0.0;
  int iterations = 0;  // bisection steps; stationary points for the entropy form
};

namespace detail {

inline RWaveSample rwave_sample(const RWaveProblem& prob, double p, int iterations) {
  const double c0 = prob.c0();
  const double root = (2.0 * c0 - p) / (3.0 * std::sqrt(prob.g));
  RWaveSample s;
  s.p = p;
  s.eta = root * root - prob.h0;
  // u + 2 sqrt(g H) = 2 c0 with sqrt(g H) = (2 c0 - p)/3.
  s.u = 2.0 * c0 - 2.0 * (2.0 * c0 - p) / 3.0;
  s.iterations = iterations;
  return s;
}

inline double rwave_p_range(const RWaveProblem& prob, double eta) {
  return 2.0 * prob.c0() - 3.0 * std::sqrt(prob.g * (prob.h0 + eta));
}

}  // namespace detail

/// Root of f(p) = p + 3 sqrt(g (eta0(x - p t) + h0)) - 2 c0 by bisection.
inline RWaveSample rwave_solve(const RWaveProblem& prob, double x, double t,
                               const RWaveSolveOptions& opt = {}) {
  if (t < 0.0) throw DomainError("rwave_solve: t must be non-negative");
  if (!opt.allow_past_catastrophe && t > 0.0) {
    const double ts = rwave_catastrophe_time(prob);
    if (t >= ts) {
      throw DomainError("rwave_solve: t = " + std::to_string(t) +
                        " is not before the catastrophe time " +
                        std::to_string(ts));
    }
  }
  const double c0 = prob.c0();
  auto f = [&](double p) {
    return p + 3.0 * detail::rwave_root_term(prob, prob.eta0(x - p * t)) - 2.0 * c0;
  };
  double lo = detail::rwave_p_range(prob, prob.eta_max);
  double hi = detail::rwave_p_range(prob, prob.eta_min);
  double flo = f(lo);
  double fhi = f(hi);
  for (int k = 0; k < 20 && flo > 0.0; ++k) {
    lo -= (hi - lo);
    flo = f(lo);
  }
  for (int k = 0; k < 20 && fhi < 0.0; ++k) {
    hi += (hi - lo);
    fhi = f(hi);
  }
  auto finish = [&](double p, int it) { return detail::rwave_sample(prob, p, it); };
  if (flo == 0.0) return finish(lo, 0);
  if (fhi == 0.0) return finish(hi, 0);
  if (flo > 0.0 || fhi < 0.0) {
    throw NumericError("rwave_solve: no sign change on [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "] at x = " +
                       std::to_string(x) + ", t = " + std::to_string(t));
  }
  for (int it = 1; it <= opt.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= opt.tol) return finish(mid, it);
    if (mid == lo || mid == hi) {
      // Bracket exhausted in floating point: return the better end.
      return finish(std::abs(flo) < std::abs(fhi) ? lo : hi, it);
    }
    if (fm < 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return finish(std::abs(flo) < std::abs(fhi) ? lo : hi, opt.max_iter);
}


/// Weak entropy solution of p_t + p p_x = 0 from the Lax-Oleinik formula:
/// p = (x - y)/t with y minimising
///   G(y) = int p0 ds (up to y) + (x - y)^2 / (2 t).
/// Before t* this is the classical r-wave; afterwards the folded profile is
/// replaced by a shock in p. eta and u follow from s = 2 c0 as before.
/// `samples` is the number of probes used to bracket the stationary points.
inline RWaveSample rwave_entropy_solve(const RWaveProblem& prob, double x, double t,
                                       int samples = 4000) {
  if (t < 0.0) throw DomainError("rwave_entropy_solve: t must be non-negative");
  if (samples < 2) throw DomainError("rwave_entropy_solve: need at least 2 samples");
  if (t == 0.0) return detail::rwave_sample(prob, rwave_p0(prob, x), 0);
  const double c0 = prob.c0();
  const double sl = prob.support_left;
  const double sr = prob.support_right;

  // int_{sl}^{y} (p0 + c0) ds; the integrand vanishes off the support.
  auto bump_integral = [&](double y) {
    const double b = std::clamp(y, sl, sr);
    if (!(b > sl)) return 0.0;
    constexpr int kPanels = 256;
    static constexpr double kNodes[4] = {0.1834346424956498, 0.5255324099163290,
                                         0.7966664774136267, 0.9602898564975363};
    static constexpr double kWeights[4] = {0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};
    const double w = (b - sl) / kPanels;
    double sum = 0.0;
    for (int k = 0; k < kPanels; ++k) {
      const double mid = sl + (k + 0.5) * w;
      for (int i = 0; i < 4; ++i) {
        const double d = 0.5 * w * kNodes[i];
        sum += kWeights[i] * (rwave_p0(prob, mid - d) + rwave_p0(prob, mid + d) + 2.0 * c0);
      }
    }
    return 0.5 * w * sum;
  };
  auto G = [&](double y) {
    return bump_integral(y) - c0 * y + (x - y) * (x - y) / (2.0 * t);
  };
  auto F = [&](double y) { return y + rwave_p0(prob, y) * t - x; };

  const double p_lo = detail::rwave_p_range(prob, prob.eta_max);
  const double p_hi = detail::rwave_p_range(prob, prob.eta_min);
  const double pad = 1e-9 * (1.0 + std::abs(x) + (p_hi - p_lo) * t);
  const double y_lo = x - p_hi * t - pad;
  const double y_hi = x - p_lo * t + pad;

  double best_y = 0.0;
  double best_g = std::numeric_limits<double>::infinity();
  int roots = 0;
  auto consider = [&](double y) {
    const double g = G(y);
    ++roots;
    if (g < best_g) {
      best_g = g;
      best_y = y;
    }
  };
  double a = y_lo;
  double fa = F(a);
  if (fa == 0.0) consider(a);
  for (int i = 1; i <= samples; ++i) {
    const double b = y_lo + (y_hi - y_lo) * i / samples;
    const double fb = F(b);
    if (fb == 0.0) {
      consider(b);
    } else if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      double lo = a, hi = b, flo = fa;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = F(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      consider(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  if (roots == 0) {
    throw NumericError("rwave_entropy_solve: no characteristic reaches x = " +
                       std::to_string(x) + " at t = " + std::to_string(t));
  }
  return detail::rwave_sample(prob, (x - best_y) / t, roots);
}

}  // namespace mgrid

#endif  // MGRID_EXACT_HPP_
