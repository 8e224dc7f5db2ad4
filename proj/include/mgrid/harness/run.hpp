#ifndef MGRID_HARNESS_RUN_HPP_
#define MGRID_HARNESS_RUN_HPP_

// Time loop, paired fixed/moving runs, refinement studies and file output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mgrid/core.hpp"
#include "mgrid/error.hpp"
#include "mgrid/exact.hpp"
#include "mgrid/harness/config.hpp"
#include "mgrid/mesh.hpp"
#include "mgrid/scheme_linear.hpp"
#include "mgrid/scheme_scalar.hpp"
#include "mgrid/scheme_swe.hpp"

namespace mgrid::harness {

struct Frame {
  double t = 0.0;
  std::vector<double> x;
  std::vector<std::vector<double>> values;  // one column per value name
  std::optional<ErrorNorms> error;          // primary variable vs exact
};

/// Conserved totals over interior nodes (all nodes, ends halved, for wall
/// runs) next to the value predicted by accumulating the boundary fluxes.
struct LedgerEntry {
  double t = 0.0;
  double mass = 0.0;
  double mass_expected = 0.0;
  double momentum = 0.0;
  double momentum_expected = 0.0;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<std::string> value_names;
  std::vector<Frame> frames;
  std::vector<double> trajectory_t;
  std::vector<std::vector<double>> trajectory_x;
  std::vector<LedgerEntry> ledger;

  bool has_exact = false;
  std::string error_variable;  // "u" or "eta"
  ErrorNorms error;            // at T_f
  std::optional<ErrorNorms> velocity_error;

  int steps = 0;
  int halvings = 0;
  double max_cfl = 0.0;
  double max_gcl = 0.0;            // tau * GCL residual / max J, per step
  double max_mass_drift = 0.0;     // |mass - expected| / scale
  double max_momentum_drift = 0.0;
  bool momentum_tracked = false;
  double max_new_extremum = 0.0;   // growth of max or decay of min in a step
  double max_tv_increase = 0.0;
  int init_iterations = 0;
  bool init_converged = true;
  double init_residual = 0.0;
  double wall_seconds = 0.0;

  const Frame& final_frame() const { return frames.back(); }
  std::span<const double> final_values(std::size_t column = 0) const {
    return frames.back().values.at(column);
  }
};

namespace detail {

struct StepOutcome {
  double flux_left = 0.0;
  double flux_right = 0.0;
  double momentum_in = 0.0;  // tau-weighted boundary and source contribution
  double max_cfl = 0.0;
};

// Total of |v| with the weights of weighted_total; the drift scale.
inline double abs_total(std::span<const double> jac_node, std::span<const double> v,
                        double h, bool include_ends) {
  std::vector<double> a(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) a[j] = std::abs(v[j]);
  return weighted_total(jac_node, a, h, include_ends);
}

class ScalarPhysics {
 public:
  explicit ScalarPhysics(const ExperimentConfig& c) : c_(c) {
    if (c.kind == ProblemKind::LinearAdvection) {
      ic_ = c.initial == InitialKind::Step ? step_ic(c.step_position)
                                           : gaussian_ic(c.gaussian_center);
    } else {
      ramp_ = {c.u_left, c.u_right, c.x_left, c.x_right};
      ramp_.validate();
      ic_ = burgers_ramp_ic(ramp_);
    }
  }

  Profile monitor_profile() const { return ic_; }
  std::vector<std::string> names() const { return {"u"}; }
  const char* error_variable() const { return "u"; }
  bool has_exact() const { return true; }
  bool tracks_momentum() const { return false; }

  void init(const PhysicalGrid& g) {
    v_.resize(g.cells() + 1);
    for (int j = 0; j <= g.cells(); ++j) v_[j] = ic_(g[j]);
  }

  std::vector<double> monitor_field() const { return v_; }

  std::vector<double> speeds(std::span<const double> velocity_cell) const {
    if (linear()) {
      std::vector<double> s(v_.size() - 1, c_.speed);
      for (std::size_t j = 0; j < velocity_cell.size(); ++j) s[j] -= velocity_cell[j];
      return s;
    }
    return scalar_relative_speeds(v_, burgers_flux(), velocity_cell);
  }

  StepOutcome step(const GridMetrics& m, const PhysicalGrid& next, double t_next) {
    const BoundaryValues b{exact(0.0, t_next), exact(next.length(), t_next)};
    ScalarStep s = linear() ? step_moving(v_, m, c_.speed, to_strategy(c_.theta), b)
                            : step_scalar_moving(v_, m, burgers_flux(),
                                                 to_strategy(c_.theta), b);
    v_ = std::move(s.values);
    return {s.flux_left, s.flux_right, 0.0, s.max_cfl};
  }

  double mass(std::span<const double> jac_node, double h) const {
    return weighted_total(jac_node, v_, h, false);
  }
  double momentum(std::span<const double>, double) const { return 0.0; }
  double momentum_content(std::span<const double>, double) const { return 0.0; }
  double content(std::span<const double> jac_node, double h) const {
    return detail::abs_total(jac_node, v_, h, false);
  }

  std::vector<std::vector<double>> columns(const PhysicalGrid&) const { return {v_}; }
  std::span<const double> primary() const { return v_; }

  double exact(double x, double t) const {
    return linear() ? advection_exact(ic_, c_.speed, x, t) : burgers_exact(ramp_, x, t);
  }
  std::vector<double> exact_primary(const PhysicalGrid& g, double t) const {
    std::vector<double> e(g.cells() + 1);
    for (int j = 0; j <= g.cells(); ++j) e[j] = exact(g[j], t);
    return e;
  }
  std::optional<ErrorNorms> velocity_error(const PhysicalGrid&, double) const {
    return std::nullopt;
  }

 private:
  bool linear() const { return c_.kind == ProblemKind::LinearAdvection; }

  ExperimentConfig c_;
  Profile ic_;
  BurgersRampProblem ramp_;
  std::vector<double> v_;
};

class SwePhysics {
 public:
  explicit SwePhysics(const ExperimentConfig& c) : c_(c) {
    params_.gravity = c.gravity;
    params_.boundary = c.wall ? SweBoundary::Wall : SweBoundary::FarField;
    const double h0 = c.still_depth;
    if (c.bottom == BottomKind::Flat) {
      bottom_ = Bathymetry::flat(h0);
    } else {
      const double mid = 0.5 * c.length, bump = c.bump_height;
      bottom_ = {[=](double x) { return h0 - bump * std::exp(-(x - mid) * (x - mid)); }};
    }
    if (c.initial == InitialKind::RWave) {
      wave_ = cosine_pulse_rwave(c.amplitude, c.crest, c.wavelength, h0, c.gravity);
    }
  }

  Profile monitor_profile() const {
    if (wave_) return wave_->eta0;
    return [](double) { return 0.0; };
  }
  std::vector<std::string> names() const { return {"H", "u", "eta"}; }
  const char* error_variable() const { return "eta"; }
  // The r-wave is exact for the simple-wave approximation only over a flat
  // bottom.
  bool has_exact() const { return c_.initial == InitialKind::LakeAtRest || flat(); }
  bool tracks_momentum() const { return params_.boundary == SweBoundary::FarField; }

  void init(const PhysicalGrid& g) {
    h_ = bottom_.sample(g);
    std::vector<double> eta(g.cells() + 1, 0.0), u(g.cells() + 1, 0.0);
    if (wave_) {
      for (int j = 0; j <= g.cells(); ++j) {
        eta[j] = wave_->eta0(g[j]);
        u[j] = rwave_u0(*wave_, g[j]);
      }
    }
    s_ = make_swe_state(eta, u, h_);
  }

  std::vector<double> monitor_field() const { return free_surface(s_, h_); }

  std::vector<double> speeds(std::span<const double> velocity_cell) const {
    return swe_max_speeds(s_, velocity_cell, params_);
  }

  StepOutcome step(const GridMetrics& m, const PhysicalGrid& next, double) {
    std::vector<double> h_next = bottom_.sample(next);
    SweStep s = step_swe(s_, m, h_, h_next, params_, to_strategy(c_.theta));
    s_ = std::move(s.state);
    h_ = std::move(h_next);
    if (params_.boundary == SweBoundary::Wall) return {0.0, 0.0, 0.0, s.max_cfl};
    const double in = m.tau * (s.flux_left.y - s.flux_right.y + s.source_total);
    return {s.flux_left.x, s.flux_right.x, in, s.max_cfl};
  }

  double mass(std::span<const double> jac_node, double h) const {
    return swe_mass(s_, jac_node, h, params_.boundary);
  }
  double momentum(std::span<const double> jac_node, double h) const {
    return swe_momentum(s_, jac_node, h, params_.boundary);
  }
  double content(std::span<const double> jac_node, double h) const {
    return detail::abs_total(jac_node, s_.depth, h, params_.boundary == SweBoundary::Wall);
  }
  double momentum_content(std::span<const double> jac_node, double h) const {
    return detail::abs_total(jac_node, s_.discharge, h,
                             params_.boundary == SweBoundary::Wall);
  }

  std::vector<std::vector<double>> columns(const PhysicalGrid&) const {
    return {s_.depth, velocities(s_), free_surface(s_, h_)};
  }
  std::vector<double> primary() const { return free_surface(s_, h_); }

  std::vector<double> exact_primary(const PhysicalGrid& g, double t) const {
    std::vector<double> e(g.cells() + 1, 0.0);
    if (wave_) {
      for (int j = 0; j <= g.cells(); ++j) e[j] = rwave_entropy_solve(*wave_, g[j], t).eta;
    }
    return e;
  }
  std::optional<ErrorNorms> velocity_error(const PhysicalGrid& g, double t) const {
    std::vector<double> e(g.cells() + 1, 0.0);
    if (wave_) {
      for (int j = 0; j <= g.cells(); ++j) e[j] = rwave_entropy_solve(*wave_, g[j], t).u;
    }
    return error_norms(velocities(s_), e, node_weights(g));
  }

 private:
  bool flat() const { return c_.bottom == BottomKind::Flat; }

  ExperimentConfig c_;
  SweParams params_;
  Bathymetry bottom_;
  std::optional<RWaveProblem> wave_;
  std::vector<double> h_;
  SweState s_;
};

inline std::string context(int step, double t) {
  std::ostringstream o;
  o.precision(10);
  o << "step " << step << ", t = " << t << ": ";
  return o.str();
}

// Rethrows the active exception with the step context, keeping its type.
[[noreturn]] inline void rethrow_with_context(int step, double t) {
  const std::string where = context(step, t);
  try {
    throw;
  } catch (const CflError& e) {
    throw CflError(where + e.what());
  } catch (const DryStateError& e) {
    throw DryStateError(where + e.what());
  } catch (const NumericError& e) {
    throw NumericError(where + e.what());
  } catch (const DomainError& e) {
    throw DomainError(where + e.what());
  }
}

// Extremum and total-variation changes within one step.
inline void track_variation(std::span<const double> before, std::span<const double> after,
                            RunReport& r) {
  const auto [lo0, hi0] = std::minmax_element(before.begin(), before.end());
  const auto [lo1, hi1] = std::minmax_element(after.begin(), after.end());
  r.max_new_extremum = std::max({r.max_new_extremum, *hi1 - *hi0, *lo0 - *lo1});
  r.max_tv_increase =
      std::max(r.max_tv_increase, total_variation(after) - total_variation(before));
}

template <class Physics>
RunReport run_physics(const ExperimentConfig& c) {
  const auto clock_start = std::chrono::steady_clock::now();
  Physics phys(c);
  RunReport r;
  r.config = c;
  r.value_names = phys.names();
  r.has_exact = phys.has_exact();
  r.error_variable = phys.error_variable();
  r.momentum_tracked = phys.tracks_momentum();

  const bool moving = c.mode == GridMode::Moving;
  PhysicalGrid grid = PhysicalGrid::uniform(c.cells, c.length);
  if (moving) {
    InitialGrid ig =
        build_initial_grid(phys.monitor_profile(), c.monitor, c.motion, c.cells, c.length);
    grid = ig.grid;
    r.init_iterations = ig.iterations;
    r.init_converged = ig.converged;
    r.init_residual = ig.residual;
  }
  phys.init(grid);

  auto record_frame = [&](double t) {
    Frame f;
    f.t = t;
    f.x.assign(grid.nodes().begin(), grid.nodes().end());
    f.values = phys.columns(grid);
    if (r.has_exact) {
      f.error = error_norms(phys.primary(), phys.exact_primary(grid, t), node_weights(grid));
    }
    r.frames.push_back(std::move(f));
  };
  auto record_trajectory = [&](double t) {
    r.trajectory_t.push_back(t);
    r.trajectory_x.emplace_back(grid.nodes().begin(), grid.nodes().end());
  };

  const double h = grid.step();
  auto jac_node = [&](const PhysicalGrid& g) {
    return mgrid::detail::node_average(mgrid::detail::cell_jacobians(g));
  };
  LedgerEntry led;
  led.mass = led.mass_expected = phys.mass(jac_node(grid), h);
  led.momentum = led.momentum_expected = phys.momentum(jac_node(grid), h);
  r.ledger.push_back(led);
  // Drifts are relative to the largest total of |H| (or |u|) and |Hu| seen.
  double mass_scale = std::max(phys.content(jac_node(grid), h), 1e-300);
  double momentum_scale = std::max(phys.momentum_content(jac_node(grid), h), mass_scale);

  double t = 0.0;
  record_frame(t);
  record_trajectory(t);
  std::vector<double> prev_velocity;  // cell x_t of the previous step
  int next_frame = 1;
  const double frame_dt = c.final_time / (c.frames - 1);
  auto frame_time = [&](int k) { return k == c.frames - 1 ? c.final_time : k * frame_dt; };

  while (next_frame < c.frames) {
    const double target = frame_time(next_frame);
    const int step_no = r.steps + 1;
    try {
      std::vector<double> w;
      if (moving) {
        w = smooth_monitor(evaluate_monitor(phys.monitor_field(), grid, c.monitor),
                           c.motion.sigma);
      }
      const double remaining = target - t;
      double tau = choose_tau_for_speeds(grid, phys.speeds(prev_velocity), c.cfl, remaining);
      bool hits_frame = tau >= remaining * (1.0 - 1e-12);
      if (hits_frame) tau = remaining;

      PhysicalGrid next = grid;
      GridMetrics m;
      for (int attempt = 0;; ++attempt) {
        next = moving ? advance_grid(grid, w, c.motion.beta, tau) : grid;
        m = compute_metrics(grid, next, tau);
        const double cfl =
            cfl_from_speeds(m, phys.speeds(m.velocity_cell), tau).global;
        if (cfl <= 1.0 + 1e-12) break;
        if (attempt == 5) {
          throw CflError("local CFL " + std::to_string(cfl) +
                         " above 1 after 5 time-step halvings");
        }
        tau *= 0.5;
        hits_frame = false;
        ++r.halvings;
      }

      const GclResidual gcl = check_gcl(m);
      double jmax = 0.0;
      for (double j : m.jacobian_cell_new) jmax = std::max(jmax, j);
      r.max_gcl = std::max(r.max_gcl, tau * std::max(gcl.node, gcl.cell) / jmax);

      const double t_next = hits_frame ? target : t + tau;
      const auto current = phys.primary();
      const std::vector<double> before(current.begin(), current.end());
      StepOutcome out = phys.step(m, next, t_next);
      track_variation(before, phys.primary(), r);
      r.max_cfl = std::max(r.max_cfl, out.max_cfl);

      led.t = t_next;
      led.mass_expected += tau * (out.flux_left - out.flux_right);
      led.momentum_expected += out.momentum_in;
      led.mass = phys.mass(m.jacobian_node_new, h);
      led.momentum = phys.momentum(m.jacobian_node_new, h);
      mass_scale = std::max(mass_scale, phys.content(m.jacobian_node_new, h));
      r.max_mass_drift =
          std::max(r.max_mass_drift, std::abs(led.mass - led.mass_expected) / mass_scale);
      if (r.momentum_tracked) {
        momentum_scale = std::max(
            {momentum_scale, phys.momentum_content(m.jacobian_node_new, h), mass_scale});
        r.max_momentum_drift =
            std::max(r.max_momentum_drift,
                     std::abs(led.momentum - led.momentum_expected) / momentum_scale);
      }
      r.ledger.push_back(led);

      prev_velocity = m.velocity_cell;
      grid = std::move(next);
      t = t_next;
      ++r.steps;
      record_trajectory(t);
      if (hits_frame) {
        record_frame(t);
        ++next_frame;
      }
    } catch (const Error&) {
      rethrow_with_context(step_no, t);
    }
  }

  if (r.has_exact) {
    r.error = *r.frames.back().error;
    r.velocity_error = phys.velocity_error(grid, t);
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return r;
}

}  // namespace detail

inline RunReport run(const ExperimentConfig& c) {
  c.validate();
  if (c.kind == ProblemKind::Swe) return detail::run_physics<detail::SwePhysics>(c);
  return detail::run_physics<detail::ScalarPhysics>(c);
}

struct Comparison {
  RunReport fixed;
  RunReport moving;
  double l1_ratio = 0.0;    // moving / fixed
  double linf_ratio = 0.0;
};

inline Comparison compare(ExperimentConfig c) {
  Comparison out;
  c.mode = GridMode::Fixed;
  out.fixed = run(c);
  c.mode = GridMode::Moving;
  out.moving = run(c);
  if (out.fixed.has_exact) {
    auto ratio = [](double a, double b) {
      return b > 0.0 ? a / b : (a > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    };
    out.l1_ratio = ratio(out.moving.error.l1, out.fixed.error.l1);
    out.linf_ratio = ratio(out.moving.error.linf, out.fixed.error.linf);
  }
  return out;
}

struct ConvergenceLevel {
  int cells = 0;
  ErrorNorms error;
  double order_l1 = std::numeric_limits<double>::quiet_NaN();  // vs the previous level
  double order_linf = std::numeric_limits<double>::quiet_NaN();
};

/// Runs `levels` refinements, doubling N from the configured value.
inline std::vector<ConvergenceLevel> convergence(ExperimentConfig c, int levels) {
  if (levels < 2) throw ConfigError("convergence needs at least 2 levels");
  std::vector<ConvergenceLevel> table;
  for (int k = 0; k < levels; ++k) {
    RunReport r = run(c);
    if (!r.has_exact) throw ConfigError("convergence needs an exact solution");
    ConvergenceLevel lv;
    lv.cells = c.cells;
    lv.error = r.error;
    if (!table.empty()) {
      lv.order_l1 = std::log2(table.back().error.l1 / lv.error.l1);
      lv.order_linf = std::log2(table.back().error.linf / lv.error.linf);
    }
    table.push_back(lv);
    c.cells *= 2;
  }
  return table;
}

// Output ----------------------------------------------------------------------

inline void write_profiles(std::ostream& o, const RunReport& r) {
  o.precision(17);
  o << "t,j,x";
  for (const auto& n : r.value_names) o << ',' << n;
  o << '\n';
  for (const Frame& f : r.frames) {
    for (std::size_t j = 0; j < f.x.size(); ++j) {
      o << f.t << ',' << j << ',' << f.x[j];
      for (const auto& col : f.values) o << ',' << col[j];
      o << '\n';
    }
  }
}

inline void write_trajectory(std::ostream& o, const RunReport& r) {
  o.precision(17);
  o << 't';
  const std::size_t nodes = r.trajectory_x.empty() ? 0 : r.trajectory_x.front().size();
  for (std::size_t j = 0; j < nodes; ++j) o << ",x_" << j;
  o << '\n';
  for (std::size_t k = 0; k < r.trajectory_t.size(); ++k) {
    o << r.trajectory_t[k];
    for (double x : r.trajectory_x[k]) o << ',' << x;
    o << '\n';
  }
}

inline void write_ledger(std::ostream& o, const RunReport& r) {
  o.precision(17);
  o << "t,mass,mass_expected,momentum,momentum_expected\n";
  for (const LedgerEntry& e : r.ledger) {
    o << e.t << ',' << e.mass << ',' << e.mass_expected << ',' << e.momentum << ','
      << e.momentum_expected << '\n';
  }
}

inline nlohmann::ordered_json norms_json(const ErrorNorms& e) {
  return {{"l1", e.l1}, {"linf", e.linf}};
}

/// Everything but the wall time is a deterministic function of the config.
inline nlohmann::ordered_json summary_json(const RunReport& r, bool with_timing = true) {
  nlohmann::ordered_json j;
  j["name"] = r.config.name;
  j["kind"] = kind_name(r.config.kind);
  j["mode"] = mode_name(r.config.mode);
  j["config"] = to_ini(r.config);
  j["steps"] = r.steps;
  j["time_step_halvings"] = r.halvings;
  j["final_time"] = r.frames.back().t;
  j["max_cfl"] = r.max_cfl;
  j["max_gcl_residual"] = r.max_gcl;
  j["max_mass_drift"] = r.max_mass_drift;
  if (r.momentum_tracked) j["max_momentum_drift"] = r.max_momentum_drift;
  j["max_new_extremum"] = r.max_new_extremum;
  j["max_tv_increase"] = r.max_tv_increase;
  j["initial_grid"] = {{"iterations", r.init_iterations},
                       {"converged", r.init_converged},
                       {"residual", r.init_residual}};
  if (r.has_exact) {
    j["error"] = norms_json(r.error);
    j["error"]["variable"] = r.error_variable;
    if (r.velocity_error) j["velocity_error"] = norms_json(*r.velocity_error);
    nlohmann::ordered_json frames = nlohmann::ordered_json::array();
    for (const Frame& f : r.frames) {
      auto e = norms_json(*f.error);
      e["t"] = f.t;
      frames.push_back(e);
    }
    j["frame_errors"] = frames;
  }
  if (with_timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

inline void write_text(const std::filesystem::path& p,
                       const std::function<void(std::ostream&)>& body) {
  std::ofstream o(p);
  if (!o) throw ConfigError("cannot write " + p.string());
  body(o);
  if (!o) throw ConfigError("error writing " + p.string());
}

/// profiles.csv, trajectory.csv, ledger.csv and summary.json in `dir`.
inline void write_outputs(const RunReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "profiles.csv", [&](std::ostream& o) { write_profiles(o, r); });
  write_text(dir / "trajectory.csv", [&](std::ostream& o) { write_trajectory(o, r); });
  write_text(dir / "ledger.csv", [&](std::ostream& o) { write_ledger(o, r); });
  write_text(dir / "summary.json",
             [&](std::ostream& o) { o << summary_json(r).dump(2) << '\n'; });
}

}  // namespace mgrid::harness

#endif  // MGRID_HARNESS_RUN_HPP_
