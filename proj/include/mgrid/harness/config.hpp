#ifndef MGRID_HARNESS_CONFIG_HPP_
#define MGRID_HARNESS_CONFIG_HPP_

// Experiment configuration: INI files with [problem], [grid], [monitor],
// [scheme] and [output] sections, plus the built-in presets.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "mgrid/error.hpp"
#include "mgrid/mesh.hpp"
#include "mgrid/theta.hpp"

namespace mgrid::harness {

enum class ProblemKind { LinearAdvection, ScalarBurgers, Swe };
enum class GridMode { Fixed, Moving };
enum class InitialKind { Step, Gaussian, Ramp, RWave, LakeAtRest };
enum class BottomKind { Flat, Bump };
enum class ThetaKind { Adaptive, LaxWendroff, Upwind, LaxFriedrichs };

struct ExperimentConfig {
  std::string name = "custom";
  ProblemKind kind = ProblemKind::LinearAdvection;
  InitialKind initial = InitialKind::Step;

  // linear advection
  double speed = 1.0;
  double step_position = 10.0;
  double gaussian_center = 1.0;
  // Burgers ramp
  double u_left = 1.0;
  double u_right = -1.0;
  double x_left = 10.0;
  double x_right = 20.0;
  // shallow water
  double gravity = 9.81;
  double still_depth = 1.0;
  double amplitude = 0.2;
  double crest = 30.0;
  double wavelength = 10.0;
  bool wall = false;
  BottomKind bottom = BottomKind::Flat;
  double bump_height = 0.5;

  double length = 30.0;
  int cells = 150;
  GridMode mode = GridMode::Moving;

  MonitorSpec monitor{GradientMonitor{10.0}};
  GridMotionParams motion;

  double cfl = 0.8;
  double final_time = 10.0;
  ThetaKind theta = ThetaKind::Adaptive;

  int frames = 11;
  std::string output_dir = "out";

  void validate() const;
};

inline ThetaStrategy to_strategy(ThetaKind k) {
  switch (k) {
    case ThetaKind::LaxWendroff: return LaxWendroffTheta{};
    case ThetaKind::Upwind: return UpwindTheta{};
    case ThetaKind::LaxFriedrichs: return LaxFriedrichsTheta{};
    case ThetaKind::Adaptive: break;
  }
  return AdaptiveTheta{};
}

namespace detail {

template <class E>
struct Names {
  std::vector<std::pair<E, const char*>> items;

  const char* name(E e) const {
    for (const auto& [k, s] : items) {
      if (k == e) return s;
    }
    return "?";
  }
  E parse(const std::string& key, const std::string& s) const {
    std::string options;
    for (const auto& [k, n] : items) {
      if (s == n) return k;
      options += options.empty() ? n : std::string(", ") + n;
    }
    throw ConfigError(key + ": unknown value '" + s + "' (expected " + options + ")");
  }
};

inline const Names<ProblemKind> kKinds{{{ProblemKind::LinearAdvection, "linear-advection"},
                                        {ProblemKind::ScalarBurgers, "scalar-burgers"},
                                        {ProblemKind::Swe, "swe"}}};
inline const Names<InitialKind> kInitials{{{InitialKind::Step, "step"},
                                           {InitialKind::Gaussian, "gaussian"},
                                           {InitialKind::Ramp, "ramp"},
                                           {InitialKind::RWave, "rwave"},
                                           {InitialKind::LakeAtRest, "lake-at-rest"}}};
inline const Names<GridMode> kModes{{{GridMode::Fixed, "fixed"}, {GridMode::Moving, "moving"}}};
inline const Names<BottomKind> kBottoms{{{BottomKind::Flat, "flat"}, {BottomKind::Bump, "bump"}}};
inline const Names<ThetaKind> kThetas{{{ThetaKind::Adaptive, "adaptive"},
                                       {ThetaKind::LaxWendroff, "lax-wendroff"},
                                       {ThetaKind::Upwind, "upwind"},
                                       {ThetaKind::LaxFriedrichs, "lax-friedrichs"}}};
inline const Names<InitCapPolicy> kCapPolicies{
    {{InitCapPolicy::Throw, "error"}, {InitCapPolicy::KeepBest, "keep-best"}}};

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"problem",
       {"name", "kind", "initial", "speed", "step_position", "gaussian_center", "u_left",
        "u_right", "x_left", "x_right", "gravity", "still_depth", "amplitude", "crest",
        "wavelength", "boundary", "bottom", "bump_height"}},
      {"grid", {"length", "cells", "mode"}},
      {"monitor",
       {"type", "alpha", "alpha0", "alpha1", "beta", "sigma", "init_tol", "init_max_iter",
        "init_relaxation", "init_on_cap"}},
      {"scheme", {"cfl", "final_time", "theta"}},
      {"output", {"frames", "directory"}},
  };
  return keys;
}

inline double parse_number(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

inline int parse_int(const std::string& key, const std::string& s) {
  const double v = parse_number(key, s);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  }
  return static_cast<int>(v);
}

}  // namespace detail

inline const char* kind_name(ProblemKind k) { return detail::kKinds.name(k); }
inline const char* initial_name(InitialKind k) { return detail::kInitials.name(k); }
inline const char* mode_name(GridMode m) { return detail::kModes.name(m); }
inline const char* theta_name(ThetaKind t) { return detail::kThetas.name(t); }

inline void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(length > 0.0, "grid.length must be positive");
  require(cells >= 2, "grid.cells must be at least 2");
  require(cfl > 0.0 && cfl <= 1.0, "scheme.cfl must lie in (0, 1]");
  require(final_time > 0.0, "scheme.final_time must be positive");
  require(frames >= 2, "output.frames must be at least 2");
  require(motion.beta > 0.0, "monitor.beta must be positive");
  require(motion.sigma >= 0.0, "monitor.sigma must be non-negative");
  require(motion.init_tol > 0.0 && motion.init_tol < 1.0, "monitor.init_tol must lie in (0, 1)");
  require(motion.init_max_iter >= 1, "monitor.init_max_iter must be positive");
  require(motion.init_relaxation > 0.0 && motion.init_relaxation <= 1.0,
          "monitor.init_relaxation must lie in (0, 1]");
  try {
    mgrid::validate(monitor);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("monitor: ") + e.what());
  }
  switch (kind) {
    case ProblemKind::LinearAdvection:
      require(initial == InitialKind::Step || initial == InitialKind::Gaussian,
              "linear-advection supports initial = step | gaussian");
      break;
    case ProblemKind::ScalarBurgers:
      require(initial == InitialKind::Ramp, "scalar-burgers supports initial = ramp");
      require(u_left > u_right, "problem.u_left must exceed u_right");
      require(x_right > x_left, "problem.x_left must be below x_right");
      break;
    case ProblemKind::Swe:
      require(initial == InitialKind::RWave || initial == InitialKind::LakeAtRest,
              "swe supports initial = rwave | lake-at-rest");
      require(gravity > 0.0, "problem.gravity must be positive");
      require(still_depth > 0.0, "problem.still_depth must be positive");
      require(wavelength > 0.0, "problem.wavelength must be positive");
      require(amplitude > -still_depth, "problem.amplitude must exceed -still_depth");
      require(bottom == BottomKind::Flat || bump_height < still_depth,
              "problem.bump_height must stay below still_depth");
      break;
  }
}

/// Parses an INI document; unknown sections or keys are errors.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig c = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  const auto& allowed = detail::allowed_keys();
  for (const auto& [section, body] : tree) {
    auto it = allowed.find(section);
    if (it == allowed.end()) {
      throw ConfigError(body.empty() ? "key '" + section + "' outside any section"
                                     : "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      }
      (void)value;
    }
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '/'))) return *v;
    return std::nullopt;
  };
  auto num = [&](const std::string& path, double& dst) {
    if (auto v = get(path)) dst = detail::parse_number(path, *v);
  };
  auto integer = [&](const std::string& path, int& dst) {
    if (auto v = get(path)) dst = detail::parse_int(path, *v);
  };
  if (auto v = get("problem/name")) c.name = *v;
  if (auto v = get("problem/kind")) c.kind = detail::kKinds.parse("problem.kind", *v);
  if (auto v = get("problem/initial")) {
    c.initial = detail::kInitials.parse("problem.initial", *v);
  }
  num("problem/speed", c.speed);
  num("problem/step_position", c.step_position);
  num("problem/gaussian_center", c.gaussian_center);
  num("problem/u_left", c.u_left);
  num("problem/u_right", c.u_right);
  num("problem/x_left", c.x_left);
  num("problem/x_right", c.x_right);
  num("problem/gravity", c.gravity);
  num("problem/still_depth", c.still_depth);
  num("problem/amplitude", c.amplitude);
  num("problem/crest", c.crest);
  num("problem/wavelength", c.wavelength);
  if (auto v = get("problem/boundary")) {
    if (*v != "wall" && *v != "far-field") {
      throw ConfigError("problem.boundary: expected wall or far-field, got '" + *v + "'");
    }
    c.wall = *v == "wall";
  }
  if (auto v = get("problem/bottom")) c.bottom = detail::kBottoms.parse("problem.bottom", *v);
  num("problem/bump_height", c.bump_height);

  num("grid/length", c.length);
  integer("grid/cells", c.cells);
  if (auto v = get("grid/mode")) c.mode = detail::kModes.parse("grid.mode", *v);

  if (auto v = get("monitor/type")) {
    if (*v == "gradient") {
      c.monitor.kind = GradientMonitor{};
    } else if (*v == "amplitude") {
      c.monitor.kind = AmplitudeMonitor{};
    } else if (*v == "combined") {
      c.monitor.kind = CombinedMonitor{};
    } else {
      throw ConfigError("monitor.type: expected gradient, amplitude or combined, got '" +
                        *v + "'");
    }
  }
  std::visit(
      [&](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CombinedMonitor>) {
          num("monitor/alpha0", m.alpha0);
          num("monitor/alpha1", m.alpha1);
          if (get("monitor/alpha")) throw ConfigError("monitor.alpha: use alpha0/alpha1");
        } else {
          num("monitor/alpha", m.alpha);
          if (get("monitor/alpha0") || get("monitor/alpha1")) {
            throw ConfigError("monitor.alpha0/alpha1 apply to the combined monitor only");
          }
        }
      },
      c.monitor.kind);
  num("monitor/beta", c.motion.beta);
  num("monitor/sigma", c.motion.sigma);
  num("monitor/init_tol", c.motion.init_tol);
  integer("monitor/init_max_iter", c.motion.init_max_iter);
  num("monitor/init_relaxation", c.motion.init_relaxation);
  if (auto v = get("monitor/init_on_cap")) {
    c.motion.init_on_cap = detail::kCapPolicies.parse("monitor.init_on_cap", *v);
  }

  num("scheme/cfl", c.cfl);
  num("scheme/final_time", c.final_time);
  if (auto v = get("scheme/theta")) c.theta = detail::kThetas.parse("scheme.theta", *v);

  integer("output/frames", c.frames);
  if (auto v = get("output/directory")) c.output_dir = *v;

  c.monitor.target =
      c.kind == ProblemKind::Swe ? MonitorTarget::FreeSurface : MonitorTarget::Solution;
  c.validate();
  return c;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// INI text that parses back to `c`.
inline std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "[problem]\nname = " << c.name << "\nkind = " << kind_name(c.kind)
    << "\ninitial = " << initial_name(c.initial) << "\n";
  switch (c.kind) {
    case ProblemKind::LinearAdvection:
      o << "speed = " << c.speed << "\n";
      if (c.initial == InitialKind::Step) {
        o << "step_position = " << c.step_position << "\n";
      } else {
        o << "gaussian_center = " << c.gaussian_center << "\n";
      }
      break;
    case ProblemKind::ScalarBurgers:
      o << "u_left = " << c.u_left << "\nu_right = " << c.u_right << "\nx_left = " << c.x_left
        << "\nx_right = " << c.x_right << "\n";
      break;
    case ProblemKind::Swe:
      o << "gravity = " << c.gravity << "\nstill_depth = " << c.still_depth
        << "\namplitude = " << c.amplitude << "\ncrest = " << c.crest
        << "\nwavelength = " << c.wavelength << "\nboundary = "
        << (c.wall ? "wall" : "far-field") << "\nbottom = " << detail::kBottoms.name(c.bottom)
        << "\nbump_height = " << c.bump_height << "\n";
      break;
  }
  o << "\n[grid]\nlength = " << c.length << "\ncells = " << c.cells
    << "\nmode = " << mode_name(c.mode) << "\n\n[monitor]\n";
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GradientMonitor>) {
          o << "type = gradient\nalpha = " << m.alpha << "\n";
        } else if constexpr (std::is_same_v<T, AmplitudeMonitor>) {
          o << "type = amplitude\nalpha = " << m.alpha << "\n";
        } else {
          o << "type = combined\nalpha0 = " << m.alpha0 << "\nalpha1 = " << m.alpha1 << "\n";
        }
      },
      c.monitor.kind);
  o << "beta = " << c.motion.beta << "\nsigma = " << c.motion.sigma
    << "\ninit_tol = " << c.motion.init_tol << "\ninit_max_iter = " << c.motion.init_max_iter
    << "\ninit_relaxation = " << c.motion.init_relaxation
    << "\ninit_on_cap = " << detail::kCapPolicies.name(c.motion.init_on_cap)
    << "\n\n[scheme]\ncfl = " << c.cfl << "\nfinal_time = " << c.final_time
    << "\ntheta = " << theta_name(c.theta) << "\n\n[output]\nframes = " << c.frames
    << "\ndirectory = " << c.output_dir << "\n";
  return o.str();
}

// Presets ---------------------------------------------------------------------

inline ExperimentConfig preset_table1() {
  ExperimentConfig c;
  c.name = "table1";
  c.kind = ProblemKind::LinearAdvection;
  c.initial = InitialKind::Step;
  c.speed = 1.0;
  c.step_position = 10.0;
  c.length = 30.0;
  c.cells = 150;
  c.cfl = 0.8;
  c.final_time = 10.0;
  c.monitor = {GradientMonitor{10.0}};
  c.motion.beta = 150.0;
  c.motion.sigma = 100.0;
  // Node-sampled step data has no equidistributed fixed point.
  c.motion.init_relaxation = 0.1;
  c.motion.init_on_cap = InitCapPolicy::KeepBest;
  return c;
}

inline ExperimentConfig preset_table2() {
  ExperimentConfig c;
  c.name = "table2";
  c.kind = ProblemKind::LinearAdvection;
  c.initial = InitialKind::Gaussian;
  c.gaussian_center = 1.0;
  c.speed = 1.0;
  c.length = 5.0;
  c.cells = 150;
  c.cfl = 0.8;
  c.final_time = 3.0;
  c.monitor = {AmplitudeMonitor{20.0}};
  c.motion.beta = 20.0;
  c.motion.sigma = 10.0;
  // The plain iteration overshoots and cycles; half steps converge.
  c.motion.init_relaxation = 0.5;
  return c;
}

inline ExperimentConfig preset_table3() {
  ExperimentConfig c;
  c.name = "table3";
  c.kind = ProblemKind::ScalarBurgers;
  c.initial = InitialKind::Ramp;
  c.u_left = 1.0;
  c.u_right = -1.0;
  c.x_left = 10.0;
  c.x_right = 20.0;
  c.length = 30.0;
  c.cells = 60;
  c.cfl = 0.2;
  c.final_time = 10.0;
  c.monitor = {GradientMonitor{15.0}};
  c.motion.beta = 80.0;
  c.motion.sigma = 60.0;
  return c;
}

inline ExperimentConfig preset_table3b() {
  ExperimentConfig c = preset_table3();
  c.name = "table3b";
  c.u_right = 0.0;
  c.final_time = 20.0;
  return c;
}

inline ExperimentConfig preset_table4() {
  ExperimentConfig c;
  c.name = "table4";
  c.kind = ProblemKind::Swe;
  c.initial = InitialKind::RWave;
  c.gravity = 9.81;
  c.still_depth = 1.0;
  c.amplitude = 0.2;
  c.crest = 30.0;
  c.wavelength = 10.0;
  c.wall = false;
  c.length = 40.0;
  c.cells = 100;
  c.cfl = 0.95;
  c.final_time = 5.0;
  c.monitor = {CombinedMonitor{10.0, 10.0}, MonitorTarget::FreeSurface};
  c.motion.beta = 5.0;
  c.motion.sigma = 5.0;
  return c;
}

inline const std::map<std::string, ExperimentConfig (*)()>& presets() {
  static const std::map<std::string, ExperimentConfig (*)()> table{
      {"table1", preset_table1}, {"table2", preset_table2}, {"table3", preset_table3},
      {"table3b", preset_table3b}, {"table4", preset_table4}};
  return table;
}

inline std::string preset_summary(const std::string& name) {
  static const std::map<std::string, std::string> text{
      {"table1", "linear advection of a step, gradient monitor"},
      {"table2", "linear advection of a Gaussian, amplitude monitor"},
      {"table3", "Burgers ramp forming a stationary shock at x = 15"},
      {"table3b", "Burgers ramp with u_r = 0, shock moving at speed 1/2"},
      {"table4", "shallow water r-wave from a cosine pulse, far-field ends"}};
  auto it = text.find(name);
  return it == text.end() ? std::string() : it->second;
}

/// A preset name, or the path of an INI file.
inline ExperimentConfig load_config(const std::string& source) {
  if (auto it = presets().find(source); it != presets().end()) {
    ExperimentConfig c = it->second();
    c.validate();
    return c;
  }
  std::ifstream in(source);
  if (!in) throw ConfigError("'" + source + "' is neither a preset nor a readable file");
  return parse_config(in);
}

}  // namespace mgrid::harness

#endif  // MGRID_HARNESS_CONFIG_HPP_
