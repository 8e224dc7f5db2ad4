// Command line driver: run, compare, convergence, list-presets.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mgrid/error.hpp"
#include "mgrid/harness/config.hpp"
#include "mgrid/harness/run.hpp"

namespace fs = std::filesystem;
using namespace mgrid;
using namespace mgrid::harness;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<int> frames;
  std::string mode;
  int levels = 4;
  long long seed = 0;  // reserved; nothing is random
  bool quiet = false;
};

ExperimentConfig prepare(const Options& o) {
  ExperimentConfig c = load_config(o.config);
  if (o.frames) c.frames = *o.frames;
  if (!o.out.empty()) c.output_dir = o.out;
  if (!o.mode.empty()) c.mode = o.mode == "fixed" ? GridMode::Fixed : GridMode::Moving;
  c.validate();
  return c;
}

void print_run(const RunReport& r) {
  std::printf("%-8s %-7s N=%d steps=%d halvings=%d max CFL=%.4f", r.config.name.c_str(),
              mode_name(r.config.mode), r.config.cells, r.steps, r.halvings, r.max_cfl);
  if (r.has_exact) {
    std::printf("  L1(%s)=%.6e Linf(%s)=%.6e", r.error_variable.c_str(), r.error.l1,
                r.error_variable.c_str(), r.error.linf);
  }
  std::printf("  mass drift=%.2e  %.3fs\n", r.max_mass_drift, r.wall_seconds);
  if (!r.init_converged) {
    std::printf("  initial grid: iteration cap reached, kept best iterate (residual %.3e)\n",
                r.init_residual);
  }
}

int cmd_run(const Options& o) {
  ExperimentConfig c = prepare(o);
  RunReport r = run(c);
  write_outputs(r, c.output_dir);
  if (!o.quiet) {
    print_run(r);
    std::printf("  wrote %s\n", c.output_dir.c_str());
  }
  return 0;
}

int cmd_compare(const Options& o) {
  ExperimentConfig c = prepare(o);
  Comparison cmp = compare(c);
  const fs::path dir = c.output_dir;
  write_outputs(cmp.fixed, dir / "fixed");
  write_outputs(cmp.moving, dir / "moving");
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["fixed"] = summary_json(cmp.fixed);
  j["moving"] = summary_json(cmp.moving);
  if (cmp.fixed.has_exact) {
    j["l1_ratio"] = cmp.l1_ratio;
    j["linf_ratio"] = cmp.linf_ratio;
  }
  write_text(dir / "comparison.json", [&](std::ostream& s) { s << j.dump(2) << '\n'; });
  if (!o.quiet) {
    print_run(cmp.fixed);
    print_run(cmp.moving);
    if (cmp.fixed.has_exact) {
      std::printf("moving/fixed: L1 %.4f  Linf %.4f\n", cmp.l1_ratio, cmp.linf_ratio);
    }
    std::printf("wrote %s\n", dir.string().c_str());
  }
  return 0;
}

int cmd_convergence(const Options& o) {
  ExperimentConfig c = prepare(o);
  c.frames = 2;
  auto table = convergence(c, o.levels);
  fs::create_directories(c.output_dir);
  write_text(fs::path(c.output_dir) / "convergence.csv", [&](std::ostream& s) {
    s.precision(17);
    s << "N,l1,linf,order_l1,order_linf\n";
    for (const auto& lv : table) {
      s << lv.cells << ',' << lv.error.l1 << ',' << lv.error.linf << ',' << lv.order_l1 << ','
        << lv.order_linf << '\n';
    }
  });
  if (!o.quiet) {
    std::printf("%8s %14s %14s %8s %8s\n", "N", "L1", "Linf", "order", "order");
    for (const auto& lv : table) {
      std::printf("%8d %14.6e %14.6e %8.3f %8.3f\n", lv.cells, lv.error.l1, lv.error.linf,
                  lv.order_l1, lv.order_linf);
    }
  }
  return 0;
}

int cmd_list() {
  for (const auto& [name, make] : presets()) {
    const ExperimentConfig c = make();
    std::printf("%-8s %-17s N=%-4d T_f=%-4g C=%-4g %s\n", name.c_str(), kind_name(c.kind),
                c.cells, c.final_time, c.cfl, preset_summary(name).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-grid finite-volume experiments"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--frames", o.frames, "number of output frames")->check(CLI::Range(2, 100000));
    sub->add_option("--mode", o.mode, "override the grid mode")
        ->check(CLI::IsMember({"fixed", "moving"}));
    sub->add_option("--seed", o.seed, "reserved");
    sub->add_flag("--quiet", o.quiet, "suppress console output");
  };

  auto* run_cmd = app.add_subcommand("run", "run one experiment");
  run_cmd->add_option("config", o.config, "preset name or INI file")->required();
  common(run_cmd);

  auto* cmp_cmd = app.add_subcommand("compare", "run fixed and moving grids side by side");
  cmp_cmd->add_option("config", o.config, "preset name or INI file")->required();
  common(cmp_cmd);

  auto* conv_cmd = app.add_subcommand("convergence", "refinement study, doubling N");
  conv_cmd->add_option("config", o.config, "preset name or INI file")->required();
  conv_cmd->add_option("--levels", o.levels, "number of levels")->check(CLI::Range(2, 12));
  common(conv_cmd);

  app.add_subcommand("list-presets", "list the built-in experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(o);
    if (*cmp_cmd) return cmd_compare(o);
    if (*conv_cmd) return cmd_convergence(o);
    return cmd_list();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}
