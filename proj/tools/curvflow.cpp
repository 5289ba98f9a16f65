#include "curvflow/config.hpp"
#include "curvflow/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

struct CommonFlags {
  std::string config_file;
  std::string example;
  std::string grid_file;
  std::string spectrum_file;
  std::string out;
  std::string direction;
  std::string stepper;
  double r0 = -1, R0 = -1, t_max = -1, dt = -1, amplitude = -1;
  double rho_tol = -1, delta = -1, cfl = -1, patch_extent = -1;
  long long seed = -1, res = -1, steps = -1, grid = -1, runs = -1;
  long long n = -1;
  double ca = -1, rnorm = -1, supmu = -1e300;
  bool patch_on = false, patch_off = false;
  bool parallel_on = false, serial_on = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "configuration file (key = value)");
  cmd->add_option("--example", f.example, "built-in example name");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--r0", f.r0, "geodesic-sphere radius");
  cmd->add_option("--R0", f.R0, "sphere radius");
  cmd->add_option("--t-max", f.t_max, "time horizon");
  cmd->add_option("--dt", f.dt, "time step");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--res", f.res, "grid resolution");
  cmd->add_option("--steps", f.steps, "number of flow steps");
  cmd->add_option("--direction", f.direction, "forward | backward");
  cmd->add_option("--stepper", f.stepper, "euler | rk2");
  cmd->add_option("--amplitude", f.amplitude, "perturbation amplitude");
  cmd->add_option("--rho-tol", f.rho_tol, "gap-function tolerance");
  cmd->add_option("--delta", f.delta, "focal-point guard");
  cmd->add_option("--patch-extent", f.patch_extent, "patch half-width");
  cmd->add_option("--grid-file", f.grid_file, "tabulated immersion grid file");
  cmd->add_option("--spectrum-file", f.spectrum_file, "isoparametric spectrum file");
  cmd->add_flag("--patch", f.patch_on, "use a patch window");
  cmd->add_flag("--no-patch", f.patch_off, "use the full grid");
  cmd->add_flag("--parallel", f.parallel_on, "OpenMP kernels");
  cmd->add_flag("--serial", f.serial_on, "serial reference kernels");
}

curvflow::RunConfig build_config(const std::string& suite, const CommonFlags& f) {
  curvflow::RunConfig cfg;
  if (!f.config_file.empty()) cfg = curvflow::RunConfig::from_file(f.config_file);
  cfg.set("suite", suite);
  auto set_if = [&](const char* key, const std::string& v) {
    if (!v.empty()) cfg.set(key, v);
  };
  set_if("example", f.example);
  set_if("grid_file", f.grid_file);
  set_if("spectrum_file", f.spectrum_file);
  set_if("out", f.out);
  set_if("direction", f.direction);
  set_if("stepper", f.stepper);
  auto setd = [&](const char* key, double v, double unset = -1) {
    if (v != unset) cfg.set(key, std::to_string(v));
  };
  auto seti = [&](const char* key, long long v, long long unset = -1) {
    if (v != unset) cfg.set(key, std::to_string(v));
  };
  setd("r0", f.r0);
  setd("R0", f.R0);
  setd("t_max", f.t_max);
  setd("dt", f.dt);
  setd("amplitude", f.amplitude);
  setd("rho_tol", f.rho_tol);
  setd("delta", f.delta);
  setd("cfl", f.cfl);
  setd("patch_extent", f.patch_extent);
  setd("ca", f.ca);
  setd("rnorm", f.rnorm);
  setd("supmu", f.supmu, -1e300);
  seti("seed", f.seed);
  seti("res", f.res);
  seti("steps", f.steps);
  seti("grid", f.grid);
  seti("runs", f.runs);
  seti("n", f.n);
  if (f.patch_on) cfg.set("patch", "true");
  else if (f.patch_off) cfg.set("patch", "false");
  if (f.parallel_on) cfg.set("parallel", "true");
  else if (f.serial_on) cfg.set("parallel", "false");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvflow: curvature-adapted hypersurface flows and their checks"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* desc;
  };
  const Sub subs[] = {
      {"verify-identities", "structural-identity residual suite"},
      {"parallel", "parallel-family flow (one-dimensional reduction)"},
      {"pde-flow", "short-horizon grid flow with evolution residuals"},
      {"max-principle", "reaction-diffusion comparison bound"},
      {"monitor", "gap-function monitors over a flow"},
      {"catalog", "list built-in examples"},
      {"report", "summarize a run directory"},
  };
  std::vector<std::pair<CLI::App*, std::shared_ptr<CommonFlags>>> cmds;
  for (const auto& s : subs) {
    auto flags = std::make_shared<CommonFlags>();
    CLI::App* cmd = app.add_subcommand(s.name, s.desc);
    add_common(cmd, *flags);
    if (std::string(s.name) == "max-principle") {
      cmd->add_option("--n", flags->n, "hypersurface dimension");
      cmd->add_option("--ca", flags->ca, "max shape-operator norm");
      cmd->add_option("--rnorm", flags->rnorm, "ambient curvature norm");
      cmd->add_option("--supmu", flags->supmu, "sup of mu");
      cmd->add_option("--grid", flags->grid, "grid size per side");
      cmd->add_option("--runs", flags->runs, "number of random fields");
      cmd->add_option("--cfl", flags->cfl, "CFL factor in (0,1]");
    }
    cmds.emplace_back(cmd, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (size_t i = 0; i < cmds.size(); ++i) {
    if (cmds[i].first->parsed()) {
      try {
        const curvflow::RunConfig cfg = build_config(subs[i].name, *cmds[i].second);
        return curvflow::run(cfg, std::cout);
      } catch (const curvflow::config_parse_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
    }
  }
  return 2;
}
