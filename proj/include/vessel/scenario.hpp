#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "vessel/config.hpp"
#include "vessel/coupling.hpp"
#include "vessel/vtk.hpp"
#include "vessel/windkessel.hpp"

namespace vessel {

/// Full description of one batch simulation, aggregated from a config file.
struct ScenarioConfig {
  struct Geometry {
    double length = 2.5;  // cm
    double radius = 0.5;  // cm
    int nz = 40;
    int nr = 16;
  } geometry;

  PhysicalParams<double> phys;
  double stab_delta = 0.05;

  struct Pulse {
    double amplitude = 0.0;  // inflow overpressure peak (dyn/cm^2)
    double duration = 1.0;   // half-sine support (s)
  } pulse;

  CouplingConfig<double> coupling{1e-5, 0.5, 50, 1e-4, 1e-4};
  WindkesselParams<double> windkessel{0.0, 1e-6, 1.0, 0.0};

  struct Output {
    int snapshot_interval = 0;     // steps between VTK snapshots; 0 disables
    std::vector<double> probes;    // wall displacement probe z locations (cm)
    std::string output_dir = "out";
  } output;
};

/// One failed validation rule; field uses the config "section.key" spelling.
struct ConfigViolation {
  std::string field;
  std::string rule;
};

/// Pulls every scenario key out of a parsed config. Throws ConfigParseError
/// for missing keys, non-numeric values, and keys the scenario does not know
/// (typo protection); range rules are left to validate_config.
inline ScenarioConfig read_scenario_config(const Config& cfg) {
  ScenarioConfig sc;
  sc.geometry.length = cfg.get_double("geometry.length");
  sc.geometry.radius = cfg.get_double("geometry.radius");
  sc.geometry.nz = cfg.get_int("geometry.nz");
  sc.geometry.nr = cfg.get_int("geometry.nr");

  sc.phys.rho = cfg.get_double("fluid.rho");
  sc.phys.nu = cfg.get_double("fluid.nu");
  sc.stab_delta = cfg.get_double("fluid.stab_delta");
  sc.phys.p0 = cfg.get_double("fluid.p0");

  sc.phys.rho_w = cfg.get_double("wall.rho_w");
  sc.phys.h0 = cfg.get_double("wall.h0");
  sc.phys.a = cfg.get_double("wall.a");
  sc.phys.b = cfg.get_double("wall.b");
  sc.phys.c = cfg.get_double("wall.c");
  sc.phys.R0 = sc.geometry.radius;
  sc.phys.L = sc.geometry.length;

  sc.pulse.amplitude = cfg.get_double("inflow.pulse_amplitude");
  sc.pulse.duration = cfg.get_double("inflow.pulse_duration");

  sc.coupling.tau = cfg.get_double("coupling.tau");
  sc.coupling.theta = cfg.get_double("coupling.theta");
  sc.coupling.max_subiters = cfg.get_int("coupling.max_subiters");
  sc.coupling.dt = cfg.get_double("coupling.dt");
  sc.coupling.t_end = cfg.get_double("coupling.t_end");

  sc.windkessel.R_p = cfg.get_double("windkessel.R_p");
  sc.windkessel.C = cfg.get_double("windkessel.C");
  sc.windkessel.R_d = cfg.get_double("windkessel.R_d");
  sc.windkessel.P_venous = cfg.get_double("windkessel.P_venous");

  sc.output.snapshot_interval = cfg.get_int("output.snapshot_interval");
  sc.output.probes = cfg.get_double_list("output.probes");
  sc.output.output_dir = cfg.has("output.output_dir")
                             ? cfg.get_string("output.output_dir")
                             : std::string("out");

  const auto unknown = cfg.unknown_keys();
  if (!unknown.empty())
    throw ConfigParseError(cfg.source() + ":" +
                           std::to_string(unknown.front().second) +
                           ": unknown key '" + unknown.front().first + "'");
  return sc;
}

/// Every rule violated by the config; empty iff the scenario is runnable.
inline std::vector<ConfigViolation> validate_config(const ScenarioConfig& sc) {
  std::vector<ConfigViolation> v;
  const auto require = [&](bool ok, const char* field, const char* rule) {
    if (!ok) v.push_back({field, rule});
  };

  require(sc.geometry.length > 0, "geometry.length", "must be positive");
  require(sc.geometry.radius > 0, "geometry.radius", "must be positive");
  require(sc.geometry.nz >= 2, "geometry.nz",
          "need at least two axial cells (the wall grid needs three nodes)");
  require(sc.geometry.nr >= 1, "geometry.nr", "need at least one cell");

  require(sc.phys.rho > 0, "fluid.rho", "must be positive");
  require(sc.phys.nu > 0, "fluid.nu", "must be positive");
  require(sc.stab_delta >= 0, "fluid.stab_delta", "must be non-negative");

  require(sc.phys.rho_w > 0, "wall.rho_w", "must be positive");
  require(sc.phys.h0 > 0, "wall.h0", "must be positive");
  require(sc.phys.a > 0, "wall.a", "must be positive");
  require(sc.phys.b > 0, "wall.b", "must be positive");
  require(sc.phys.c >= 0, "wall.c", "must be non-negative");

  require(sc.pulse.amplitude >= 0, "inflow.pulse_amplitude",
          "must be non-negative");
  require(sc.pulse.duration > 0, "inflow.pulse_duration", "must be positive");

  require(sc.coupling.tau > 0, "coupling.tau", "must be positive");
  require(sc.coupling.theta > 0 && sc.coupling.theta <= 1, "coupling.theta",
          "must satisfy 0 < theta <= 1");
  require(sc.coupling.max_subiters >= 1, "coupling.max_subiters",
          "need at least one subiteration");
  require(sc.coupling.dt > 0, "coupling.dt", "must be positive");
  require(sc.coupling.t_end >= sc.coupling.dt, "coupling.t_end",
          "must cover at least one step");

  require(sc.windkessel.R_p >= 0, "windkessel.R_p", "must be non-negative");
  require(sc.windkessel.C > 0, "windkessel.C", "must be positive");
  require(sc.windkessel.R_d > 0, "windkessel.R_d", "must be positive");

  require(sc.output.snapshot_interval >= 0, "output.snapshot_interval",
          "must be non-negative");
  for (double z : sc.output.probes)
    require(z >= 0 && z <= sc.geometry.length, "output.probes",
            "probe locations must lie within [0, length]");
  return v;
}

inline constexpr int kRunOk = 0;
inline constexpr int kRunConfigError = 2;   // unreadable or malformed config
inline constexpr int kRunInvalidConfig = 3; // validation violations
inline constexpr int kRunStepFailure = 4;   // a coupled step failed
inline constexpr int kRunIoError = 5;       // output I/O failure

struct RunOptions {
  std::string config_path;
  std::string output_dir;  // overrides the config value when non-empty
  bool dry_run = false;
  bool debug_log = false;  // per-subiteration log lines
};

namespace detail {

/// Round-trip-exact decimal form; keeps CSV bytes identical across reruns.
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void dump_resolved_config(const ScenarioConfig& sc, std::ostream& out) {
  const auto g = [](double v) { return fmt_full(v); };
  out << "[geometry]\n"
      << "length = " << g(sc.geometry.length) << "\n"
      << "radius = " << g(sc.geometry.radius) << "\n"
      << "nz = " << sc.geometry.nz << "\n"
      << "nr = " << sc.geometry.nr << "\n"
      << "[fluid]\n"
      << "rho = " << g(sc.phys.rho) << "\n"
      << "nu = " << g(sc.phys.nu) << "\n"
      << "stab_delta = " << g(sc.stab_delta) << "\n"
      << "p0 = " << g(sc.phys.p0) << "\n"
      << "[wall]\n"
      << "rho_w = " << g(sc.phys.rho_w) << "\n"
      << "h0 = " << g(sc.phys.h0) << "\n"
      << "a = " << g(sc.phys.a) << "\n"
      << "b = " << g(sc.phys.b) << "\n"
      << "c = " << g(sc.phys.c) << "\n"
      << "[inflow]\n"
      << "pulse_amplitude = " << g(sc.pulse.amplitude) << "\n"
      << "pulse_duration = " << g(sc.pulse.duration) << "\n"
      << "[coupling]\n"
      << "tau = " << g(sc.coupling.tau) << "\n"
      << "theta = " << g(sc.coupling.theta) << "\n"
      << "max_subiters = " << sc.coupling.max_subiters << "\n"
      << "dt = " << g(sc.coupling.dt) << "\n"
      << "t_end = " << g(sc.coupling.t_end) << "\n"
      << "[windkessel]\n"
      << "R_p = " << g(sc.windkessel.R_p) << "\n"
      << "C = " << g(sc.windkessel.C) << "\n"
      << "R_d = " << g(sc.windkessel.R_d) << "\n"
      << "P_venous = " << g(sc.windkessel.P_venous) << "\n"
      << "[output]\n"
      << "snapshot_interval = " << sc.output.snapshot_interval << "\n";
  out << "probes =";
  for (double z : sc.output.probes) out << " " << g(z);
  out << "\n"
      << "output_dir = " << sc.output.output_dir << "\n";
}

inline std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snapshot_%06d.vtk", step);
  return buf;
}

}  // namespace detail

/// Runs one batch simulation end to end: parse, validate, time loop with
/// Windkessel outflow, CSV traces, optional VTK snapshots, run log. Returns
/// one of the kRun* statuses; every failure path says why on the log stream.
inline int run_scenario(const RunOptions& opt, std::ostream& log) {
  ScenarioConfig sc;
  try {
    sc = read_scenario_config(Config::parse_file(opt.config_path));
  } catch (const ConfigParseError& e) {
    log << "config error: " << e.what() << "\n";
    return kRunConfigError;
  }
  if (!opt.output_dir.empty()) sc.output.output_dir = opt.output_dir;

  const auto violations = validate_config(sc);
  if (!violations.empty()) {
    for (const auto& v : violations)
      log << "invalid config: " << v.field << ": " << v.rule << "\n";
    return kRunInvalidConfig;
  }

  if (opt.dry_run) {
    log << "dry run: configuration is valid\n";
    detail::dump_resolved_config(sc, log);
    return kRunOk;
  }

  // Problem setup.
  const auto mesh = build_channel_mesh<double>(
      sc.geometry.length, sc.geometry.radius, sc.geometry.nz, sc.geometry.nr);
  const auto& wall = mesh.wall_nodes();
  VectorX<double> wall_z(static_cast<Index>(wall.size()));
  for (Index k = 0; k < wall_z.size(); ++k)
    wall_z[k] = mesh.nodes()(wall[k], 0);
  const auto wall_ops = assemble_string_operators<double>(
      wall_z,
      {sc.phys.a, sc.phys.b, sc.phys.c, sc.phys.rho_w, sc.phys.h0});

  FluidConfig<double> fluid_cfg;
  fluid_cfg.nu = sc.phys.nu;
  fluid_cfg.rho = sc.phys.rho;
  fluid_cfg.stab_delta = sc.stab_delta;
  fluid_cfg.p0 = sc.phys.p0;
  const double amp = sc.pulse.amplitude, dur = sc.pulse.duration;
  const double p0 = sc.phys.p0;
  fluid_cfg.inflow_pulse = [amp, dur, p0](double t) {
    return t < dur ? p0 + amp * std::sin(std::numbers::pi * t / dur) : p0;
  };

  const double dt = sc.coupling.dt;
  CoupledState<double> state;
  state.fluid = zero_fluid_state<double>(mesh.num_nodes());
  state.wall = zero_wall_state<double>(static_cast<Index>(wall.size()));
  state.ale = rigid_ale_state<double>(mesh, dt, 0.0);

  WindkesselState<double> wk{sc.windkessel.P_venous, 0.0};
  double outflow_pressure = wk.P_c;  // staggered: Q of step k prices step k+1

  // Probe nodes: nearest wall grid node per requested z.
  std::vector<Index> probe_nodes;
  for (double z : sc.output.probes) {
    Index best = 0;
    for (Index k = 1; k < wall_z.size(); ++k)
      if (std::abs(wall_z[k] - z) < std::abs(wall_z[best] - z)) best = k;
    probe_nodes.push_back(best);
  }

  // Outputs. Nothing is created until the config has fully validated.
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(sc.output.output_dir, ec);
  if (ec) {
    log << "i/o error: cannot create output directory '"
        << sc.output.output_dir << "': " << ec.message() << "\n";
    return kRunIoError;
  }
  const fs::path out_dir(sc.output.output_dir);
  std::ofstream ts(out_dir / "timeseries.csv");
  std::ofstream wkcsv(out_dir / "windkessel.csv");
  if (!ts || !wkcsv) {
    log << "i/o error: cannot open output files in '" << sc.output.output_dir
        << "'\n";
    return kRunIoError;
  }

  ts << "# vessel-sim timeseries schema v1; Q_in positive into the vessel, "
        "Q_out positive out; pressures in dyn/cm^2\n";
  ts << "t,Q_in,Q_out,P_in,P_out,P_c,eta_max,subiters";
  for (std::size_t k = 0; k < probe_nodes.size(); ++k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", wall_z[probe_nodes[k]]);
    ts << ",eta_z" << buf;
  }
  ts << "\n";
  wkcsv << "# vessel-sim windkessel schema v1\n";
  wkcsv << "t,Q,P_c,P_out\n";

  const auto& F = detail::fmt_full;
  // P_out is the traction the fluid felt during the step ending at t.
  const auto write_ts_row = [&](double t, double Q_in, double Q_out,
                                double P_in, double P_out, int subiters) {
    ts << F(t) << "," << F(Q_in) << "," << F(Q_out) << "," << F(P_in) << ","
       << F(P_out) << "," << F(wk.P_c) << ","
       << F(state.wall.eta.template lpNorm<Eigen::Infinity>()) << ","
       << subiters;
    for (Index node : probe_nodes) ts << "," << F(state.wall.eta[node]);
    ts << "\n";
  };
  const auto write_wk_row = [&](double t, double Q) {
    wkcsv << F(t) << "," << F(Q) << "," << F(wk.P_c) << ","
          << F(outflow_pressure) << "\n";
  };
  const auto maybe_snapshot = [&](int step) -> bool {
    if (sc.output.snapshot_interval <= 0 ||
        step % sc.output.snapshot_interval != 0)
      return true;
    std::ofstream vtk(out_dir / detail::snapshot_name(step));
    if (!vtk) return false;
    write_vtk_snapshot<double>(vtk, mesh, state.ale.y_new, state.fluid,
                               sc.phys.rho, sc.phys.p0);
    return vtk.good();
  };

  write_ts_row(0.0, 0.0, 0.0, p0, outflow_pressure, 0);
  write_wk_row(0.0, 0.0);
  if (!maybe_snapshot(0)) {
    log << "i/o error: cannot write snapshot in '" << sc.output.output_dir
        << "'\n";
    return kRunIoError;
  }

  const int n_steps =
      static_cast<int>(std::floor(sc.coupling.t_end / dt + 1e-9));
  for (int k = 1; k <= n_steps; ++k) {
    CoupledStepResult<double> result;
    try {
      result = coupled_step<double>(mesh, wall_ops, fluid_cfg, sc.phys,
                                    sc.coupling, state, outflow_pressure);
    } catch (const CouplingFailure& e) {
      log << "step failure: " << e.what() << "\n";
      for (const auto& row : e.history())
        log << "  subiter " << static_cast<int>(row[0]) << " disp=" << row[1]
            << " vel=" << row[2] << "\n";
      return kRunStepFailure;
    } catch (const std::exception& e) {
      log << "step failure at step " << k << ": " << e.what() << "\n";
      return kRunStepFailure;
    }
    state = std::move(result.state);
    const double t = k * dt;

    if (opt.debug_log)
      for (const auto& r : result.history)
        log << "step " << k << " subiter " << r.j << " disp=" << r.disp_residual
            << " vel=" << r.vel_residual << " fluid_iters=" << r.fluid_iterations
            << "\n";
    log << "step " << k << " t=" << t << " subiters=" << result.history.size()
        << " residual="
        << result.history.back().disp_residual +
               result.history.back().vel_residual
        << "\n";

    const double Q_in =
        -flow_rate<double>(mesh, state.fluid, state.ale, BoundaryTag::Inflow);
    const double Q_out =
        flow_rate<double>(mesh, state.fluid, state.ale, BoundaryTag::Outflow);
    const double P_in = section_mean_pressure<double>(
        mesh, state.fluid, state.ale, BoundaryTag::Inflow, sc.phys.rho, p0);
    const double p_applied = outflow_pressure;

    // Downstream exchange: this step's outflow rate sets the traction for
    // the next step.
    auto [wk_new, p_next] = windkessel_step<double>(wk, Q_out, dt, sc.windkessel);
    wk = wk_new;
    outflow_pressure = p_next;

    write_ts_row(t, Q_in, Q_out, P_in, p_applied,
                 static_cast<int>(result.history.size()));
    write_wk_row(t, Q_out);
    if (!maybe_snapshot(k)) {
      log << "i/o error: cannot write snapshot in '" << sc.output.output_dir
          << "'\n";
      return kRunIoError;
    }
  }

  ts.flush();
  wkcsv.flush();
  if (!ts || !wkcsv) {
    log << "i/o error: failed writing CSV outputs in '"
        << sc.output.output_dir << "'\n";
    return kRunIoError;
  }
  log << "completed " << n_steps << " steps\n";
  return kRunOk;
}

}  // namespace vessel
