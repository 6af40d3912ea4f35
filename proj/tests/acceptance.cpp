// Acceptance gate: end-to-end checks of the whole solver stack against
// closed-form oracles and conservation/consistency properties. Each check
// prints one [PASS]/[FAIL] line; the exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vessel/scenario.hpp"

namespace fs = std::filesystem;
using namespace vessel;

namespace {

constexpr double kPi = std::numbers::pi;

/// Failure with the measurement that broke the bound.
[[noreturn]] void fail(const std::string& detail) {
  throw std::runtime_error(detail);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

VectorX<double> uniform_grid(double L, Index n) {
  VectorX<double> z(n);
  for (Index i = 0; i < n; ++i) z[i] = L * double(i) / double(n - 1);
  return z;
}

// ---------------------------------------------------------------------------
// 1. Harmonic mesh extension reproduces affine boundary data.

std::string check_harmonic_affine() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mesh = build_channel_mesh<double>(2.5, 0.5, 40, 16);
  const auto affine = [](double z, double r) {
    return Vector2<double>(0.03 * z - 0.01 * r + 0.004,
                           0.01 * z + 0.02 * r - 0.002);
  };
  NodalField2<double> data(mesh.num_nodes(), 2);
  for (Index n = 0; n < mesh.num_nodes(); ++n)
    data.row(n) = affine(mesh.nodes()(n, 0), mesh.nodes()(n, 1)).transpose();

  const NodalField2<double> ext = harmonic_extension<double>(mesh, data);
  const double scale = data.cwiseAbs().maxCoeff();
  const double err = (ext - data).cwiseAbs().maxCoeff() / scale;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (err > 1e-10) fail("max relative error " + fmt(err) + " > 1e-10");
  if (secs > 1.0) fail("runtime " + fmt(secs) + " s exceeds 1 s");
  return "max relative error " + fmt(err) + ", " + fmt(secs) + " s";
}

// ---------------------------------------------------------------------------
// 2. Steady traction-driven rigid channel flow matches the parabolic profile.

std::string check_poiseuille() {
  const auto t0 = std::chrono::steady_clock::now();
  const double L = 2.5, R0 = 0.5, dp = 20.0;
  const auto mesh = build_channel_mesh<double>(L, R0, 40, 16);
  FluidConfig<double> cfg;
  cfg.nu = 0.035;
  cfg.rho = 1.0;
  cfg.inflow_pulse = [dp](double) { return dp; };

  auto state = zero_fluid_state<double>(mesh.num_nodes());
  const VectorX<double> no_slip =
      VectorX<double>::Zero(static_cast<Index>(mesh.wall_nodes().size()));
  for (int k = 0; k < 400; ++k) {
    const auto ale = rigid_ale_state<double>(mesh, 0.5, state.t);
    auto result = advance_fluid(mesh, state, ale, no_slip, 0.0, cfg);
    const double delta = (result.state.u - state.u).norm();
    const double scale = std::max(1.0, result.state.u.norm());
    state = std::move(result.state);
    if (delta / scale < 1e-11) break;
  }

  const double u_max = dp / cfg.rho * R0 * R0 / (2 * cfg.nu * L);
  double max_err = 0.0;
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    const double r = mesh.nodes()(n, 1);
    const double exact = u_max * (1.0 - r * r / (R0 * R0));
    max_err = std::max(
        max_err, std::hypot(state.u(n, 0) - exact, state.u(n, 1)) / u_max);
  }
  const auto ale = rigid_ale_state<double>(mesh, 0.5, state.t);
  const double Q_in = flow_rate(mesh, state, ale, BoundaryTag::Inflow);
  const double Q_out = flow_rate(mesh, state, ale, BoundaryTag::Outflow);
  const double balance = std::abs(Q_in + Q_out) / std::abs(Q_in);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (max_err > 0.02) fail("max velocity error " + fmt(max_err) + " > 2%");
  if (balance > 1e-3) fail("mass balance " + fmt(balance) + " > 1e-3");
  if (secs > 30.0) fail("runtime " + fmt(secs) + " s exceeds 30 s");
  return "max velocity error " + fmt(max_err) + ", mass balance " +
         fmt(balance) + ", " + fmt(secs) + " s";
}

// ---------------------------------------------------------------------------
// 3. Uniform translation with u = w is transported unchanged.

std::string check_galilean() {
  const auto base = build_channel_mesh<double>(1.0, 1.0, 4, 4);
  std::vector<BoundaryEdge> edges = base.boundary_edges();
  std::vector<Index> wall_all;
  for (auto& e : edges) {
    e.tag = BoundaryTag::Wall;
    wall_all.push_back(e.a);
  }
  const ReferenceMesh<double> mesh(base.nodes(), base.triangles(), edges,
                                   wall_all, base.length(), base.radius());

  const double c = 2.0, dt = 1e-2;
  FluidConfig<double> cfg;
  cfg.lin_tol = 1e-12;
  auto state = zero_fluid_state<double>(mesh.num_nodes());
  state.u.col(1).array() = c;
  const VectorX<double> wall_v =
      VectorX<double>::Constant(static_cast<Index>(wall_all.size()), c);

  NodalField2<double> coords = mesh.nodes();
  double max_dev = 0.0;
  for (int k = 0; k < 100; ++k) {
    NodalField2<double> next = coords;
    next.col(1).array() += c * dt;
    const auto ale = make_ale_state<double>(coords, next, dt, state.t);
    state = advance_fluid(mesh, state, ale, wall_v, 0.0, cfg).state;
    coords = next;
    max_dev = std::max(max_dev,
                       std::max((state.u.col(1).array() - c).abs().maxCoeff(),
                                state.u.col(0).array().abs().maxCoeff()));
  }
  const double rel = max_dev / c;
  if (rel > 1e-8) fail("relative drift " + fmt(rel) + " > 1e-8 per 100 steps");
  return "relative drift " + fmt(rel) + " over 100 steps";
}

// ---------------------------------------------------------------------------
// 4. Damped wall settles onto the closed-form cosh static solution.

std::string check_wall_statics() {
  const double L = 2.5, a = 1.0e4, b = 6.4e4, Hbar = 1.0e3;
  const Index n = 128;
  const auto z = uniform_grid(L, n);
  // Heavy damping settles the transient well below the profile tolerance.
  const auto ops = assemble_string_operators<double>(z, {a, b, 40.0, 1.0, 0.1});
  const VectorX<double> H = VectorX<double>::Constant(n, Hbar);

  auto state = zero_wall_state<double>(n);
  state.eta_ddot = initial_acceleration(ops, state.eta, state.eta_dot, H);
  for (int k = 0; k < 6000; ++k) state = newmark_step(ops, state, H, 1e-3);

  // The settled state must agree with the direct equilibrium solve, and that
  // in turn with the continuum solution.
  const auto eta_static = static_solution(ops, H);
  const double settle =
      (state.eta - eta_static).norm() / eta_static.norm();
  if (settle > 1e-6) fail("transient residual " + fmt(settle) + " > 1e-6");

  const double beta = std::sqrt(b / a);
  double max_rel = 0.0;
  for (Index i = 1; i + 1 < n; ++i) {
    const double exact =
        Hbar / b *
        (1.0 - std::cosh(beta * (z[i] - L / 2)) / std::cosh(beta * L / 2));
    max_rel = std::max(max_rel, std::abs(state.eta[i] - exact) / exact);
  }
  if (max_rel > 1e-3) fail("max relative error " + fmt(max_rel) + " > 1e-3");
  return "max relative error " + fmt(max_rel) + " on " + std::to_string(n) +
         " nodes, transient residual " + fmt(settle);
}

// ---------------------------------------------------------------------------
// 5. Free vibration frequency, energy conservation, and dissipation.

std::string check_wall_dynamics() {
  const double L = 1.0, a = 100.0;
  const Index n = 64;
  const auto z = uniform_grid(L, n);
  const auto ops =
      assemble_string_operators<double>(z, {a, 0.0, 0.0, 1.0, 0.1});
  const double omega_exact = kPi * std::sqrt(a) / L;
  const double dt = (2 * kPi / omega_exact) / 200;
  const VectorX<double> zero = VectorX<double>::Zero(n);

  // Frequency from averaged zero crossings of the fundamental mode.
  auto state = zero_wall_state<double>(n);
  for (Index i = 0; i < n; ++i) state.eta[i] = std::sin(kPi * z[i] / L);
  state.eta_ddot = initial_acceleration(ops, state.eta, state.eta_dot, zero);
  const Index probe = n / 2;
  std::vector<double> crossings;
  double t_prev = 0.0, x_prev = state.eta[probe];
  for (int k = 0; k < 2000 && crossings.size() < 9; ++k) {
    state = newmark_step(ops, state, zero, dt);
    const double x = state.eta[probe];
    if (x_prev != 0.0 && x * x_prev < 0.0)
      crossings.push_back(t_prev + x_prev / (x_prev - x) * dt);
    t_prev = state.t;
    x_prev = x;
  }
  if (crossings.size() < 9) fail("found fewer than 9 zero crossings");
  const double omega = 8 * kPi / (crossings[8] - crossings[0]);
  const double freq_err = std::abs(omega - omega_exact) / omega_exact;

  // Energy drift of the undamped system over 1e3 steps.
  auto estate = zero_wall_state<double>(n);
  for (Index i = 0; i < n; ++i) estate.eta[i] = std::sin(kPi * z[i] / L);
  estate.eta_ddot =
      initial_acceleration(ops, estate.eta, estate.eta_dot, zero);
  const double E0 = wall_energy(ops, estate);
  for (int k = 0; k < 1000; ++k) estate = newmark_step(ops, estate, zero, dt);
  const double drift = std::abs(wall_energy(ops, estate) - E0) / E0;

  // Viscoelastic term dissipates monotonically.
  const auto damped =
      assemble_string_operators<double>(z, {a, 0.0, 0.8, 1.0, 0.1});
  auto dstate = zero_wall_state<double>(n);
  for (Index i = 0; i < n; ++i) dstate.eta[i] = std::sin(kPi * z[i] / L);
  dstate.eta_ddot =
      initial_acceleration(damped, dstate.eta, dstate.eta_dot, zero);
  double E_prev = wall_energy(damped, dstate);
  bool monotone = true;
  for (int k = 0; k < 200; ++k) {
    dstate = newmark_step(damped, dstate, zero, dt);
    const double E = wall_energy(damped, dstate);
    monotone = monotone && E <= E_prev * (1.0 + 1e-12);
    E_prev = E;
  }

  if (freq_err > 0.02) fail("frequency error " + fmt(freq_err) + " > 2%");
  if (drift > 1e-10) fail("energy drift " + fmt(drift) + " > 1e-10");
  if (!monotone) fail("damped energy is not monotone non-increasing");
  return "frequency error " + fmt(freq_err) + ", energy drift " + fmt(drift) +
         ", damped decay monotone";
}

// ---------------------------------------------------------------------------
// 6. Windkessel implicit Euler matches the charging exponential at first
// order, with the error halving when dt halves.

std::string check_windkessel() {
  const WindkesselParams<double> p{200.0, 1e-6, 5000.0, 10.0};
  const double Q = 0.8, T = 5 * p.R_d * p.C;
  const auto transient_error = [&](double dt) {
    WindkesselState<double> s{p.P_venous, 0.0};
    double max_err = 0.0;
    const int steps = static_cast<int>(std::round(T / dt));
    for (int k = 1; k <= steps; ++k) {
      s = windkessel_step(s, Q, dt, p).first;
      const double exact =
          p.P_venous +
          Q * p.R_d * (1.0 - std::exp(-s.t / (p.R_d * p.C)));
      max_err = std::max(max_err, std::abs(s.P_c - exact));
    }
    return max_err;
  };
  const double e1 = transient_error(p.R_d * p.C / 20);
  const double e2 = transient_error(p.R_d * p.C / 40);
  const double ratio = e1 / e2;
  if (ratio < 1.7 || ratio > 2.3)
    fail("error ratio " + fmt(ratio) + " outside [1.7, 2.3]");
  const double rel = e1 / (Q * p.R_d);
  return "halving ratio " + fmt(ratio) + ", max error " + fmt(rel) +
         " of full scale";
}

// ---------------------------------------------------------------------------
// Shared pieces for the coupled checks.

struct CoupledSetup {
  ReferenceMesh<double> mesh;
  PhysicalParams<double> phys;
  WallOperators<double> wall_ops;
  FluidConfig<double> fluid_cfg;

  CoupledSetup(int nz, int nr, double b_scale)
      : mesh(build_channel_mesh<double>(2.5, 0.5, nz, nr)) {
    phys.rho = 1.0;
    phys.nu = 0.035;
    phys.rho_w = 3.0;
    phys.h0 = 0.3;
    phys.a = 1.0e4;
    phys.b = 8.0e5 * b_scale;
    phys.c = 2.0;
    phys.p0 = 0.0;
    phys.R0 = mesh.radius();
    phys.L = mesh.length();

    const auto& wall = mesh.wall_nodes();
    VectorX<double> z(static_cast<Index>(wall.size()));
    for (Index k = 0; k < z.size(); ++k) z[k] = mesh.nodes()(wall[k], 0);
    wall_ops = assemble_string_operators<double>(
        z, {phys.a, phys.b, phys.c, phys.rho_w, phys.h0});

    fluid_cfg.nu = phys.nu;
    fluid_cfg.rho = phys.rho;
    fluid_cfg.p0 = phys.p0;
    fluid_cfg.lin_tol = 1e-11;
  }

  void set_pulse(double amplitude, double duration) {
    const double p0 = phys.p0;
    fluid_cfg.inflow_pulse = [=](double t) {
      return t < duration
                 ? p0 + amplitude * std::sin(kPi * t / duration)
                 : p0;
    };
  }

  CoupledState<double> rest_state(double dt) const {
    CoupledState<double> s;
    s.fluid = zero_fluid_state<double>(mesh.num_nodes());
    s.wall =
        zero_wall_state<double>(static_cast<Index>(mesh.wall_nodes().size()));
    s.ale = rigid_ale_state<double>(mesh, dt, 0.0);
    return s;
  }
};

fs::path acceptance_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vessel_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<double>> csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("missing output file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
    rows.push_back(std::move(vals));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// 7. Coupled fixed point: rest stays at rest in one subiteration per step;
// a nearly rigid wall reproduces the rigid-wall flow history.

std::string check_coupled_fixed_point() {
  // Zero pulse through the full scenario runner.
  const auto dir = acceptance_dir("zero_pulse");
  const fs::path cfg_path = dir / "zero_pulse.cfg";
  std::ofstream(cfg_path)
      << "[geometry]\nlength = 2.5\nradius = 0.5\nnz = 8\nnr = 4\n"
      << "[fluid]\nrho = 1.0\nnu = 0.035\nstab_delta = 0.05\np0 = 0.0\n"
      << "[wall]\nrho_w = 3.0\nh0 = 0.3\na = 1.0e4\nb = 8.0e5\nc = 2.0\n"
      << "[inflow]\npulse_amplitude = 0.0\npulse_duration = 3.0e-3\n"
      << "[coupling]\ntau = 1.0e-10\ntheta = 0.5\nmax_subiters = 10\n"
      << "dt = 2.0e-4\nt_end = 4.0e-3\n"
      << "[windkessel]\nR_p = 200.0\nC = 1.0e-6\nR_d = 5000.0\nP_venous = 0.0\n"
      << "[output]\nsnapshot_interval = 0\noutput_dir = "
      << (dir / "out").string() << "\n";
  RunOptions opt;
  opt.config_path = cfg_path.string();
  std::ostringstream log;
  if (run_scenario(opt, log) != kRunOk)
    fail("zero-pulse scenario did not exit cleanly:\n" + log.str());
  const auto rows = csv_rows(dir / "out" / "timeseries.csv");
  if (rows.size() != 21)
    fail("expected 21 rows, got " + std::to_string(rows.size()));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][1] != 0.0 || rows[k][2] != 0.0 || rows[k][6] != 0.0)
      fail("state left rest at row " + std::to_string(k));
    if (rows[k][7] != 1.0)
      fail("row " + std::to_string(k) + " took " +
           std::to_string(int(rows[k][7])) + " subiterations, expected 1");
  }

  // Rigid limit: scale the foundation stiffness by 1e6 and compare the
  // inflow history against a fluid-only run on the fixed mesh, sharing the
  // staggered downstream exchange.
  const int nz = 20, nr = 8, steps = 40;
  const double dt = 2e-4, amp = 2e3, dur = 3e-3;
  const WindkesselParams<double> wkp{200.0, 1e-6, 5000.0, 0.0};

  CoupledSetup rigid(nz, nr, 1.0);
  rigid.set_pulse(amp, dur);
  std::vector<double> q_rigid;
  {
    auto state = zero_fluid_state<double>(rigid.mesh.num_nodes());
    const VectorX<double> no_slip = VectorX<double>::Zero(
        static_cast<Index>(rigid.mesh.wall_nodes().size()));
    WindkesselState<double> wk{wkp.P_venous, 0.0};
    double p_out = wk.P_c;
    for (int k = 0; k < steps; ++k) {
      const auto ale = rigid_ale_state<double>(rigid.mesh, dt, state.t);
      state = advance_fluid(rigid.mesh, state, ale, no_slip, p_out,
                            rigid.fluid_cfg)
                  .state;
      q_rigid.push_back(-flow_rate(rigid.mesh, state, ale, BoundaryTag::Inflow));
      auto [wk_new, p_next] =
          windkessel_step(wk, flow_rate(rigid.mesh, state, ale,
                                        BoundaryTag::Outflow),
                          dt, wkp);
      wk = wk_new;
      p_out = p_next;
    }
  }

  CoupledSetup stiff(nz, nr, 1.0e6);
  stiff.set_pulse(amp, dur);
  CouplingConfig<double> ccfg{1e-6, 0.5, 50, dt, steps * dt};
  auto state = stiff.rest_state(dt);
  WindkesselState<double> wk{wkp.P_venous, 0.0};
  double p_out = wk.P_c;
  std::vector<double> q_stiff;
  double eta_peak = 0.0;
  for (int k = 0; k < steps; ++k) {
    state = coupled_step<double>(stiff.mesh, stiff.wall_ops, stiff.fluid_cfg,
                                 stiff.phys, ccfg, state, p_out)
                .state;
    q_stiff.push_back(
        -flow_rate(stiff.mesh, state.fluid, state.ale, BoundaryTag::Inflow));
    eta_peak = std::max(
        eta_peak, state.wall.eta.template lpNorm<Eigen::Infinity>());
    auto [wk_new, p_next] = windkessel_step(
        wk, flow_rate(stiff.mesh, state.fluid, state.ale, BoundaryTag::Outflow),
        dt, wkp);
    wk = wk_new;
    p_out = p_next;
  }

  double q_scale = 0.0, q_dev = 0.0;
  for (int k = 0; k < steps; ++k) {
    q_scale = std::max(q_scale, std::abs(q_rigid[k]));
    q_dev = std::max(q_dev, std::abs(q_stiff[k] - q_rigid[k]));
  }
  const double rel = q_dev / q_scale;
  if (eta_peak > 1e-3 * stiff.phys.R0)
    fail("stiff wall moved " + fmt(eta_peak) + " cm, not rigid");
  if (rel > 0.01)
    fail("inflow history deviates by " + fmt(rel) + " > 1% of peak");
  return "rest exact in 1 subiteration per step; rigid-limit inflow history "
         "within " +
         fmt(rel) + " of the fixed-mesh run";
}

// ---------------------------------------------------------------------------
// 8. Coupling algorithm conformance: hand-computable update formulas, a
// relaxation-independent fixed point, and the full default scenario.

std::string check_coupling_conformance() {
  // Update formulas on hand inputs.
  {
    WallState<double> w = zero_wall_state<double>(5);
    w.eta.array() = 0.1;
    w.eta_dot.array() = 1.0;
    const auto pred = extrapolate<double>(w, 0.01);
    for (Index i = 0; i < 5; ++i)
      if (std::abs(pred.first[i] - 0.11) > 1e-15 || pred.second[i] != 1.0)
        fail("extrapolation formula mismatch");

    const VectorX<double> zero = VectorX<double>::Zero(4);
    const VectorX<double> two = VectorX<double>::Constant(4, 2.0);
    const auto keep = relax<double>({zero, zero}, {two, two}, 1.0);
    const auto half = relax<double>({zero, zero}, {two, two}, 0.5);
    if (keep.first != zero || half.first != VectorX<double>::Constant(4, 1.0))
      fail("relaxation formula mismatch");

    const double L = 2.5, d = 0.3;
    const auto ops = assemble_string_operators<double>(
        uniform_grid(L, 11), {1e4, 0.0, 0.0, 1.0, 0.1});
    const VectorX<double> gap = VectorX<double>::Constant(11, d);
    const std::pair<VectorX<double>, VectorX<double>> a{gap, gap};
    const std::pair<VectorX<double>, VectorX<double>> b{
        VectorX<double>::Zero(11), VectorX<double>::Zero(11)};
    const double sum = 2 * d * std::sqrt(L);
    if (!convergence_test<double>(a, b, sum * (1 + 1e-12), ops) ||
        convergence_test<double>(a, b, sum * (1 - 1e-9), ops))
      fail("convergence test norm mismatch");
  }

  // The relaxation weight does not move the converged interface state.
  const double dt = 2e-4;
  const auto sweep = [&](double theta) {
    CoupledSetup s(8, 4, 1.0);
    s.set_pulse(2e3, 3e-3);
    CouplingConfig<double> cfg{1e-7, theta, 500, dt, 2 * dt};
    auto state = s.rest_state(dt);
    for (int k = 0; k < 2; ++k)
      state = coupled_step<double>(s.mesh, s.wall_ops, s.fluid_cfg, s.phys,
                                   cfg, state, s.phys.p0)
                  .state;
    return state;
  };
  const auto slow = sweep(0.3);
  const auto fast = sweep(0.7);
  CoupledSetup ref(8, 4, 1.0);
  const double theta_gap =
      wall_l2_norm<double>(ref.wall_ops, slow.wall.eta - fast.wall.eta) +
      wall_l2_norm<double>(ref.wall_ops, slow.wall.eta_dot - fast.wall.eta_dot);
  if (theta_gap > 1e-6)
    fail("theta sweep fixed points differ by " + fmt(theta_gap));

  // Default scenario: 200 steps, every step within the subiteration budget.
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = acceptance_dir("default_scenario");
  RunOptions opt;
  opt.config_path = std::string(VESSEL_CONFIG_DIR) + "/pulse_demo.cfg";
  opt.output_dir = (dir / "out").string();
  std::ostringstream log;
  if (run_scenario(opt, log) != kRunOk) {
    std::istringstream tail(log.str());
    std::string line, last;
    while (std::getline(tail, line)) last = line;
    fail("default scenario failed: " + last);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const auto rows = csv_rows(dir / "out" / "timeseries.csv");
  if (rows.size() != 201)
    fail("expected 201 rows, got " + std::to_string(rows.size()));
  double worst_subiters = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k)
    worst_subiters = std::max(worst_subiters, rows[k][7]);
  if (worst_subiters > 50)
    fail("a step needed " + fmt(worst_subiters) + " subiterations");
  if (secs > 600.0) fail("runtime " + fmt(secs) + " s exceeds 10 min");
  return "formulas exact, theta-sweep gap " + fmt(theta_gap) +
         ", 200 steps converged (max " + fmt(worst_subiters) +
         " subiterations, " + fmt(secs) + " s)";
}

// ---------------------------------------------------------------------------
// 9. Wall displacements up to 10% of the radius keep the moved mesh valid.

std::string check_mesh_validity_margin() {
  const auto mesh = build_channel_mesh<double>(2.5, 0.5, 40, 16);
  const Index nw = static_cast<Index>(mesh.wall_nodes().size());
  const double amp = 0.1 * mesh.radius();

  double min_area = 1e300;
  int cases = 0;
  for (const int shape : {0, 1, 2, 3}) {
    VectorX<double> eta(nw);
    for (Index k = 0; k < nw; ++k) {
      const double s = double(k) / double(nw - 1);
      switch (shape) {
        case 0: eta[k] = -amp; break;                          // uniform squeeze
        case 1: eta[k] = amp; break;                           // uniform bulge
        case 2: eta[k] = -amp * std::sin(kPi * s); break;      // inward bump
        case 3: eta[k] = amp * std::sin(2 * kPi * s); break;   // S-shaped wave
      }
    }
    const auto disp =
        harmonic_extension<double>(mesh, wall_boundary_displacement(mesh, eta));
    const auto coords = checked_coordinates(mesh, disp);  // throws if tangled
    min_area = std::min(min_area, min_signed_area(mesh, coords));
    ++cases;
  }
  if (min_area <= 0.0) fail("minimum signed area " + fmt(min_area));
  return std::to_string(cases) + " displacement shapes at 10% radius, min "
         "triangle area " +
         fmt(min_area);
}

struct Criterion {
  const char* name;
  std::function<std::string()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"harmonic extension reproduces affine boundary data",
       check_harmonic_affine},
      {"steady rigid-channel flow matches the parabolic profile",
       check_poiseuille},
      {"uniform translation is transported without distortion",
       check_galilean},
      {"damped wall settles onto the closed-form static profile",
       check_wall_statics},
      {"wall vibration frequency and energy behavior", check_wall_dynamics},
      {"downstream circuit matches its charging exponential",
       check_windkessel},
      {"coupled rest and rigid-limit fixed points", check_coupled_fixed_point},
      {"coupling update formulas and default pulse scenario",
       check_coupling_conformance},
      {"mesh stays valid at 10% radial wall displacement",
       check_mesh_validity_margin},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = true;
    try {
      detail = criteria[i].run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    std::printf("[%s] %zu. %s: %s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures)
    std::printf("%d of %zu acceptance criteria failed\n", failures,
                criteria.size());
  else
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return failures;
}
