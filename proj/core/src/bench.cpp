/// @file bench.cpp
#include "fsi/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof(b), "%.17g", v);
  return b;
}

std::string fmt_hash(std::uint64_t h) {
  char b[32];
  std::snprintf(b, sizeof(b), "%016llx", static_cast<unsigned long long>(h));
  return b;
}

std::string short_num(double v) {
  char b[40];
  std::snprintf(b, sizeof(b), "%g", v);
  return b;
}

// comma CSV body -> space separated gnuplot body, comments kept
std::string to_dat(const std::string& csv) {
  std::string out = csv;
  for (char& c : out)
    if (c == ',') c = ' ';
  return out;
}

void run_parallel(int njobs, int threads, const std::function<void(int)>& fn) {
  threads = resolve_threads(threads, njobs);
  if (threads <= 1) {
    for (int i = 0; i < njobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs(njobs);
  auto worker = [&] {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= njobs) break;
      try {
        fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (int i = 0; i < njobs; ++i)
    if (errs[i]) std::rethrow_exception(errs[i]);
}

}  // namespace

int resolve_threads(int requested, int njobs) {
  if (njobs <= 1) return 1;
  int t = requested;
  if (t <= 0) {
    if (const char* env = std::getenv("IMMERSED_FSI_THREADS")) {
      t = std::atoi(env);
    }
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  if (t <= 0) t = 1;
  return std::min(t, njobs);
}

void Scenario::validate() const {
  if (n < 2) throw std::invalid_argument("Scenario: n must be >= 2");
  if (m < 0) throw std::invalid_argument("Scenario: m must be >= 0 (0 means n)");
  if (kind == Kind::EllipseRelax) {
    if (!(a > 0.0) || !(b > 0.0))
      throw std::invalid_argument("Scenario: ellipse semi-axes must be positive");
  } else {
    if (!(radius > 0.0)) throw std::invalid_argument("Scenario: radius must be positive");
  }
  if (rest_radius < 0.0) throw std::invalid_argument("Scenario: rest_radius must be >= 0");
}

double Scenario::resolved_rest_radius() const {
  if (rest_radius > 0.0) return rest_radius;
  return kind == Kind::EllipseRelax ? std::sqrt(a * b) : 0.8 * radius;
}

int Scenario::resolved_m() const { return m > 0 ? m : n; }

FluidMesh Scenario::make_fluid() const {
  validate();
  return build_unit_square(n);
}

SolidMesh Scenario::make_solid() const {
  validate();
  const double r0 = resolved_rest_radius();
  return build_ellipse(center, r0, r0, resolved_m());
}

std::vector<double> Scenario::initial_displacement(const SolidMesh& smesh) const {
  validate();
  const int mm = smesh.num_nodes();
  std::vector<double> d0(2 * mm, 0.0);
  for (int k = 0; k < mm; ++k) {
    const double theta = 2.0 * M_PI * k / mm;
    Vec2 target;
    if (kind == Kind::EllipseRelax)
      target = {center.x + a * std::cos(theta), center.y + b * std::sin(theta)};
    else
      target = {center.x + radius * std::cos(theta), center.y + radius * std::sin(theta)};
    d0[2 * k] = target.x - smesh.nodes[k].x;
    d0[2 * k + 1] = target.y - smesh.nodes[k].y;
  }
  return d0;
}

Scenario::Kind scenario_kind_from_name(const std::string& name) {
  if (name == "ellipse_relax") return Scenario::Kind::EllipseRelax;
  if (name == "steady_circle") return Scenario::Kind::SteadyCircle;
  throw std::invalid_argument("unknown scenario: " + name);
}

const char* scenario_kind_name(Scenario::Kind k) {
  return k == Scenario::Kind::EllipseRelax ? "ellipse_relax" : "steady_circle";
}

DirectorySink::DirectorySink(std::string dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void DirectorySink::write_file(const std::string& name, const std::string& content) {
  const std::filesystem::path p = std::filesystem::path(dir_) / name;
  std::ofstream f(p);
  if (!f) throw std::runtime_error("DirectorySink: cannot open " + p.string());
  f << content;
}

namespace {

std::string snapshot_text(const SolidMesh& smesh, const CoupledState& st,
                          std::uint64_t hash) {
  std::ostringstream os;
  os << "# node,ref_x,ref_y,x,y,dx,dy,ddotx,ddoty,lambdax,lambday\n";
  os << "# config_hash=" << fmt_hash(hash) << "\n";
  for (int k = 0; k < smesh.num_nodes(); ++k) {
    os << k << ',' << fmt(smesh.nodes[k].x) << ',' << fmt(smesh.nodes[k].y) << ','
       << fmt(st.phi[k].x) << ',' << fmt(st.phi[k].y) << ',' << fmt(st.d[2 * k]) << ','
       << fmt(st.d[2 * k + 1]) << ',' << fmt(st.ddot[2 * k]) << ','
       << fmt(st.ddot[2 * k + 1]) << ',' << fmt(st.lambda[2 * k]) << ','
       << fmt(st.lambda[2 * k + 1]) << '\n';
  }
  return os.str();
}

EnergyRecord make_record(const CoupledState& st, const AssembledOperators& ops,
                         const SchemeConfig& cfg, double diss_inc, double diss_cum,
                         double diss_alt_cum, double e0) {
  EnergyRecord rec;
  rec.step = st.step;
  rec.t = st.t;
  rec.energy = energy(st, ops, cfg);
  rec.diss_increment = diss_inc;
  rec.diss_cum = diss_cum;
  rec.balance_defect = rec.energy + diss_cum - e0;
  rec.energy_alt = energy_alt(st, ops, cfg);
  rec.energy_plain = energy_plain(st, ops);
  rec.diss_alt_cum = diss_alt_cum;
  rec.kinematic_residual = st.kinematic_residual;
  rec.stage_residual = st.stage_residual;
  return rec;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, const SchemeConfig& cfg,
                       const RunOptions& opts, OutputSink* sink) {
  scenario.validate();
  cfg.validate();
  if (!(opts.t_end > 0.0)) throw std::invalid_argument("run_scenario: t_end must be positive");
  const long long nsteps = std::llround(opts.t_end / cfg.tau);
  if (nsteps < 1 || std::abs(nsteps * cfg.tau - opts.t_end) > 1e-9 * std::max(1.0, opts.t_end))
    throw std::invalid_argument("run_scenario: t_end must be a positive multiple of tau");

  FluidMesh fmesh = scenario.make_fluid();
  SolidMesh smesh = scenario.make_solid();
  std::vector<double> d0 = scenario.initial_displacement(smesh);
  std::vector<double> ddot0(d0.size(), 0.0);
  CoupledState st0 = init_state(fmesh, smesh, d0, ddot0, {}, cfg.tau);
  Stepper stepper(std::move(fmesh), std::move(smesh), cfg, std::move(st0));

  RunResult res;
  res.initial_energy = energy(stepper.state(), stepper.ops(), cfg);
  res.max_energy = res.initial_energy;
  const double e0 = res.initial_energy;
  const double abort_at = opts.abort_factor * std::max(e0, 1e-30);
  double diss_cum = 0.0, diss_alt_cum = 0.0;
  res.records.push_back(make_record(stepper.state(), stepper.ops(), cfg, 0.0, 0.0, 0.0, e0));

  const std::string label = opts.label.empty() ? std::string() : "_" + opts.label;
  if (sink && opts.snapshot_interval > 0)
    sink->write_file("snapshot_0" + label + ".csv",
                     snapshot_text(stepper.solid_mesh(), stepper.state(), opts.config_hash));

  for (long long k = 1; k <= nsteps; ++k) {
    CoupledState prev = stepper.state();
    try {
      stepper.step();
    } catch (const OutOfDomainError& e) {
      res.out_of_domain = true;
      res.abort_reason = e.what();
      break;
    }
    const CoupledState& st = stepper.state();
    const double inc = dissipation_increment(prev, st, stepper.ops(), cfg);
    diss_cum += inc;
    diss_alt_cum += dissipation_alt_increment(prev, st, stepper.ops(), cfg);
    EnergyRecord rec = make_record(st, stepper.ops(), cfg, inc, diss_cum, diss_alt_cum, e0);
    res.records.push_back(rec);
    res.max_energy = std::max(res.max_energy, rec.energy);
    res.max_balance_defect = std::max(res.max_balance_defect, std::abs(rec.balance_defect));
    res.max_kinematic_residual =
        std::max(res.max_kinematic_residual, rec.kinematic_residual);
    res.max_stage_residual = std::max(res.max_stage_residual, rec.stage_residual);
    if (sink && opts.snapshot_interval > 0 && st.step % opts.snapshot_interval == 0)
      sink->write_file("snapshot_" + std::to_string(st.step) + label + ".csv",
                       snapshot_text(stepper.solid_mesh(), st, opts.config_hash));
    if (rec.energy > abort_at) {
      res.unstable = true;
      res.abort_reason = "energy exceeded " + fmt(opts.abort_factor) + " times the initial value";
      break;
    }
  }
  res.completed = !res.unstable && !res.out_of_domain;
  res.final_state = stepper.state();

  if (sink) {
    std::ostringstream os;
    os << "# step,t,energy,diss_increment,diss_cum,balance_defect,energy_alt,energy_plain,"
          "diss_alt_cum,kinematic_residual,stage_residual\n";
    os << "# config_hash=" << fmt_hash(opts.config_hash) << "\n";
    for (const auto& r : res.records) {
      os << r.step << ',' << fmt(r.t) << ',' << fmt(r.energy) << ',' << fmt(r.diss_increment)
         << ',' << fmt(r.diss_cum) << ',' << fmt(r.balance_defect) << ',' << fmt(r.energy_alt)
         << ',' << fmt(r.energy_plain) << ',' << fmt(r.diss_alt_cum) << ','
         << fmt(r.kinematic_residual) << ',' << fmt(r.stage_residual) << '\n';
    }
    const std::string body = os.str();
    sink->write_file("energy" + label + ".csv", body);
    sink->write_file("energy" + label + ".dat", to_dat(body));
  }
  return res;
}

std::vector<SweepRow> stability_sweep(const Scenario& scenario, const SchemeConfig& cfg,
                                      const std::vector<double>& taus, const RunOptions& opts,
                                      OutputSink* sink, int threads) {
  if (taus.empty()) throw std::invalid_argument("stability_sweep: empty tau list");
  const int njobs = static_cast<int>(taus.size());
  std::vector<SweepRow> rows(njobs);
  std::vector<MemorySink> captures(njobs);
  run_parallel(njobs, threads, [&](int i) {
    SchemeConfig c = cfg;
    c.tau = taus[i];
    RunOptions o = opts;
    o.label = "tau" + short_num(taus[i]);
    o.snapshot_interval = 0;
    RunResult r = run_scenario(scenario, c, o, sink ? &captures[i] : nullptr);
    SweepRow& row = rows[i];
    row.tau = taus[i];
    row.completed = r.completed;
    row.initial_energy = r.initial_energy;
    row.final_energy = r.records.back().energy;
    row.max_energy = r.max_energy;
    row.stable = r.completed &&
                 r.max_energy <= opts.stable_factor * std::max(r.initial_energy, 1e-30);
  });
  if (sink) {
    for (int i = 0; i < njobs; ++i)
      for (const auto& [name, content] : captures[i].files) sink->write_file(name, content);
    std::ostringstream os;
    os << "# tau,stable,completed,initial_energy,final_energy,max_energy\n";
    os << "# config_hash=" << fmt_hash(opts.config_hash) << "\n";
    for (const auto& r : rows)
      os << fmt(r.tau) << ',' << (r.stable ? 1 : 0) << ',' << (r.completed ? 1 : 0) << ','
         << fmt(r.initial_energy) << ',' << fmt(r.final_energy) << ',' << fmt(r.max_energy)
         << '\n';
    const std::string body = os.str();
    sink->write_file("sweep.csv", body);
    sink->write_file("sweep.dat", to_dat(body));
  }
  return rows;
}

void StudyPlan::validate() const {
  if (!(t_eval > 0.0)) throw std::invalid_argument("StudyPlan: t_eval must be positive");
  if (!(ref_tau > 0.0)) throw std::invalid_argument("StudyPlan: ref_tau must be positive");
  auto check_taus_decreasing = [&] {
    for (size_t i = 1; i < taus.size(); ++i)
      if (!(taus[i] < taus[i - 1]))
        throw std::invalid_argument("StudyPlan: tau ladder must be strictly decreasing");
  };
  auto check_ns_increasing = [&] {
    for (size_t i = 1; i < ns.size(); ++i)
      if (!(ns[i] > ns[i - 1]))
        throw std::invalid_argument("StudyPlan: n ladder must be strictly increasing");
  };
  switch (kind) {
    case Kind::Time:
      if (taus.empty()) throw std::invalid_argument("StudyPlan: time study needs a tau ladder");
      check_taus_decreasing();
      if (!(ref_tau < taus.back()))
        throw std::invalid_argument("StudyPlan: ref_tau must undercut the ladder");
      break;
    case Kind::Space:
      if (ns.empty()) throw std::invalid_argument("StudyPlan: space study needs an n ladder");
      check_ns_increasing();
      if (ref_n <= ns.back())
        throw std::invalid_argument("StudyPlan: ref_n must exceed the ladder");
      for (int n : ns)
        if (ref_n % n != 0)
          throw std::invalid_argument("StudyPlan: ref_n must be a multiple of each ladder n");
      break;
    case Kind::Global:
      if (ns.empty() || ns.size() != taus.size())
        throw std::invalid_argument("StudyPlan: global study pairs the n and tau ladders");
      check_ns_increasing();
      check_taus_decreasing();
      if (ref_n <= ns.back())
        throw std::invalid_argument("StudyPlan: ref_n must exceed the ladder");
      for (int n : ns)
        if (ref_n % n != 0)
          throw std::invalid_argument("StudyPlan: ref_n must be a multiple of each ladder n");
      break;
  }
}

std::vector<std::pair<int, double>> StudyPlan::ladder(const Scenario& scenario) const {
  std::vector<std::pair<int, double>> out;
  switch (kind) {
    case Kind::Time:
      for (double t : taus) out.emplace_back(scenario.n, t);
      break;
    case Kind::Space:
      for (int n : ns) out.emplace_back(n, ref_tau);
      break;
    case Kind::Global:
      for (size_t i = 0; i < ns.size(); ++i) out.emplace_back(ns[i], taus[i]);
      break;
  }
  return out;
}

StudyPlan::Kind study_kind_from_name(const std::string& name) {
  if (name == "time") return StudyPlan::Kind::Time;
  if (name == "space") return StudyPlan::Kind::Space;
  if (name == "global") return StudyPlan::Kind::Global;
  throw std::invalid_argument("unknown study kind: " + name);
}

const char* study_kind_name(StudyPlan::Kind k) {
  switch (k) {
    case StudyPlan::Kind::Time: return "time";
    case StudyPlan::Kind::Space: return "space";
    case StudyPlan::Kind::Global: return "global";
  }
  return "?";
}

namespace {

struct LadderPoint {
  CoupledState state;
  FluidMesh fmesh;
  SolidMesh smesh;
};

LadderPoint run_point(const Scenario& base, const SchemeConfig& base_cfg, int n, double tau,
                      Scheme scheme, double t_eval, const char* role) {
  Scenario sc = base;
  sc.n = n;
  SchemeConfig cfg = base_cfg;
  cfg.scheme = scheme;
  cfg.tau = tau;
  RunOptions o;
  o.t_end = t_eval;
  RunResult r = run_scenario(sc, cfg, o, nullptr);
  if (!r.completed)
    throw ConvergenceError(std::string("convergence_study: ") + role + " run at n=" +
                           std::to_string(n) + " tau=" + fmt(tau) +
                           " did not complete: " + r.abort_reason);
  LadderPoint pt;
  pt.state = std::move(r.final_state);
  pt.fmesh = sc.make_fluid();
  pt.smesh = sc.make_solid();
  return pt;
}

double safe_rate(double coarse, double fine) {
  if (coarse > 0.0 && fine > 0.0) return convergence_rate(coarse, fine);
  return std::nan("");
}

}  // namespace

std::vector<StudyRow> convergence_study(const StudyPlan& plan, const Scenario& scenario,
                                        const SchemeConfig& cfg, const RunOptions& opts,
                                        OutputSink* sink, int threads) {
  plan.validate();
  scenario.validate();
  if (scenario.m != 0)
    throw std::invalid_argument(
        "convergence_study: scenario.m must be 0 so the curve resolution follows n");
  const auto ladder = plan.ladder(scenario);
  const int ref_n = plan.kind == StudyPlan::Kind::Time ? scenario.n : plan.ref_n;
  for (const auto& [n, tau] : ladder) {
    (void)tau;
    if (ref_n % n != 0)
      throw std::invalid_argument("convergence_study: reference curve is not nested");
  }
  const int npts = static_cast<int>(ladder.size());
  std::vector<LadderPoint> points(npts);
  LadderPoint ref;
  // job 0 is the reference (the longest run), the rest are ladder points
  run_parallel(npts + 1, threads, [&](int i) {
    if (i == 0)
      ref = run_point(scenario, cfg, ref_n, plan.ref_tau, plan.ref_scheme, plan.t_eval,
                      "reference");
    else
      points[i - 1] = run_point(scenario, cfg, ladder[i - 1].first, ladder[i - 1].second,
                                cfg.scheme, plan.t_eval, "ladder");
  });

  AssembledOperators ref_ops;
  ref_ops.fluid = assemble_fluid_blocks(ref.fmesh, cfg.fluid, cfg.gamma);
  ref_ops.solid = assemble_solid_blocks(ref.smesh, cfg.solid);
  ref_ops.L_s = assemble_coupling_solid(ref.smesh);

  std::vector<StudyRow> rows(npts);
  for (int i = 0; i < npts; ++i) {
    StudyRow& row = rows[i];
    row.n = ladder[i].first;
    row.h = 1.0 / row.n;
    row.tau = ladder[i].second;
    row.err = error_vs_reference(points[i].state, points[i].fmesh, points[i].smesh, ref.state,
                                 ref.fmesh, ref.smesh, ref_ops);
    if (i == 0) {
      row.rate_u = row.rate_p = row.rate_d = row.rate_ddot = row.rate_total = std::nan("");
    } else {
      const ErrorReport& prev = rows[i - 1].err;
      row.rate_u = safe_rate(prev.u_l2, row.err.u_l2);
      row.rate_p = safe_rate(prev.p_l2, row.err.p_l2);
      row.rate_d = safe_rate(prev.d_energy, row.err.d_energy);
      row.rate_ddot = safe_rate(prev.ddot_l2, row.err.ddot_l2);
      row.rate_total = safe_rate(prev.total, row.err.total);
    }
  }

  if (sink) {
    std::ostringstream os;
    os << "# n,h,tau,err_u,err_p,err_d,err_ddot,err_total,rate_u,rate_p,rate_d,rate_ddot,"
          "rate_total\n";
    os << "# config_hash=" << fmt_hash(opts.config_hash) << "\n";
    for (const auto& r : rows)
      os << r.n << ',' << fmt(r.h) << ',' << fmt(r.tau) << ',' << fmt(r.err.u_l2) << ','
         << fmt(r.err.p_l2) << ',' << fmt(r.err.d_energy) << ',' << fmt(r.err.ddot_l2) << ','
         << fmt(r.err.total) << ',' << fmt(r.rate_u) << ',' << fmt(r.rate_p) << ','
         << fmt(r.rate_d) << ',' << fmt(r.rate_ddot) << ',' << fmt(r.rate_total) << '\n';
    const std::string body = os.str();
    const std::string name = std::string("errors_") + study_kind_name(plan.kind);
    sink->write_file(name + ".csv", body);
    sink->write_file(name + ".dat", to_dat(body));
  }
  return rows;
}

namespace {

// divergence-free manufactured velocity from the stream function
// sin^2(pi x) sin^2(pi y), and a zero-mean trigonometric pressure
struct MmsExact {
  static Vec2 u(Vec2 p) {
    const double sx = std::sin(M_PI * p.x), sy = std::sin(M_PI * p.y);
    return {M_PI * sx * sx * std::sin(2.0 * M_PI * p.y),
            -M_PI * std::sin(2.0 * M_PI * p.x) * sy * sy};
  }
  static double pressure(Vec2 p) {
    return std::cos(M_PI * p.x) + std::cos(2.0 * M_PI * p.y);
  }
  // gradient rows: du1/dx du1/dy ; du2/dx du2/dy
  static std::array<double, 4> grad_u(Vec2 p) {
    const double pi2 = M_PI * M_PI;
    const double sx = std::sin(M_PI * p.x), sy = std::sin(M_PI * p.y);
    const double s2x = std::sin(2.0 * M_PI * p.x), s2y = std::sin(2.0 * M_PI * p.y);
    const double c2x = std::cos(2.0 * M_PI * p.x), c2y = std::cos(2.0 * M_PI * p.y);
    return {pi2 * s2x * s2y, 2.0 * pi2 * sx * sx * c2y, -2.0 * pi2 * c2x * sy * sy,
            -pi2 * s2x * s2y};
  }
  static Vec2 body_force(Vec2 p, double mu) {
    const double pi3 = M_PI * M_PI * M_PI;
    const double s2x = std::sin(2.0 * M_PI * p.x), s2y = std::sin(2.0 * M_PI * p.y);
    const double c2x = std::cos(2.0 * M_PI * p.x), c2y = std::cos(2.0 * M_PI * p.y);
    const double lap1 = 2.0 * pi3 * s2y * (2.0 * c2x - 1.0);
    const double lap2 = 2.0 * pi3 * s2x * (1.0 - 2.0 * c2y);
    return {-mu * lap1 - M_PI * std::sin(M_PI * p.x),
            -mu * lap2 - 2.0 * M_PI * std::sin(2.0 * M_PI * p.y)};
  }
};

struct MmsErrors {
  double u_l2 = 0.0, u_h1 = 0.0, p_l2 = 0.0;
};

MmsErrors solve_mms(int n, double mu, double gamma) {
  FluidMesh mesh = build_unit_square(n);
  FluidParams params;
  params.mu = mu;
  FluidBlocks blocks = assemble_fluid_blocks(mesh, params, gamma);
  const int nv = mesh.num_vertices();

  std::vector<int> vel_map(2 * nv, -1), vel_keep;
  for (int v = 0; v < nv; ++v)
    if (!mesh.on_boundary[v])
      for (int c = 0; c < 2; ++c) {
        vel_map[2 * v + c] = static_cast<int>(vel_keep.size());
        vel_keep.push_back(2 * v + c);
      }
  const int nur = static_cast<int>(vel_keep.size());
  std::vector<int> identity_p(nv);
  for (int i = 0; i < nv; ++i) identity_p[i] = i;

  SparseMat a = blocks.K_f.scaled(2.0 * mu).select(vel_map, nur, vel_map, nur);
  SparseMat b = blocks.B.select(identity_p, nv, vel_map, nur);
  BlockSystem core = compose_system({nur, nv}, {{0, 0, &a, 1.0, false},
                                                {0, 1, &b, 1.0, true},
                                                {1, 0, &b, 1.0, false},
                                                {1, 1, &blocks.S, -1.0, false}});
  std::vector<double> wmean(core.dim(), 0.0);
  for (int i = 0; i < nv; ++i) wmean[nur + i] = blocks.pressure_weight[i];
  BorderedSystem sys(std::move(core), std::move(wmean));

  const QuadratureRule& rule = QuadratureRule::triangle_degree5();
  std::vector<double> load(2 * nv, 0.0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.triangle_area(t);
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      Vec2 x{0.0, 0.0};
      for (int i = 0; i < 3; ++i) x = x + rule.bary[q][i] * mesh.vertices[tri[i]];
      const Vec2 f = MmsExact::body_force(x, mu);
      const double wq = area * rule.weights[q];
      for (int i = 0; i < 3; ++i) {
        load[2 * tri[i]] += wq * rule.bary[q][i] * f.x;
        load[2 * tri[i] + 1] += wq * rule.bary[q][i] * f.y;
      }
    }
  }
  std::vector<double> rhs(sys.dim(), 0.0);
  for (int r = 0; r < nur; ++r) rhs[r] = load[vel_keep[r]];
  std::vector<double> x = sys.solve(rhs, 0.0);

  std::vector<double> uh(2 * nv, 0.0), ph(nv, 0.0);
  for (int r = 0; r < nur; ++r) uh[vel_keep[r]] = x[r];
  for (int i = 0; i < nv; ++i) ph[i] = x[nur + i];

  MmsErrors err;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.triangle_area(t);
    // constant gradient of the discrete velocity on this element
    std::array<Vec2, 3> grad;
    for (int i = 0; i < 3; ++i) {
      Vec2 e = mesh.vertices[tri[(i + 1) % 3]] - mesh.vertices[tri[(i + 2) % 3]];
      grad[i] = Vec2{e.y, -e.x} * (1.0 / (2.0 * area));
    }
    std::array<double, 4> gh{};
    for (int i = 0; i < 3; ++i) {
      gh[0] += uh[2 * tri[i]] * grad[i].x;
      gh[1] += uh[2 * tri[i]] * grad[i].y;
      gh[2] += uh[2 * tri[i] + 1] * grad[i].x;
      gh[3] += uh[2 * tri[i] + 1] * grad[i].y;
    }
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      Vec2 x_q{0.0, 0.0};
      double uh1 = 0.0, uh2 = 0.0, phq = 0.0;
      for (int i = 0; i < 3; ++i) {
        x_q = x_q + rule.bary[q][i] * mesh.vertices[tri[i]];
        uh1 += rule.bary[q][i] * uh[2 * tri[i]];
        uh2 += rule.bary[q][i] * uh[2 * tri[i] + 1];
        phq += rule.bary[q][i] * ph[tri[i]];
      }
      const double wq = area * rule.weights[q];
      const Vec2 ue = MmsExact::u(x_q);
      const std::array<double, 4> ge = MmsExact::grad_u(x_q);
      const double pe = MmsExact::pressure(x_q);
      err.u_l2 += wq * ((uh1 - ue.x) * (uh1 - ue.x) + (uh2 - ue.y) * (uh2 - ue.y));
      double gsum = 0.0;
      for (int c = 0; c < 4; ++c) gsum += (gh[c] - ge[c]) * (gh[c] - ge[c]);
      err.u_h1 += wq * gsum;
      err.p_l2 += wq * (phq - pe) * (phq - pe);
    }
  }
  err.u_l2 = std::sqrt(err.u_l2);
  err.u_h1 = std::sqrt(err.u_h1);
  err.p_l2 = std::sqrt(err.p_l2);
  return err;
}

}  // namespace

std::vector<MmsRow> stokes_mms(const std::vector<int>& ns, double mu, double gamma,
                               std::uint64_t config_hash, OutputSink* sink, int threads) {
  if (ns.empty()) throw std::invalid_argument("stokes_mms: empty mesh ladder");
  for (size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 2) throw std::invalid_argument("stokes_mms: n must be >= 2");
    if (i > 0 && ns[i] <= ns[i - 1])
      throw std::invalid_argument("stokes_mms: n ladder must be strictly increasing");
  }
  if (!(mu > 0.0) || gamma < 0.0)
    throw std::invalid_argument("stokes_mms: bad viscosity or stabilization");
  const int npts = static_cast<int>(ns.size());
  std::vector<MmsErrors> errs(npts);
  run_parallel(npts, threads, [&](int i) { errs[i] = solve_mms(ns[i], mu, gamma); });

  std::vector<MmsRow> rows(npts);
  for (int i = 0; i < npts; ++i) {
    rows[i].n = ns[i];
    rows[i].h = 1.0 / ns[i];
    rows[i].err_u_l2 = errs[i].u_l2;
    rows[i].err_u_h1 = errs[i].u_h1;
    rows[i].err_p_l2 = errs[i].p_l2;
    if (i == 0) {
      rows[i].rate_u_l2 = rows[i].rate_u_h1 = rows[i].rate_p_l2 = std::nan("");
    } else {
      rows[i].rate_u_l2 = safe_rate(errs[i - 1].u_l2, errs[i].u_l2);
      rows[i].rate_u_h1 = safe_rate(errs[i - 1].u_h1, errs[i].u_h1);
      rows[i].rate_p_l2 = safe_rate(errs[i - 1].p_l2, errs[i].p_l2);
    }
  }

  if (sink) {
    std::ostringstream os;
    os << "# n,h,err_u_l2,err_u_h1,err_p_l2,rate_u_l2,rate_u_h1,rate_p_l2\n";
    os << "# config_hash=" << fmt_hash(config_hash) << "\n";
    for (const auto& r : rows)
      os << r.n << ',' << fmt(r.h) << ',' << fmt(r.err_u_l2) << ',' << fmt(r.err_u_h1) << ','
         << fmt(r.err_p_l2) << ',' << fmt(r.rate_u_l2) << ',' << fmt(r.rate_u_h1) << ','
         << fmt(r.rate_p_l2) << '\n';
    const std::string body = os.str();
    sink->write_file("errors_stokes.csv", body);
    sink->write_file("errors_stokes.dat", to_dat(body));
  }
  return rows;
}

}  // namespace fsi
