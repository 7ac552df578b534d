/// @file schemes.cpp
#include "fsi/schemes.hpp"

#include <cmath>
#include <stdexcept>

#include "fsi/errors.hpp"

namespace fsi {

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Monolithic: return "monolithic";
    case Scheme::MonolithicLinearized: return "monolithic_linearized";
    case Scheme::Alg2: return "alg2";
    case Scheme::Alg3: return "alg3";
  }
  return "?";
}

void SchemeConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("SchemeConfig: tau must be positive");
  if (gamma < 0.0) throw std::invalid_argument("SchemeConfig: gamma must be >= 0");
  fluid.validate();
  solid.validate();
  if (extrapolation < 0 || extrapolation > 2)
    throw std::invalid_argument("SchemeConfig: extrapolation order must be 0, 1 or 2");
  if (scheme == Scheme::Alg2 && extrapolation == 0)
    throw std::invalid_argument(
        "SchemeConfig: the uncorrected explicit-force scheme requires extrapolation 1 or 2");
}

std::vector<double> extrapolate(int order, double tau, const std::vector<double>& d_prev,
                                const std::vector<double>& ddot_prev) {
  if (order < 0 || order > 2) throw std::invalid_argument("extrapolate: order must be 0, 1 or 2");
  if (d_prev.size() != ddot_prev.size())
    throw std::invalid_argument("extrapolate: size mismatch");
  std::vector<double> out(d_prev.size(), 0.0);
  if (order >= 1) out = d_prev;
  if (order == 2) axpy(tau, ddot_prev, out);
  return out;
}

CoupledState init_state(const FluidMesh& fmesh, const SolidMesh& smesh,
                        const std::vector<double>& d0, const std::vector<double>& ddot0,
                        const std::vector<double>& u0, double tau) {
  const size_t ns = 2 * static_cast<size_t>(smesh.num_nodes());
  const size_t nu = 2 * static_cast<size_t>(fmesh.num_vertices());
  if (d0.size() != ns || ddot0.size() != ns)
    throw std::invalid_argument("init_state: structure vector size mismatch");
  if (!u0.empty() && u0.size() != nu)
    throw std::invalid_argument("init_state: velocity size mismatch");
  if (!(tau > 0.0)) throw std::invalid_argument("init_state: tau must be positive");
  CoupledState st;
  st.u = u0.empty() ? std::vector<double>(nu, 0.0) : u0;
  st.p.assign(fmesh.num_vertices(), 0.0);
  st.d = d0;
  st.ddot = ddot0;
  st.lambda.assign(ns, 0.0);
  st.d_prev = d0;
  axpy(-tau, ddot0, st.d_prev);
  st.phi.resize(smesh.num_nodes());
  for (int k = 0; k < smesh.num_nodes(); ++k)
    st.phi[k] = smesh.nodes[k] + Vec2{d0[2 * k], d0[2 * k + 1]};
  return st;
}

CflReport cfl_check(const SchemeConfig& cfg, const SparseMat& m_s, const SparseMat& k_s) {
  cfg.validate();
  CflReport rep;
  rep.lambda_max = generalized_eig_max(k_s, m_s);
  const double tau = cfg.tau;
  const double rse = cfg.solid.rho_s * cfg.solid.eps;
  rep.alg2_margin = rse - tau * tau * rep.lambda_max;
  rep.alg2_ok = rep.alg2_margin > 0.0;
  const double t6 = std::pow(tau, 6), l3 = std::pow(rep.lambda_max, 3);
  rep.alg3_r2_margin = rse * rse * rse - 2.0 * t6 * l3;
  rep.alg3_r2_ok = rep.alg3_r2_margin > 0.0;
  rep.unconditional = cfg.scheme == Scheme::Monolithic ||
                      cfg.scheme == Scheme::MonolithicLinearized ||
                      (cfg.scheme == Scheme::Alg3 && cfg.extrapolation <= 1);
  return rep;
}

struct Stepper::SolveResult {
  std::vector<double> u;        // full length, zeros on the boundary
  std::vector<double> p;
  std::vector<double> solid;    // displacement or velocity, by scheme
  std::vector<double> lambda;
  double scalar = 0.0;
};

Stepper::Stepper(FluidMesh fmesh, SolidMesh smesh, const SchemeConfig& cfg,
                 CoupledState initial)
    : fmesh_(std::move(fmesh)), smesh_(std::move(smesh)), cfg_(cfg), state_(std::move(initial)) {
  cfg_.validate();
  const int nv = fmesh_.num_vertices();
  const int ns = 2 * smesh_.num_nodes();
  if (static_cast<int>(state_.u.size()) != 2 * nv ||
      static_cast<int>(state_.p.size()) != nv ||
      static_cast<int>(state_.d.size()) != ns ||
      static_cast<int>(state_.ddot.size()) != ns ||
      static_cast<int>(state_.lambda.size()) != ns ||
      static_cast<int>(state_.d_prev.size()) != ns ||
      static_cast<int>(state_.phi.size()) != smesh_.num_nodes())
    throw std::invalid_argument("Stepper: state sizes do not match the meshes");

  ops_.fluid = assemble_fluid_blocks(fmesh_, cfg_.fluid, cfg_.gamma);
  ops_.solid = assemble_solid_blocks(smesh_, cfg_.solid);
  ops_.L_s = assemble_coupling_solid(smesh_);
  ops_.L_f = assemble_coupling_fluid(fmesh_, smesh_, state_.phi);

  vel_map_.assign(2 * nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (!fmesh_.on_boundary[v]) {
      for (int c = 0; c < 2; ++c) {
        vel_map_[2 * v + c] = static_cast<int>(vel_keep_.size());
        vel_keep_.push_back(2 * v + c);
      }
    }
  }
  identity_p_.resize(nv);
  for (int i = 0; i < nv; ++i) identity_p_[i] = i;
  identity_s_.resize(ns);
  for (int i = 0; i < ns; ++i) identity_s_[i] = i;

  const int nur = static_cast<int>(vel_keep_.size());
  const double tau = cfg_.tau;
  const double rse = cfg_.solid.rho_s * cfg_.solid.eps;
  std::vector<int> identity_u(2 * nv);
  for (int i = 0; i < 2 * nv; ++i) identity_u[i] = i;
  SparseMat a_f_full = SparseMat::sum(ops_.fluid.M_f, cfg_.fluid.rho_f / tau, ops_.fluid.K_f,
                                      2.0 * cfg_.fluid.mu);
  A_f_red_ = a_f_full.select(vel_map_, nur, vel_map_, nur);
  B_red_ = ops_.fluid.B.select(identity_p_, nv, vel_map_, nur);
  L_f_red_ = ops_.L_f.select(vel_map_, nur, identity_s_, ns);
  A_s_mono_ = SparseMat::sum(ops_.solid.M_s, rse / (tau * tau), ops_.solid.K_s, 1.0);
  mass_solid_ = std::make_unique<LuFactor>(ops_.solid.M_s);
  if (cfg_.scheme == Scheme::Alg3)
    stage2_ = std::make_unique<LuFactor>(
        SparseMat::sum(ops_.solid.M_s, rse / tau, ops_.solid.K_s, tau));
  coupling_current_ = true;
}

Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;

void Stepper::refresh_coupling() {
  if (cfg_.scheme == Scheme::MonolithicLinearized) return;   // frozen interface
  if (coupling_current_) return;
  ops_.L_f = assemble_coupling_fluid(fmesh_, smesh_, state_.phi);
  L_f_red_ = ops_.L_f.select(vel_map_, static_cast<int>(vel_keep_.size()), identity_s_,
                             2 * smesh_.num_nodes());
  cached_system_.reset();
  coupling_current_ = true;
}

BorderedSystem Stepper::build_stage1(double solid_diag_tau_power, double kinematic_scale) {
  // solid_diag_tau_power selects the (2,2) block: 2 -> implicit displacement
  // form (rho_s eps / tau^2) M_s + K_s, 1 -> velocity form (rho_s eps/tau) M_s
  const int nur = static_cast<int>(vel_keep_.size());
  const int nv = fmesh_.num_vertices();
  const int ns = 2 * smesh_.num_nodes();
  const double tau = cfg_.tau;
  const double rse = cfg_.solid.rho_s * cfg_.solid.eps;
  SparseMat a_s_vel;
  const SparseMat* a_s = &A_s_mono_;
  if (solid_diag_tau_power != 2.0) {
    a_s_vel = ops_.solid.M_s.scaled(rse / tau);
    a_s = &a_s_vel;
  }
  std::vector<BlockEntry> entries = {
      {0, 0, &A_f_red_, 1.0, false},
      {0, 1, &B_red_, 1.0, true},
      {0, 3, &L_f_red_, 1.0, false},
      {1, 0, &B_red_, 1.0, false},
      {1, 1, &ops_.fluid.S, -1.0, false},
      {2, 2, a_s, 1.0, false},
      {2, 3, &ops_.L_s, -1.0, false},
      {3, 0, &L_f_red_, 1.0, true},
      {3, 2, &ops_.L_s, kinematic_scale, false},
  };
  BlockSystem core = compose_system({nur, nv, ns, ns}, entries);
  // mean-pressure constraint as a bordered scalar; kept out of the sparse
  // factorization, where its dense row causes catastrophic fill
  std::vector<double> w(core.dim(), 0.0);
  for (int i = 0; i < nv; ++i) w[nur + i] = ops_.fluid.pressure_weight[i];
  return BorderedSystem(std::move(core), std::move(w));
}

Stepper::SolveResult Stepper::solve_stage1(const std::vector<double>& rhs_solid,
                                           double kinematic_scale,
                                           const std::vector<double>& rhs_multiplier) {
  const int nur = static_cast<int>(vel_keep_.size());
  const int nv = fmesh_.num_vertices();
  const int ns = 2 * smesh_.num_nodes();
  const double tau = cfg_.tau;
  if (!cached_system_) {
    const bool displacement_form = cfg_.scheme == Scheme::Monolithic ||
                                   cfg_.scheme == Scheme::MonolithicLinearized;
    cached_system_ = std::make_unique<BorderedSystem>(
        build_stage1(displacement_form ? 2.0 : 1.0, kinematic_scale));
  }
  std::vector<double> rhs(cached_system_->dim(), 0.0);
  std::vector<double> f_full = ops_.fluid.M_f.apply(state_.u);
  const double su = cfg_.fluid.rho_f / tau;
  for (int r = 0; r < nur; ++r) rhs[r] = su * f_full[vel_keep_[r]];
  for (int i = 0; i < ns; ++i) rhs[nur + nv + i] = rhs_solid[i];
  for (int i = 0; i < ns; ++i) rhs[nur + nv + ns + i] = rhs_multiplier[i];
  SolveResult res;
  std::vector<double> x = cached_system_->solve(rhs, 0.0, &res.scalar);
  res.u.assign(2 * nv, 0.0);
  for (int r = 0; r < nur; ++r) res.u[vel_keep_[r]] = x[r];
  res.p.assign(x.begin() + nur, x.begin() + nur + nv);
  res.solid.assign(x.begin() + nur + nv, x.begin() + nur + nv + ns);
  res.lambda.assign(x.begin() + nur + nv + ns, x.begin() + nur + nv + 2 * ns);
  return res;
}

void Stepper::step() {
  switch (cfg_.scheme) {
    case Scheme::Monolithic:
    case Scheme::MonolithicLinearized: step_monolithic(); break;
    case Scheme::Alg2: step_alg2(); break;
    case Scheme::Alg3: step_alg3(); break;
  }
}

void Stepper::step_monolithic() {
  refresh_coupling();
  const double tau = cfg_.tau;
  const double rse = cfg_.solid.rho_s * cfg_.solid.eps;
  // solid momentum rhs: (rho_s eps / tau^2) M_s (2 d^{n-1} - d^{n-2})
  std::vector<double> hist = scaled(state_.d, 2.0);
  axpy(-1.0, state_.d_prev, hist);
  std::vector<double> g = scaled(ops_.solid.M_s.apply(hist), rse / (tau * tau));
  // kinematic rhs: -(1/tau) L_s d^{n-1}
  std::vector<double> m = scaled(ops_.L_s.apply(state_.d), -1.0 / tau);
  SolveResult res = solve_stage1(g, -1.0 / tau, m);

  std::vector<double> delta = res.solid;
  axpy(-1.0, state_.d, delta);
  std::vector<double> kin = ops_.L_f.apply_transpose(res.u);
  axpy(-1.0 / tau, ops_.L_s.apply(delta), kin);
  state_.kinematic_residual = norm_inf(kin);
  state_.stage_residual = 0.0;

  state_.d_prev = state_.d;
  state_.d = res.solid;
  state_.ddot = scaled(delta, 1.0 / tau);
  state_.u = std::move(res.u);
  state_.p = std::move(res.p);
  state_.lambda = std::move(res.lambda);
  state_.mean_pressure_multiplier = res.scalar;
  for (int k = 0; k < smesh_.num_nodes(); ++k)
    state_.phi[k] = smesh_.nodes[k] + Vec2{state_.d[2 * k], state_.d[2 * k + 1]};
  state_.t += tau;
  state_.step += 1;
  coupling_current_ = false;
}

void Stepper::step_alg2() {
  refresh_coupling();
  const double tau = cfg_.tau;
  const double rse = cfg_.solid.rho_s * cfg_.solid.eps;
  const int ns = 2 * smesh_.num_nodes();
  std::vector<double> dstar = extrapolate(cfg_.extrapolation, tau, state_.d, state_.ddot);
  std::vector<double> g = scaled(ops_.solid.M_s.apply(state_.ddot), rse / tau);
  axpy(-1.0, ops_.solid.K_s.apply(dstar), g);
  SolveResult res = solve_stage1(g, -1.0, std::vector<double>(ns, 0.0));

  std::vector<double> kin = ops_.L_f.apply_transpose(res.u);
  axpy(-1.0, ops_.L_s.apply(res.solid), kin);
  state_.kinematic_residual = norm_inf(kin);
  state_.stage_residual = 0.0;

  state_.d_prev = state_.d;
  axpy(tau, res.solid, state_.d);
  state_.ddot = std::move(res.solid);
  state_.u = std::move(res.u);
  state_.p = std::move(res.p);
  state_.lambda = std::move(res.lambda);
  state_.mean_pressure_multiplier = res.scalar;
  for (int k = 0; k < smesh_.num_nodes(); ++k)
    state_.phi[k] = smesh_.nodes[k] + Vec2{state_.d[2 * k], state_.d[2 * k + 1]};
  state_.t += tau;
  state_.step += 1;
  coupling_current_ = false;
}

void Stepper::step_alg3() {
  refresh_coupling();
  const double tau = cfg_.tau;
  const double rse = cfg_.solid.rho_s * cfg_.solid.eps;
  const int ns = 2 * smesh_.num_nodes();
  if (!stage2_)
    stage2_ = std::make_unique<LuFactor>(
        SparseMat::sum(ops_.solid.M_s, rse / tau, ops_.solid.K_s, tau));
  std::vector<double> dstar = extrapolate(cfg_.extrapolation, tau, state_.d, state_.ddot);
  std::vector<double> g = scaled(ops_.solid.M_s.apply(state_.ddot), rse / tau);
  axpy(-1.0, ops_.solid.K_s.apply(dstar), g);
  SolveResult res = solve_stage1(g, -1.0, std::vector<double>(ns, 0.0));
  const std::vector<double>& ddot_half = res.solid;

  std::vector<double> kin = ops_.L_f.apply_transpose(res.u);
  axpy(-1.0, ops_.L_s.apply(ddot_half), kin);
  state_.kinematic_residual = norm_inf(kin);

  // implicit elastic correction on the structure alone
  std::vector<double> rhs2 = scaled(ops_.solid.M_s.apply(ddot_half), rse / tau);
  std::vector<double> elast = dstar;
  axpy(-1.0, state_.d, elast);
  axpy(1.0, ops_.solid.K_s.apply(elast), rhs2);
  std::vector<double> ddot_n = stage2_->solve(rhs2);

  std::vector<double> d_n = state_.d;
  axpy(tau, ddot_n, d_n);
  // consistency of the two stages, rearranged to avoid the solve operators:
  // M_s (ddot_half - ddot_n) = (tau / rho_s eps) K_s (d_n - dstar)
  std::vector<double> half_minus = ddot_half;
  axpy(-1.0, ddot_n, half_minus);
  std::vector<double> resid = ops_.solid.M_s.apply(half_minus);
  std::vector<double> dd = d_n;
  axpy(-1.0, dstar, dd);
  axpy(-tau / rse, ops_.solid.K_s.apply(dd), resid);
  state_.stage_residual = norm_inf(resid);

  state_.d_prev = state_.d;
  state_.d = std::move(d_n);
  state_.ddot = std::move(ddot_n);
  state_.u = std::move(res.u);
  state_.p = std::move(res.p);
  state_.lambda = std::move(res.lambda);
  state_.mean_pressure_multiplier = res.scalar;
  for (int k = 0; k < smesh_.num_nodes(); ++k)
    state_.phi[k] = smesh_.nodes[k] + Vec2{state_.d[2 * k], state_.d[2 * k + 1]};
  state_.t += tau;
  state_.step += 1;
  coupling_current_ = false;
}

}  // namespace fsi
