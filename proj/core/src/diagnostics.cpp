/// @file diagnostics.cpp
#include "fsi/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "fsi/errors.hpp"

namespace fsi {

double energy(const CoupledState& st, const AssembledOperators& ops, const SchemeConfig& cfg) {
  const double rse = cfg.solid.rho_s * cfg.solid.eps;
  return 0.5 * cfg.fluid.rho_f * quad(ops.fluid.M_f, st.u) +
         0.5 * rse * quad(ops.solid.M_s, st.ddot) + 0.5 * quad(ops.solid.K_s, st.d);
}

double energy_alt(const CoupledState& st, const AssembledOperators& ops,
                  const SchemeConfig& cfg) {
  const double rse = cfg.solid.rho_s * cfg.solid.eps;
  return cfg.fluid.rho_f * quad(ops.fluid.M_f, st.u) + rse * quad(ops.solid.M_s, st.ddot) +
         quad(ops.solid.K_s, st.d);
}

double energy_plain(const CoupledState& st, const AssembledOperators& ops) {
  return quad(ops.fluid.M_f, st.u) + quad(ops.solid.M_s, st.ddot) +
         quad(ops.solid.K_s, st.d);
}

namespace {

std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out = a;
  axpy(-1.0, b, out);
  return out;
}

}  // namespace

double dissipation_increment(const CoupledState& prev, const CoupledState& next,
                             const AssembledOperators& ops, const SchemeConfig& cfg) {
  const double tau = cfg.tau;
  const double rse = cfg.solid.rho_s * cfg.solid.eps;
  double out = 2.0 * cfg.fluid.mu * tau * quad(ops.fluid.K_f, next.u);
  out += tau * quad(ops.fluid.S, next.p);
  out += 0.5 * cfg.fluid.rho_f * quad(ops.fluid.M_f, diff(next.u, prev.u));
  out += 0.5 * rse * quad(ops.solid.M_s, diff(next.ddot, prev.ddot));
  out += 0.5 * quad(ops.solid.K_s, diff(next.d, prev.d));
  return out;
}

double dissipation_alt_increment(const CoupledState& prev, const CoupledState& next,
                                 const AssembledOperators& ops, const SchemeConfig& cfg) {
  if (cfg.scheme == Scheme::Monolithic || cfg.scheme == Scheme::MonolithicLinearized)
    return dissipation_increment(prev, next, ops, cfg);
  const double tau = cfg.tau;
  const double rse = cfg.solid.rho_s * cfg.solid.eps;
  double out = tau * quad(ops.fluid.K_f, next.u) + tau * quad(ops.fluid.S, next.p);
  out += cfg.fluid.rho_f * quad(ops.fluid.M_f, diff(next.u, prev.u));
  out += rse * quad(ops.solid.M_s, diff(next.ddot, prev.ddot));
  if (cfg.scheme == Scheme::Alg3) out += tau * tau * quad(ops.solid.K_s, next.ddot);
  return out;
}

namespace {

// coarse P1 fluid field evaluated at a point, one or two components
double eval_scalar(const FluidMesh& mesh, const std::vector<double>& nodal, Vec2 x) {
  Located loc = locate_point(mesh, x);
  const auto& tri = mesh.triangles[loc.tri];
  double v = 0.0;
  for (int i = 0; i < 3; ++i) v += loc.bary[i] * nodal[tri[i]];
  return v;
}

}  // namespace

ErrorReport error_vs_reference(const CoupledState& coarse, const FluidMesh& coarse_fmesh,
                               const SolidMesh& coarse_smesh, const CoupledState& ref,
                               const FluidMesh& ref_fmesh, const SolidMesh& ref_smesh,
                               const AssembledOperators& ref_ops) {
  const int nvr = ref_fmesh.num_vertices();
  // fluid fields: interpolate the coarse solution at reference vertices
  std::vector<double> eu(2 * nvr, 0.0), ep(nvr, 0.0);
  std::vector<double> cu0(coarse_fmesh.num_vertices()), cu1(coarse_fmesh.num_vertices());
  for (int v = 0; v < coarse_fmesh.num_vertices(); ++v) {
    cu0[v] = coarse.u[2 * v];
    cu1[v] = coarse.u[2 * v + 1];
  }
  for (int v = 0; v < nvr; ++v) {
    Vec2 x = ref_fmesh.vertices[v];
    eu[2 * v] = ref.u[2 * v] - eval_scalar(coarse_fmesh, cu0, x);
    eu[2 * v + 1] = ref.u[2 * v + 1] - eval_scalar(coarse_fmesh, cu1, x);
    ep[v] = ref.p[v] - eval_scalar(coarse_fmesh, coarse.p, x);
  }
  // curve fields: shared uniform parametrization, reference grid nested in it
  const int mc = coarse_smesh.num_nodes(), mr = ref_smesh.num_nodes();
  if (mr % mc != 0)
    throw std::invalid_argument(
        "error_vs_reference: reference curve nodes must be a multiple of the coarse count");
  const int q = mr / mc;
  std::vector<double> ed(2 * mr, 0.0), edd(2 * mr, 0.0);
  for (int j = 0; j < mr; ++j) {
    const int k = j / q;
    const int k1 = (k + 1) % mc;
    const double t = static_cast<double>(j % q) / q;
    for (int c = 0; c < 2; ++c) {
      double dc = (1.0 - t) * coarse.d[2 * k + c] + t * coarse.d[2 * k1 + c];
      double vc = (1.0 - t) * coarse.ddot[2 * k + c] + t * coarse.ddot[2 * k1 + c];
      ed[2 * j + c] = ref.d[2 * j + c] - dc;
      edd[2 * j + c] = ref.ddot[2 * j + c] - vc;
    }
  }
  ErrorReport rep;
  rep.u_l2 = std::sqrt(quad(ref_ops.fluid.M_f, eu));
  rep.p_l2 = std::sqrt(quad(ref_ops.fluid.M_p, ep));
  rep.d_energy = std::sqrt(quad(ref_ops.solid.K_s, ed));
  rep.ddot_l2 = std::sqrt(quad(ref_ops.solid.M_s, edd));
  rep.total = std::sqrt(rep.u_l2 * rep.u_l2 + rep.d_energy * rep.d_energy +
                        rep.ddot_l2 * rep.ddot_l2);
  return rep;
}

double convergence_rate(double err_coarse, double err_fine) {
  if (!(err_coarse > 0.0) || !(err_fine > 0.0))
    throw std::invalid_argument("convergence_rate: errors must be positive");
  return std::log2(err_coarse / err_fine);
}

double stability_bound_first_order(const AssembledOperators& ops, const SchemeConfig& cfg,
                                   const std::vector<double>& d0,
                                   const std::vector<double>& ddot0) {
  const double tau = cfg.tau;
  const double rse = cfg.solid.rho_s * cfg.solid.eps;
  std::vector<double> kd = ops.solid.K_s.apply(d0);
  LuFactor mf(ops.solid.M_s);
  const double op_norm_sq = dot(kd, mf.solve(kd));
  return 0.5 * tau * tau * quad(ops.solid.K_s, ddot0) +
         0.5 * tau * tau / rse * op_norm_sq;
}

}  // namespace fsi
