/// @file diagnostics.hpp
/// Energy bookkeeping for the coupled schemes and discrete error norms
/// between runs on different resolutions. The primary energy and dissipation
/// pair satisfies an exact per-step balance for the monolithic scheme; the
/// alternative weightings are reported alongside for comparison and are never
/// part of any balance assertion.
#pragma once

#include <vector>

#include "fsi/assembly.hpp"
#include "fsi/mesh.hpp"
#include "fsi/schemes.hpp"

namespace fsi {

/// (rho_f/2) |u|_M^2 + (rho_s eps/2) |ddot|_M^2 + (1/2) |d|_K^2
double energy(const CoupledState& st, const AssembledOperators& ops, const SchemeConfig& cfg);

/// Doubled, viscosity-free weighting: rho_f |u|^2 + rho_s eps |ddot|^2 + |d|_K^2.
double energy_alt(const CoupledState& st, const AssembledOperators& ops,
                  const SchemeConfig& cfg);

/// Fully unweighted sum |u|^2 + |ddot|^2 + |d|_K^2.
double energy_plain(const CoupledState& st, const AssembledOperators& ops);

/// Dissipated amount between two consecutive states under the primary
/// weighting: viscous work, stabilization work, and the three backward-Euler
/// jump terms. Adds exactly to the energy drop for the monolithic scheme.
double dissipation_increment(const CoupledState& prev, const CoupledState& next,
                             const AssembledOperators& ops, const SchemeConfig& cfg);

/// Alternative dissipation weighting used with energy_alt; for the two-stage
/// scheme it includes the elastic jump of the stage correction.
double dissipation_alt_increment(const CoupledState& prev, const CoupledState& next,
                                 const AssembledOperators& ops, const SchemeConfig& cfg);

struct EnergyRecord {
  int step = 0;
  double t = 0.0;
  double energy = 0.0;
  double diss_increment = 0.0;
  double diss_cum = 0.0;
  double balance_defect = 0.0;   ///< energy + diss_cum - initial energy
  double energy_alt = 0.0;
  double energy_plain = 0.0;
  double diss_alt_cum = 0.0;
  double kinematic_residual = 0.0;
  double stage_residual = 0.0;
};

struct ErrorReport {
  double u_l2 = 0.0;       ///< velocity, mass norm on the reference mesh
  double p_l2 = 0.0;       ///< pressure, scalar mass norm
  double d_energy = 0.0;   ///< displacement, elastic energy norm
  double ddot_l2 = 0.0;    ///< structure velocity, curve mass norm
  double total = 0.0;      ///< sqrt(u^2 + d^2 + ddot^2), pressure excluded
};

/// Compare a coarse state against a reference state on finer meshes. Fluid
/// fields are interpolated at reference vertices through point location;
/// curve fields through the shared uniform parametrization, which requires
/// the reference node count to be a multiple of the coarse one.
ErrorReport error_vs_reference(const CoupledState& coarse, const FluidMesh& coarse_fmesh,
                               const SolidMesh& coarse_smesh, const CoupledState& ref,
                               const FluidMesh& ref_fmesh, const SolidMesh& ref_smesh,
                               const AssembledOperators& ref_ops);

/// log2(err_coarse / err_fine); throws std::invalid_argument unless both are
/// positive.
double convergence_rate(double err_coarse, double err_fine);

/// Energy growth allowance of the two-stage scheme with first-order
/// displacement prediction, computed from the initial data:
///   (tau^2/2) |ddot0|_K^2 + (tau^2 / (2 rho_s eps)) (K_s d0)^T M_s^{-1} (K_s d0)
double stability_bound_first_order(const AssembledOperators& ops, const SchemeConfig& cfg,
                                   const std::vector<double>& d0,
                                   const std::vector<double>& ddot0);

}  // namespace fsi
