/// @file schemes.hpp
/// Time discretizations of the coupled fluid / immersed-structure problem:
/// a fully implicit monolithic step (with optional frozen interface), a
/// loosely coupled step that treats the elastic force explicitly, and its
/// stabilized two-stage variant with an implicit elastic correction.
/// Unknown ordering inside every linear system: velocity | pressure |
/// structure | multiplier | mean-pressure scalar. Homogeneous velocity
/// boundary values are eliminated from the system; returned fields keep the
/// full dof count with zeros at constrained entries.
#pragma once

#include <memory>
#include <vector>

#include "fsi/assembly.hpp"
#include "fsi/linalg.hpp"
#include "fsi/mesh.hpp"

namespace fsi {

enum class Scheme { Monolithic, MonolithicLinearized, Alg2, Alg3 };

const char* scheme_name(Scheme s);

struct SchemeConfig {
  Scheme scheme = Scheme::Monolithic;
  int extrapolation = 1;   ///< displacement prediction order: 0, 1, or 2
  double tau = 0.05;       ///< time step
  FluidParams fluid;
  SolidModel solid;
  double gamma = 0.05;     ///< pressure stabilization coefficient

  /// Throws std::invalid_argument for nonpositive tau, extrapolation outside
  /// the scheme's admissible set, or bad physical parameters.
  void validate() const;
};

struct CoupledState {
  double t = 0.0;
  int step = 0;
  std::vector<double> u;        ///< velocity, 2 * fluid vertices
  std::vector<double> p;        ///< pressure, fluid vertices
  std::vector<double> d;        ///< structure displacement, 2 * curve nodes
  std::vector<double> ddot;     ///< structure velocity
  std::vector<double> lambda;   ///< interface multiplier
  std::vector<double> d_prev;   ///< displacement one step back
  std::vector<Vec2> phi;        ///< current node positions (reference + d)
  double mean_pressure_multiplier = 0.0;
  double kinematic_residual = 0.0;   ///< interface velocity equation residual
  double stage_residual = 0.0;       ///< two-stage consistency residual
};

/// Displacement predictor: order 0 gives zero, order 1 the previous
/// displacement, order 2 adds tau times the previous structure velocity.
std::vector<double> extrapolate(int order, double tau, const std::vector<double>& d_prev,
                                const std::vector<double>& ddot_prev);

/// States the time loop starts from: given initial displacement and structure
/// velocity (and optionally a velocity field), seeds the one-step history so
/// the first step sees d^{-1} = d0 - tau * ddot0.
CoupledState init_state(const FluidMesh& fmesh, const SolidMesh& smesh,
                        const std::vector<double>& d0, const std::vector<double>& ddot0,
                        const std::vector<double>& u0, double tau);

struct CflReport {
  double lambda_max = 0.0;      ///< largest eigenvalue of K_s w = lambda M_s w
  bool unconditional = false;   ///< configured scheme needs no step restriction
  bool alg2_ok = false;         ///< tau^2 lambda_max < rho_s eps
  double alg2_margin = 0.0;     ///< rho_s eps - tau^2 lambda_max
  bool alg3_r2_ok = false;      ///< 2 tau^6 lambda_max^3 < (rho_s eps)^3
  double alg3_r2_margin = 0.0;  ///< (rho_s eps)^3 - 2 tau^6 lambda_max^3
};

/// Evaluate the step-size restrictions of the explicit-force variants against
/// the structure's spectrum.
CflReport cfl_check(const SchemeConfig& cfg, const SparseMat& m_s, const SparseMat& k_s);

/// Owns the meshes, assembled operators and factorization caches for one run
/// and advances the state one step at a time. The interface coupling block is
/// reassembled at the current curve position before every step, except for
/// MonolithicLinearized which keeps the initial position for the whole run.
class Stepper {
 public:
  Stepper(FluidMesh fmesh, SolidMesh smesh, const SchemeConfig& cfg, CoupledState initial);
  ~Stepper();
  Stepper(Stepper&&) noexcept;

  void step();   ///< dispatch on the configured scheme

  void step_monolithic();
  void step_alg2();
  void step_alg3();

  const CoupledState& state() const { return state_; }
  const SchemeConfig& config() const { return cfg_; }
  const FluidMesh& fluid_mesh() const { return fmesh_; }
  const SolidMesh& solid_mesh() const { return smesh_; }
  /// Operators with L_f as last assembled (initial position before any step).
  const AssembledOperators& ops() const { return ops_; }

 private:
  struct SolveResult;
  void refresh_coupling();
  BorderedSystem build_stage1(double solid_diag_tau_power, double kinematic_scale);
  SolveResult solve_stage1(const std::vector<double>& rhs_solid, double kinematic_scale,
                           const std::vector<double>& rhs_multiplier);

  FluidMesh fmesh_;
  SolidMesh smesh_;
  SchemeConfig cfg_;
  CoupledState state_;
  AssembledOperators ops_;

  std::vector<int> vel_map_;      ///< full velocity dof -> reduced index or -1
  std::vector<int> vel_keep_;     ///< reduced index -> full dof
  std::vector<int> identity_p_;   ///< identity map for pressure dofs
  std::vector<int> identity_s_;   ///< identity map for structure dofs
  SparseMat A_f_red_;             ///< (rho_f/tau) M_f + 2 mu K_f, reduced
  SparseMat B_red_, L_f_red_;
  SparseMat A_s_mono_;            ///< (rho_s eps / tau^2) M_s + K_s
  std::unique_ptr<LuFactor> mass_solid_;     ///< factor of M_s
  std::unique_ptr<LuFactor> stage2_;         ///< factor of (rho_s eps/tau) M_s + tau K_s
  std::unique_ptr<BorderedSystem> cached_system_;
  bool coupling_current_ = false;
};

}  // namespace fsi
