/// @file assembly.hpp
/// Finite element operators: piecewise-linear velocity/pressure blocks on the
/// background mesh, lumped-free mass and stiffness for the immersed curve, and
/// the interface coupling matrix evaluated at the current curve position.
/// All blocks are raw bilinear forms; physical scalings (density over time
/// step, viscosity, ...) are applied by the time-stepping layer.
#pragma once

#include <array>
#include <vector>

#include "fsi/linalg.hpp"
#include "fsi/mesh.hpp"

namespace fsi {

struct FluidParams {
  double rho_f = 1.0;   ///< fluid density
  double mu = 0.1;      ///< dynamic viscosity

  void validate() const;
};

enum class SolidKind { GeneralizedString, Membrane };

struct SolidModel {
  double rho_s = 1.0;    ///< solid density
  double eps = 0.1;      ///< structural thickness
  SolidKind kind = SolidKind::GeneralizedString;
  double lambda0 = 1.0;  ///< string: tension coefficient (second-difference term)
  double lambda1 = 10.0; ///< string: zeroth-order restoring coefficient
  double k_coef = 10.0;  ///< membrane: stiffness = k_coef * mass

  void validate() const;
};

/// Translate material constants (Young modulus, Poisson ratio, reference
/// radius) into the two string coefficients.
SolidModel make_string_model(double rho_s, double eps, double young, double poisson,
                             double radius);

/// Fixed quadrature rules. Triangle rules store barycentric points with
/// weights summing to 1 (multiply by the element area); the segment rule
/// stores the abscissa in bary[0] over [-1,1] with weights summing to 2.
struct QuadratureRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;

  static const QuadratureRule& triangle_degree2();
  static const QuadratureRule& triangle_degree5();
  static const QuadratureRule& segment_gauss3();
};

/// Velocity/pressure operators. Velocity dof = 2*vertex + component,
/// pressure dof = vertex.
///   M_f : vector mass           (2V x 2V)
///   K_f : (eps(u), eps(v))      (2V x 2V), no viscosity factor
///   B   : -(div u, q)           (V x 2V)
///   S   : gamma * sum_K h_K^2 (grad p, grad q)_K   (V x V)
///   M_p : scalar mass           (V x V)
///   pressure_weight : integrals of the pressure basis functions
struct FluidBlocks {
  SparseMat M_f, K_f, B, S, M_p;
  std::vector<double> pressure_weight;
};

FluidBlocks assemble_fluid_blocks(const FluidMesh& mesh, const FluidParams& params,
                                  double gamma);

/// Solid operators on the reference curve, componentwise (dof = 2*node + c).
///   M_s : curve mass with per-segment reference lengths
///   K_s : generalized string (tension + restoring) or membrane stiffness
struct SolidBlocks {
  SparseMat M_s, K_s;
};

SolidBlocks assemble_solid_blocks(const SolidMesh& mesh, const SolidModel& model);

/// Multiplier-side coupling: multiplier and solid spaces coincide, so this is
/// exactly the curve vector mass matrix.
SparseMat assemble_coupling_solid(const SolidMesh& mesh);

/// Fluid-side coupling L_f at the given current node positions. Entry
/// (2v+c, 2k+c) integrates (multiplier basis k) * (fluid basis v evaluated
/// along the deformed curve) against the reference arclength measure.
/// Three-point Gauss per cut piece integrates the degree-2 integrand exactly.
SparseMat assemble_coupling_fluid(const FluidMesh& fmesh, const SolidMesh& smesh,
                                  const std::vector<Vec2>& positions);

/// M_s^{-1} (K_s w): one-shot convenience; factors the mass matrix anew.
std::vector<double> apply_discrete_solid_operator(const SparseMat& m_s, const SparseMat& k_s,
                                                  const std::vector<double>& w);

/// Everything the schemes need, bundled.
struct AssembledOperators {
  FluidBlocks fluid;
  SolidBlocks solid;
  SparseMat L_s;
  SparseMat L_f;
};

AssembledOperators assemble_all(const FluidMesh& fmesh, const SolidMesh& smesh,
                                const FluidParams& params, const SolidModel& model,
                                double gamma, const std::vector<Vec2>& positions);

}  // namespace fsi
