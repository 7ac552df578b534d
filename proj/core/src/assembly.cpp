/// @file assembly.cpp
#include "fsi/assembly.hpp"

#include <cmath>
#include <stdexcept>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

struct TriGeom {
  std::array<Vec2, 3> p;
  std::array<Vec2, 3> grad;   // basis gradients, constant on the element
  double area = 0.0;
};

TriGeom tri_geom(const FluidMesh& mesh, int t) {
  TriGeom g;
  const auto& tri = mesh.triangles[t];
  for (int i = 0; i < 3; ++i) g.p[i] = mesh.vertices[tri[i]];
  g.area = mesh.triangle_area(t);
  for (int i = 0; i < 3; ++i) {
    Vec2 e = g.p[(i + 1) % 3] - g.p[(i + 2) % 3];
    g.grad[i] = Vec2{e.y, -e.x} * (1.0 / (2.0 * g.area));
  }
  return g;
}

std::array<double, 3> barycentric(const TriGeom& g, Vec2 x) {
  auto cross = [](Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; };
  double denom = cross(g.p[1] - g.p[0], g.p[2] - g.p[0]);
  double lc = cross(g.p[1] - g.p[0], x - g.p[0]) / denom;
  double lb = cross(x - g.p[0], g.p[2] - g.p[0]) / denom;
  return {1.0 - lb - lc, lb, lc};
}

// curve segment local matrix l/6 * [[2,1],[1,2]] appended componentwise
void add_segment_mass(std::vector<Triplet>& out, int n0, int n1, double l, double coef) {
  const double d = coef * l / 3.0, o = coef * l / 6.0;
  for (int c = 0; c < 2; ++c) {
    out.push_back({2 * n0 + c, 2 * n0 + c, d});
    out.push_back({2 * n1 + c, 2 * n1 + c, d});
    out.push_back({2 * n0 + c, 2 * n1 + c, o});
    out.push_back({2 * n1 + c, 2 * n0 + c, o});
  }
}

}  // namespace

void FluidParams::validate() const {
  if (!(rho_f > 0.0)) throw std::invalid_argument("FluidParams: rho_f must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("FluidParams: mu must be positive");
}

void SolidModel::validate() const {
  if (!(rho_s > 0.0)) throw std::invalid_argument("SolidModel: rho_s must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("SolidModel: eps must be positive");
  if (kind == SolidKind::GeneralizedString) {
    if (lambda0 < 0.0 || lambda1 < 0.0)
      throw std::invalid_argument("SolidModel: string coefficients must be nonnegative");
  } else {
    if (!(k_coef >= 0.0)) throw std::invalid_argument("SolidModel: k_coef must be nonnegative");
  }
}

SolidModel make_string_model(double rho_s, double eps, double young, double poisson,
                             double radius) {
  if (!(young > 0.0) || !(radius > 0.0) || !(poisson > -1.0) || !(poisson < 1.0))
    throw std::invalid_argument("make_string_model: bad material constants");
  SolidModel m;
  m.rho_s = rho_s;
  m.eps = eps;
  m.kind = SolidKind::GeneralizedString;
  m.lambda0 = young * eps / (2.0 * (1.0 + poisson));
  m.lambda1 = young * eps / (radius * radius * (1.0 - poisson * poisson));
  m.validate();
  return m;
}

const QuadratureRule& QuadratureRule::triangle_degree2() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    r.bary = {{{0.5, 0.5, 0.0}}, {{0.0, 0.5, 0.5}}, {{0.5, 0.0, 0.5}}};
    r.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return r;
  }();
  return rule;
}

const QuadratureRule& QuadratureRule::triangle_degree5() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    const double a1 = 0.0597158717897698, b1 = 0.4701420641051151;
    const double a2 = 0.7974269853530873, b2 = 0.1012865073234563;
    const double w0 = 0.225, w1 = 0.1323941527885062, w2 = 0.1259391805448271;
    r.bary = {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}},
              {{a1, b1, b1}}, {{b1, a1, b1}}, {{b1, b1, a1}},
              {{a2, b2, b2}}, {{b2, a2, b2}}, {{b2, b2, a2}}};
    r.weights = {w0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

const QuadratureRule& QuadratureRule::segment_gauss3() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    const double x = std::sqrt(3.0 / 5.0);
    r.bary = {{{-x, 0.0, 0.0}}, {{0.0, 0.0, 0.0}}, {{x, 0.0, 0.0}}};
    r.weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    return r;
  }();
  return rule;
}

FluidBlocks assemble_fluid_blocks(const FluidMesh& mesh, const FluidParams& params,
                                  double gamma) {
  params.validate();
  if (gamma < 0.0) throw std::invalid_argument("assemble_fluid_blocks: gamma must be >= 0");
  const int nv = mesh.num_vertices();
  std::vector<Triplet> tm, tk, tb, ts, tmp;
  std::vector<double> weight(nv, 0.0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    TriGeom g = tri_geom(mesh, t);
    const auto& tri = mesh.triangles[t];
    const double area = g.area;
    const double hk = mesh.triangle_diameter(t);
    for (int i = 0; i < 3; ++i) {
      weight[tri[i]] += area / 3.0;
      for (int j = 0; j < 3; ++j) {
        const double mass = area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0);
        tmp.push_back({tri[i], tri[j], mass});
        for (int c = 0; c < 2; ++c) tm.push_back({2 * tri[i] + c, 2 * tri[j] + c, mass});
        const double gg = g.grad[i].dot(g.grad[j]);
        ts.push_back({tri[i], tri[j], gamma * hk * hk * area * gg});
        const double gi[2] = {g.grad[i].x, g.grad[i].y};
        const double gj[2] = {g.grad[j].x, g.grad[j].y};
        for (int c = 0; c < 2; ++c) {
          for (int e = 0; e < 2; ++e) {
            double val = 0.5 * area * ((c == e ? gg : 0.0) + gj[c] * gi[e]);
            tk.push_back({2 * tri[i] + c, 2 * tri[j] + e, val});
          }
        }
        // -(div u, q): q = basis i (integral area/3 on the element),
        // div(phi_j e_e) = grad_j[e]
        for (int e = 0; e < 2; ++e)
          tb.push_back({tri[i], 2 * tri[j] + e, -(area / 3.0) * gj[e]});
      }
    }
  }
  FluidBlocks out;
  out.M_f = SparseMat::from_triplets(2 * nv, 2 * nv, std::move(tm));
  out.K_f = SparseMat::from_triplets(2 * nv, 2 * nv, std::move(tk));
  out.B = SparseMat::from_triplets(nv, 2 * nv, std::move(tb));
  out.S = SparseMat::from_triplets(nv, nv, std::move(ts));
  out.M_p = SparseMat::from_triplets(nv, nv, std::move(tmp));
  out.pressure_weight = std::move(weight);
  return out;
}

SolidBlocks assemble_solid_blocks(const SolidMesh& mesh, const SolidModel& model) {
  model.validate();
  const int nd = 2 * mesh.num_nodes();
  std::vector<Triplet> tm, tk;
  for (int s = 0; s < mesh.num_segments(); ++s) {
    const int n0 = mesh.segments[s][0], n1 = mesh.segments[s][1];
    const double l = mesh.lengths[s];
    add_segment_mass(tm, n0, n1, l, 1.0);
    if (model.kind == SolidKind::GeneralizedString) {
      const double k = model.lambda0 / l;
      for (int c = 0; c < 2; ++c) {
        tk.push_back({2 * n0 + c, 2 * n0 + c, k});
        tk.push_back({2 * n1 + c, 2 * n1 + c, k});
        tk.push_back({2 * n0 + c, 2 * n1 + c, -k});
        tk.push_back({2 * n1 + c, 2 * n0 + c, -k});
      }
      add_segment_mass(tk, n0, n1, l, model.lambda1);
    } else {
      add_segment_mass(tk, n0, n1, l, model.k_coef);
    }
  }
  SolidBlocks out;
  out.M_s = SparseMat::from_triplets(nd, nd, std::move(tm));
  out.K_s = SparseMat::from_triplets(nd, nd, std::move(tk));
  return out;
}

SparseMat assemble_coupling_solid(const SolidMesh& mesh) {
  const int nd = 2 * mesh.num_nodes();
  std::vector<Triplet> t;
  for (int s = 0; s < mesh.num_segments(); ++s)
    add_segment_mass(t, mesh.segments[s][0], mesh.segments[s][1], mesh.lengths[s], 1.0);
  return SparseMat::from_triplets(nd, nd, std::move(t));
}

SparseMat assemble_coupling_fluid(const FluidMesh& fmesh, const SolidMesh& smesh,
                                  const std::vector<Vec2>& positions) {
  if (positions.size() != smesh.nodes.size())
    throw std::invalid_argument("assemble_coupling_fluid: position count mismatch");
  const QuadratureRule& gauss = QuadratureRule::segment_gauss3();
  std::vector<Triplet> trip;
  for (int s = 0; s < smesh.num_segments(); ++s) {
    const int n0 = smesh.segments[s][0], n1 = smesh.segments[s][1];
    const Vec2 q0 = positions[n0], q1 = positions[n1];
    const double l_ref = smesh.lengths[s];
    SegmentCut cut = cut_segment(fmesh, q0, q1);
    for (const auto& piece : cut.pieces) {
      const double ta = piece.s0 / cut.length, tb = piece.s1 / cut.length;
      TriGeom g = tri_geom(fmesh, piece.tri);
      const auto& tri = fmesh.triangles[piece.tri];
      for (size_t q = 0; q < gauss.weights.size(); ++q) {
        const double t = ta + 0.5 * (tb - ta) * (1.0 + gauss.bary[q][0]);
        const double w = gauss.weights[q] * 0.5 * (tb - ta) * l_ref;
        const Vec2 x = q0 + t * (q1 - q0);
        const std::array<double, 3> lam = barycentric(g, x);
        const double zeta[2] = {1.0 - t, t};
        const int node[2] = {n0, n1};
        for (int i = 0; i < 3; ++i) {
          for (int a = 0; a < 2; ++a) {
            const double val = w * zeta[a] * lam[i];
            for (int c = 0; c < 2; ++c)
              trip.push_back({2 * tri[i] + c, 2 * node[a] + c, val});
          }
        }
      }
    }
  }
  return SparseMat::from_triplets(2 * fmesh.num_vertices(), 2 * smesh.num_nodes(),
                                  std::move(trip));
}

std::vector<double> apply_discrete_solid_operator(const SparseMat& m_s, const SparseMat& k_s,
                                                  const std::vector<double>& w) {
  LuFactor mf(m_s);
  return mf.solve(k_s.apply(w));
}

AssembledOperators assemble_all(const FluidMesh& fmesh, const SolidMesh& smesh,
                                const FluidParams& params, const SolidModel& model,
                                double gamma, const std::vector<Vec2>& positions) {
  AssembledOperators ops;
  ops.fluid = assemble_fluid_blocks(fmesh, params, gamma);
  ops.solid = assemble_solid_blocks(smesh, model);
  ops.L_s = assemble_coupling_solid(smesh);
  ops.L_f = assemble_coupling_fluid(fmesh, smesh, positions);
  return ops;
}

}  // namespace fsi
