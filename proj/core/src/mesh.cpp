/// @file mesh.cpp
#include "fsi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

constexpr double kGeomTol = 1e-12;

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

}  // namespace

double Vec2::norm() const { return std::hypot(x, y); }

double FluidMesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
  return 0.5 * cross(b - a, c - a);
}

double FluidMesh::triangle_diameter(int t) const {
  const auto& tri = triangles[t];
  double d = 0.0;
  for (int e = 0; e < 3; ++e) {
    Vec2 va = vertices[tri[e]], vb = vertices[tri[(e + 1) % 3]];
    d = std::max(d, (vb - va).norm());
  }
  return d;
}

FluidMesh build_unit_square(int n) {
  if (n < 1) throw std::invalid_argument("build_unit_square: n must be >= 1");
  FluidMesh mesh;
  mesh.n = n;
  mesh.h = 1.0 / n;
  mesh.vertices.resize(static_cast<size_t>(n + 1) * (n + 1));
  mesh.on_boundary.resize(mesh.vertices.size(), 0);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      int v = mesh.vertex_index(i, j);
      mesh.vertices[v] = {static_cast<double>(i) / n, static_cast<double>(j) / n};
      mesh.on_boundary[v] = (i == 0 || i == n || j == 0 || j == n) ? 1 : 0;
    }
  }
  mesh.triangles.reserve(static_cast<size_t>(2) * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int v00 = mesh.vertex_index(i, j);
      int v10 = mesh.vertex_index(i + 1, j);
      int v01 = mesh.vertex_index(i, j + 1);
      int v11 = mesh.vertex_index(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  return mesh;
}

SolidMesh build_ellipse(Vec2 center, double a, double b, int m) {
  if (m < 3) throw std::invalid_argument("build_ellipse: m must be >= 3");
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("build_ellipse: semi-axes must be positive");
  SolidMesh mesh;
  mesh.nodes.resize(m);
  for (int k = 0; k < m; ++k) {
    double theta = 2.0 * M_PI * k / m;
    mesh.nodes[k] = {center.x + a * std::cos(theta), center.y + b * std::sin(theta)};
    const Vec2& p = mesh.nodes[k];
    if (!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0))
      throw GeometryError("build_ellipse: curve leaves the open unit square");
  }
  mesh.segments.resize(m);
  mesh.lengths.resize(m);
  double lmin = 1e300, lmax = 0.0;
  for (int k = 0; k < m; ++k) {
    mesh.segments[k] = {k, (k + 1) % m};
    double l = (mesh.nodes[(k + 1) % m] - mesh.nodes[k]).norm();
    mesh.lengths[k] = l;
    lmin = std::min(lmin, l);
    lmax = std::max(lmax, l);
  }
  if (!(lmin > 0.0) || lmax / lmin > 4.0)
    throw GeometryError("build_ellipse: segment lengths fail quasi-uniformity (ratio > 4)");
  mesh.h_s = lmax;
  return mesh;
}

Located locate_point(const FluidMesh& mesh, Vec2 x) {
  if (x.x < -kGeomTol || x.x > 1.0 + kGeomTol || x.y < -kGeomTol || x.y > 1.0 + kGeomTol)
    throw OutOfDomainError("locate_point: point outside the unit square");
  int n = mesh.n;
  int ci = std::clamp(static_cast<int>(std::floor(x.x * n)), 0, n - 1);
  int cj = std::clamp(static_cast<int>(std::floor(x.y * n)), 0, n - 1);
  std::vector<int> candidates;
  candidates.reserve(18);
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      int i = ci + di, j = cj + dj;
      if (i < 0 || i >= n || j < 0 || j >= n) continue;
      int base = 2 * (j * n + i);
      candidates.push_back(base);
      candidates.push_back(base + 1);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  for (int t : candidates) {
    const auto& tri = mesh.triangles[t];
    Vec2 pa = mesh.vertices[tri[0]], pb = mesh.vertices[tri[1]], pc = mesh.vertices[tri[2]];
    double denom = cross(pb - pa, pc - pa);
    double lc = cross(pb - pa, x - pa) / denom;
    double lb = cross(x - pa, pc - pa) / denom;
    double la = 1.0 - lb - lc;
    if (la >= -kGeomTol && lb >= -kGeomTol && lc >= -kGeomTol)
      return {t, {la, lb, lc}};
  }
  throw OutOfDomainError("locate_point: no containing triangle in neighborhood");
}

SegmentCut cut_segment(const FluidMesh& mesh, Vec2 p0, Vec2 p1) {
  Vec2 d = p1 - p0;
  double len = d.norm();
  if (len == 0.0) throw std::invalid_argument("cut_segment: zero-length segment");
  for (Vec2 p : {p0, p1}) {
    if (p.x < -kGeomTol || p.x > 1.0 + kGeomTol || p.y < -kGeomTol || p.y > 1.0 + kGeomTol)
      throw OutOfDomainError("cut_segment: segment leaves the unit square");
  }
  int n = mesh.n;
  std::vector<double> ts;
  ts.reserve(static_cast<size_t>(3 * n) + 8);
  ts.push_back(0.0);
  ts.push_back(1.0);
  // crossings with vertical lines x = k/n, horizontal y = k/n, and the cell
  // diagonals y - x = k/n
  if (d.x != 0.0) {
    for (int k = 0; k <= n; ++k) {
      double t = (static_cast<double>(k) / n - p0.x) / d.x;
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  }
  if (d.y != 0.0) {
    for (int k = 0; k <= n; ++k) {
      double t = (static_cast<double>(k) / n - p0.y) / d.y;
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  }
  double ddiag = d.y - d.x;
  if (ddiag != 0.0) {
    double c0 = p0.y - p0.x;
    for (int k = -n; k <= n; ++k) {
      double t = (static_cast<double>(k) / n - c0) / ddiag;
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  SegmentCut cut;
  cut.length = len;
  double prev = 0.0;
  bool first = true;
  for (size_t i = 1; i < ts.size(); ++i) {
    double ta = first ? 0.0 : prev;
    double tb = ts[i];
    if (tb - ta <= kGeomTol) continue;
    Vec2 mid = p0 + (0.5 * (ta + tb)) * d;
    int tri = locate_point(mesh, mid).tri;
    if (!cut.pieces.empty() && cut.pieces.back().tri == tri) {
      cut.pieces.back().s1 = tb * len;
    } else {
      cut.pieces.push_back({ta * len, tb * len, tri});
    }
    prev = tb;
    first = false;
  }
  if (cut.pieces.empty()) throw GeometryError("cut_segment: no pieces produced");
  cut.pieces.front().s0 = 0.0;
  cut.pieces.back().s1 = len;
  return cut;
}

void export_fluid_mesh(const FluidMesh& mesh, const std::string& vertex_path,
                       const std::string& triangle_path) {
  std::ofstream vf(vertex_path);
  if (!vf) throw std::runtime_error("export_fluid_mesh: cannot open " + vertex_path);
  vf << "# vertex,x,y,on_boundary\n";
  char buf[128];
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d\n", v, mesh.vertices[v].x,
                  mesh.vertices[v].y, static_cast<int>(mesh.on_boundary[v]));
    vf << buf;
  }
  std::ofstream tf(triangle_path);
  if (!tf) throw std::runtime_error("export_fluid_mesh: cannot open " + triangle_path);
  tf << "# triangle,v0,v1,v2\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    tf << t << ',' << tri[0] << ',' << tri[1] << ',' << tri[2] << '\n';
  }
}

void export_solid_curve(const SolidMesh& mesh, const std::vector<Vec2>& positions,
                        const std::string& path) {
  if (positions.size() != mesh.nodes.size())
    throw std::invalid_argument("export_solid_curve: position count mismatch");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_solid_curve: cannot open " + path);
  f << "# node,ref_x,ref_y,x,y\n";
  char buf[160];
  for (int k = 0; k < mesh.num_nodes(); ++k) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", k, mesh.nodes[k].x,
                  mesh.nodes[k].y, positions[k].x, positions[k].y);
    f << buf;
  }
}

}  // namespace fsi
