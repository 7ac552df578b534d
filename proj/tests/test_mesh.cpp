#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "doctest.h"
#include "fsi/errors.hpp"
#include "fsi/mesh.hpp"

using fsi::FluidMesh;
using fsi::Vec2;

namespace {

// uniform double in [lo, hi) from the standardized mt19937 stream, avoiding
// the implementation-defined distribution adapters
double uniform(std::mt19937& gen, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(gen()) / 4294967296.0);
}

// exhaustive first-match point location, the oracle for locate_point
int brute_force_locate(const FluidMesh& mesh, Vec2 x) {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    auto cross = [](Vec2 p, Vec2 q) { return p.x * q.y - p.y * q.x; };
    double denom = cross(b - a, c - a);
    double lc = cross(b - a, x - a) / denom;
    double lb = cross(x - a, c - a) / denom;
    double la = 1.0 - lb - lc;
    if (la >= -1e-12 && lb >= -1e-12 && lc >= -1e-12) return t;
  }
  return -1;
}

std::array<double, 3> bary_of(const FluidMesh& mesh, int t, Vec2 x) {
  const auto& tri = mesh.triangles[t];
  Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
  auto cross = [](Vec2 p, Vec2 q) { return p.x * q.y - p.y * q.x; };
  double denom = cross(b - a, c - a);
  double lc = cross(b - a, x - a) / denom;
  double lb = cross(x - a, c - a) / denom;
  return {1.0 - lb - lc, lb, lc};
}

}  // namespace

TEST_CASE("structured mesh basic counts and orientation") {
  FluidMesh mesh = fsi::build_unit_square(2);
  CHECK(mesh.num_vertices() == 9);
  CHECK(mesh.num_triangles() == 8);
  CHECK(mesh.h == doctest::Approx(0.5));
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double a = mesh.triangle_area(t);
    CHECK(a > 0.0);   // counterclockwise
    CHECK(a == doctest::Approx(0.125).epsilon(1e-14));
    total += a;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mesh.vertex_index(0, 0) == 0);
  CHECK(mesh.vertex_index(2, 0) == 2);
  CHECK(mesh.vertex_index(0, 1) == 3);
  CHECK(mesh.vertices[mesh.vertex_index(1, 2)].x == doctest::Approx(0.5));
  CHECK(mesh.vertices[mesh.vertex_index(1, 2)].y == doctest::Approx(1.0));
}

TEST_CASE("structured mesh edge census matches the planar count") {
  const int n = 3;
  FluidMesh mesh = fsi::build_unit_square(n);
  std::set<std::pair<int, int>> edges;
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  // n(n+1) horizontal + n(n+1) vertical + n^2 diagonal
  CHECK(static_cast<int>(edges.size()) == 2 * n * (n + 1) + n * n);
  // Euler: V - E + F = 2 with the outer face
  CHECK(mesh.num_vertices() - static_cast<int>(edges.size()) + mesh.num_triangles() + 1 == 2);
}

TEST_CASE("boundary flags mark exactly the perimeter vertices") {
  FluidMesh mesh = fsi::build_unit_square(4);
  int flagged = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    bool on = mesh.vertices[v].x == 0.0 || mesh.vertices[v].x == 1.0 ||
              mesh.vertices[v].y == 0.0 || mesh.vertices[v].y == 1.0;
    CHECK(static_cast<bool>(mesh.on_boundary[v]) == on);
    flagged += mesh.on_boundary[v];
  }
  CHECK(flagged == 16);
}

TEST_CASE("triangle diameter is the cell hypotenuse") {
  FluidMesh mesh = fsi::build_unit_square(4);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    CHECK(mesh.triangle_diameter(t) == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
}

TEST_CASE("build_unit_square rejects bad sizes") {
  CHECK_THROWS_AS(fsi::build_unit_square(0), std::invalid_argument);
  CHECK_THROWS_AS(fsi::build_unit_square(-3), std::invalid_argument);
}

TEST_CASE("locate_point agrees with exhaustive search") {
  FluidMesh mesh = fsi::build_unit_square(2);
  fsi::Located loc = fsi::locate_point(mesh, {0.3, 0.3});
  CHECK(loc.tri == brute_force_locate(mesh, {0.3, 0.3}));
  CHECK(loc.bary[0] + loc.bary[1] + loc.bary[2] == doctest::Approx(1.0).epsilon(1e-14));
  // barycentric reconstruction
  const auto& tri = mesh.triangles[loc.tri];
  Vec2 rec{0.0, 0.0};
  for (int i = 0; i < 3; ++i) rec = rec + loc.bary[i] * mesh.vertices[tri[i]];
  CHECK(rec.x == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(rec.y == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("locate_point accepts vertices, edges and corners") {
  FluidMesh mesh = fsi::build_unit_square(4);
  for (Vec2 x : {Vec2{0.0, 0.0}, Vec2{1.0, 1.0}, Vec2{0.5, 0.5}, Vec2{0.25, 0.0},
                 Vec2{1.0, 0.375}, Vec2{0.125, 0.125}}) {
    fsi::Located loc = fsi::locate_point(mesh, x);
    CHECK(loc.tri == brute_force_locate(mesh, x));
    for (double l : loc.bary) CHECK(l >= -1e-12);
  }
}

TEST_CASE("locate_point rejects points outside the square") {
  FluidMesh mesh = fsi::build_unit_square(4);
  CHECK_THROWS_AS(fsi::locate_point(mesh, {1.1, 0.5}), fsi::OutOfDomainError);
  CHECK_THROWS_AS(fsi::locate_point(mesh, {0.5, -0.2}), fsi::OutOfDomainError);
  CHECK_THROWS_AS(fsi::locate_point(mesh, {-1e-9, 0.5}), fsi::OutOfDomainError);
}

TEST_CASE("locate_point matches the oracle on random points") {
  std::mt19937 gen(12345);
  for (int n : {2, 3, 5}) {
    FluidMesh mesh = fsi::build_unit_square(n);
    for (int trial = 0; trial < 400; ++trial) {
      Vec2 x{uniform(gen, 0.0, 1.0), uniform(gen, 0.0, 1.0)};
      fsi::Located loc = fsi::locate_point(mesh, x);
      CHECK(loc.tri == brute_force_locate(mesh, x));
      const auto& tri = mesh.triangles[loc.tri];
      Vec2 rec{0.0, 0.0};
      for (int i = 0; i < 3; ++i) rec = rec + loc.bary[i] * mesh.vertices[tri[i]];
      CHECK(std::abs(rec.x - x.x) < 1e-13);
      CHECK(std::abs(rec.y - x.y) < 1e-13);
    }
  }
}

TEST_CASE("cut_segment inside one triangle gives one piece") {
  FluidMesh mesh = fsi::build_unit_square(2);
  fsi::SegmentCut cut = fsi::cut_segment(mesh, {0.1, 0.05}, {0.3, 0.1});
  REQUIRE(cut.pieces.size() == 1);
  CHECK(cut.pieces[0].s0 == 0.0);
  CHECK(cut.pieces[0].s1 == doctest::Approx(cut.length));
  CHECK(cut.pieces[0].tri == fsi::locate_point(mesh, {0.2, 0.075}).tri);
}

TEST_CASE("cut_segment across a cell diagonal gives two pieces") {
  FluidMesh mesh = fsi::build_unit_square(2);
  // crosses y = x inside the first cell
  fsi::SegmentCut cut = fsi::cut_segment(mesh, {0.3, 0.1}, {0.1, 0.3});
  REQUIRE(cut.pieces.size() == 2);
  CHECK(cut.pieces[0].s1 == doctest::Approx(cut.pieces[1].s0));
  CHECK(cut.pieces[0].tri != cut.pieces[1].tri);
  CHECK(cut.pieces[0].s1 == doctest::Approx(0.5 * cut.length).epsilon(1e-12));
}

TEST_CASE("cut_segment partitions are exact and consistent with location") {
  std::mt19937 gen(777);
  for (int n : {2, 3, 5}) {
    FluidMesh mesh = fsi::build_unit_square(n);
    for (int trial = 0; trial < 300; ++trial) {
      Vec2 p0{uniform(gen, 0.0, 1.0), uniform(gen, 0.0, 1.0)};
      Vec2 p1{uniform(gen, 0.0, 1.0), uniform(gen, 0.0, 1.0)};
      if ((p1 - p0).norm() < 1e-6) continue;
      fsi::SegmentCut cut = fsi::cut_segment(mesh, p0, p1);
      REQUIRE(!cut.pieces.empty());
      CHECK(cut.length == doctest::Approx((p1 - p0).norm()).epsilon(1e-14));
      CHECK(cut.pieces.front().s0 == 0.0);
      CHECK(cut.pieces.back().s1 == doctest::Approx(cut.length).epsilon(1e-12));
      for (size_t i = 0; i < cut.pieces.size(); ++i) {
        CHECK(cut.pieces[i].s1 > cut.pieces[i].s0);
        if (i > 0) {
          CHECK(cut.pieces[i].s0 == doctest::Approx(cut.pieces[i - 1].s1).epsilon(1e-12));
          CHECK(cut.pieces[i].tri != cut.pieces[i - 1].tri);
        }
        // sampled interior points of the piece must sit in the assigned triangle
        for (int s = 1; s <= 5; ++s) {
          double frac = (cut.pieces[i].s0 +
                         (cut.pieces[i].s1 - cut.pieces[i].s0) * s / 6.0) /
                        cut.length;
          Vec2 x = p0 + frac * (p1 - p0);
          auto lam = bary_of(mesh, cut.pieces[i].tri, x);
          for (double l : lam) CHECK(l >= -1e-9);
        }
      }
    }
  }
}

TEST_CASE("cut_segment handles endpoints on grid vertices and collinear runs") {
  FluidMesh mesh = fsi::build_unit_square(4);
  // endpoint exactly on a grid vertex
  fsi::SegmentCut cut = fsi::cut_segment(mesh, {0.5, 0.5}, {0.77, 0.91});
  CHECK(cut.pieces.front().s0 == 0.0);
  CHECK(cut.pieces.back().s1 == doctest::Approx(cut.length));
  // collinear with the cell diagonals
  fsi::SegmentCut diag = fsi::cut_segment(mesh, {0.25, 0.25}, {0.5, 0.5});
  CHECK(diag.pieces.front().s0 == 0.0);
  CHECK(diag.pieces.back().s1 == doctest::Approx(diag.length));
  double covered = 0.0;
  for (const auto& p : diag.pieces) covered += p.s1 - p.s0;
  CHECK(covered == doctest::Approx(diag.length).epsilon(1e-12));
  // collinear with a horizontal grid line
  fsi::SegmentCut flat = fsi::cut_segment(mesh, {0.1, 0.5}, {0.6, 0.5});
  covered = 0.0;
  for (const auto& p : flat.pieces) covered += p.s1 - p.s0;
  CHECK(covered == doctest::Approx(flat.length).epsilon(1e-12));
}

TEST_CASE("cut_segment rejects degenerate and escaping segments") {
  FluidMesh mesh = fsi::build_unit_square(4);
  CHECK_THROWS_AS(fsi::cut_segment(mesh, {0.5, 0.5}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(fsi::cut_segment(mesh, {0.5, 0.5}, {1.2, 0.5}), fsi::OutOfDomainError);
}

TEST_CASE("closed curve construction on a circle") {
  const int m = 8;
  const double r = 0.2;
  fsi::SolidMesh mesh = fsi::build_ellipse({0.5, 0.5}, r, r, m);
  CHECK(mesh.num_nodes() == m);
  CHECK(mesh.num_segments() == m);
  const double chord = 2.0 * r * std::sin(M_PI / m);
  for (int k = 0; k < m; ++k) {
    CHECK((mesh.nodes[k] - Vec2{0.5, 0.5}).norm() == doctest::Approx(r).epsilon(1e-14));
    CHECK(mesh.segments[k][0] == k);
    CHECK(mesh.segments[k][1] == (k + 1) % m);
    CHECK(mesh.lengths[k] == doctest::Approx(chord).epsilon(1e-13));
  }
  CHECK(mesh.h_s == doctest::Approx(chord).epsilon(1e-13));
}

TEST_CASE("curve construction rejects bad input") {
  CHECK_THROWS_AS(fsi::build_ellipse({0.5, 0.5}, 0.2, 0.1, 2), std::invalid_argument);
  CHECK_THROWS_AS(fsi::build_ellipse({0.5, 0.5}, -0.2, 0.1, 8), std::invalid_argument);
  // curve touching the boundary
  CHECK_THROWS_AS(fsi::build_ellipse({0.05, 0.5}, 0.2, 0.1, 16), fsi::GeometryError);
  // eccentric enough to break chord quasi-uniformity
  CHECK_THROWS_AS(fsi::build_ellipse({0.5, 0.5}, 0.45, 0.01, 64), fsi::GeometryError);
}

TEST_CASE("ellipse nodes sit at equal parameter angles") {
  fsi::SolidMesh mesh = fsi::build_ellipse({0.5, 0.5}, 0.25, 0.125, 16);
  for (int k = 0; k < 16; ++k) {
    double theta = 2.0 * M_PI * k / 16;
    CHECK(mesh.nodes[k].x == doctest::Approx(0.5 + 0.25 * std::cos(theta)).epsilon(1e-14));
    CHECK(mesh.nodes[k].y == doctest::Approx(0.5 + 0.125 * std::sin(theta)).epsilon(1e-14));
  }
}
