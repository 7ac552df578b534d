/// @file mesh.hpp
/// Background fluid triangulation of the unit square, immersed closed solid
/// curves, point location, and segment-against-grid cutting. The fluid mesh
/// is structured and never changes; the solid curve moves freely across it.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fsi {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const;
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Uniform triangulation of [0,1]^2: n x n cells, each split along the
/// lower-left to upper-right diagonal. Triangles are counterclockwise.
/// Cell (i,j) owns triangles 2*(j*n+i) and 2*(j*n+i)+1.
struct FluidMesh {
  int n = 0;                                   ///< subdivisions per side
  double h = 0.0;                              ///< cell side 1/n
  std::vector<Vec2> vertices;                  ///< (n+1)^2, index j*(n+1)+i
  std::vector<std::array<int, 3>> triangles;   ///< 2*n^2, CCW vertex triples
  std::vector<std::uint8_t> on_boundary;       ///< per vertex

  int vertex_index(int i, int j) const { return j * (n + 1) + i; }
  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double triangle_area(int t) const;
  /// Longest edge of triangle t (the hypotenuse, sqrt(2)/n, for every cell).
  double triangle_diameter(int t) const;
};

/// Build the structured mesh; throws std::invalid_argument for n < 1.
FluidMesh build_unit_square(int n);

/// Closed polygonal curve: m nodes, segment k joins node k to node (k+1)%m.
/// Node positions are the reference configuration; lengths are reference
/// chord lengths and stay fixed while the curve deforms.
struct SolidMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 2>> segments;
  std::vector<double> lengths;   ///< reference length per segment
  double h_s = 0.0;              ///< max reference segment length

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_segments() const { return static_cast<int>(segments.size()); }
};

/// Ellipse sampled at m equal parameter angles 2*pi*k/m. Throws
/// std::invalid_argument for m < 3 or non-positive semi-axes, GeometryError
/// if any node leaves the open unit square or the chord lengths fail a
/// quasi-uniformity ratio of 4.
SolidMesh build_ellipse(Vec2 center, double a, double b, int m);

struct Located {
  int tri = -1;
  std::array<double, 3> bary{};   ///< barycentric coordinates, sum to 1
};

/// Find the triangle containing x. Points within 1e-12 of an edge or vertex
/// are accepted by the lowest-index candidate triangle. Throws
/// OutOfDomainError when x lies outside [0,1]^2 beyond that slack.
Located locate_point(const FluidMesh& mesh, Vec2 x);

/// One straight segment chopped by the fluid grid (cell edges and cell
/// diagonals). Pieces are consecutive, start at parameter 0, end at the
/// segment length, and each lies inside a single triangle.
struct SegmentCut {
  struct Piece {
    double s0 = 0.0;   ///< arclength parameter of piece start
    double s1 = 0.0;   ///< arclength parameter of piece end
    int tri = -1;      ///< containing triangle
  };
  std::vector<Piece> pieces;
  double length = 0.0;
};

/// Cut segment p0 -> p1 against the grid. Throws OutOfDomainError if any part
/// leaves the unit square, std::invalid_argument for a zero-length segment.
SegmentCut cut_segment(const FluidMesh& mesh, Vec2 p0, Vec2 p1);

/// Plain-text CSV dumps used by the driver and by plotting scripts.
void export_fluid_mesh(const FluidMesh& mesh, const std::string& vertex_path,
                       const std::string& triangle_path);
void export_solid_curve(const SolidMesh& mesh, const std::vector<Vec2>& positions,
                        const std::string& path);

}  // namespace fsi
