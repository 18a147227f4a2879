#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "roughlap/core.hpp"
#include "roughlap/geometry.hpp"

namespace roughlap::mesh {

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int marker = 0;  // 0 = outer loop, k = k-th hole loop, 9 = artificial far boundary
};

// Conforming P1 triangulation. When `axisymmetric` is set, coordinates are
// (r, z) with r >= 0 and quadrature downstream carries the 2*pi*r weight.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW
  std::vector<BoundaryEdge> boundary_edges;
  bool axisymmetric = false;

  // Curved-boundary bookkeeping for refinement snapping; in-memory only,
  // dropped by the text serialization.
  struct EdgeCurve {
    int curve = -1;  // index into `curves`, -1 = straight
    double t0 = 0.0, t1 = 0.0;
  };
  std::vector<EdgeCurve> boundary_curves;  // empty, or parallel to boundary_edges
  std::vector<std::function<Vec2(double)>> curves;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
};

// Structured mapped triangulation of the supported domain families.
// Throws std::runtime_error("feature underresolved: ...") when target_h cannot
// resolve the narrowest feature of the domain.
Mesh triangulate(const geom::Domain& domain, double target_h);

// Uniform 4-way refinement; boundary markers inherited, midpoints of curved
// boundary edges snapped back onto the true curve.
Mesh refine(const Mesh& m);

struct ValidationReport {
  std::vector<std::string> violations;
  double min_angle_deg = 180.0;
  double max_aspect = 0.0;
  int boundary_loops = 0;
  bool valid() const { return violations.empty(); }
};

// Checks every Mesh invariant; violations are data, not errors. Axis edges of
// axisymmetric meshes (both endpoints at r = 0) may stay unlisted in
// boundary_edges: the rotation closes the surface there. Boundary chains that
// terminate on the axis count as loops.
ValidationReport validate(const Mesh& m);

// Text format frozen in docs/formats.md; round-trips bit-exactly.
std::string write_mesh(const Mesh& m);
Mesh read_mesh(const std::string& text);

double triangle_area(const Mesh& m, int t);
double mesh_area(const Mesh& m);
double mesh_h(const Mesh& m);  // max edge length
int nearest_vertex(const Mesh& m, Vec2 p);

// Barycentric point evaluation support: locate the triangle containing p
// (-1 if none) and interpolate nodal values.
int locate_triangle(const Mesh& m, Vec2 p);
double interpolate(const Mesh& m, const std::vector<double>& nodal, Vec2 p);

}  // namespace roughlap::mesh
