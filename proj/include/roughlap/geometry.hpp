#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roughlap/core.hpp"

namespace roughlap::geom {

// Analytic planar chart with explicit inverse and Jacobian.
struct ChartMap {
  enum class Kind { identity, similarity, spiral, composite };
  Kind kind = Kind::identity;

  std::function<Vec2(Vec2)> forward;
  std::function<Vec2(Vec2)> inverse;
  std::function<Mat2(Vec2)> jacobian;

  // parameters kept for serialization / introspection
  double scale = 1.0;       // similarity coefficient
  double outer_scale = 1.0; // composite: x -> outer_scale * inner(inner_scale * x)
  double inner_scale = 1.0;
};

ChartMap identity_chart();
ChartMap similarity_chart(double k);
ChartMap spiral_chart();

// Composition S_k o map o S_k1. The composite of quasiisometries with
// coefficients multiplying as k*k1*Q.
ChartMap similarity_conjugate(const ChartMap& map, double k, double k1);

// The spiral diffeomorphism (s,t) -> s * (cos th, sin th), th = 2*pi*ln(t/s^2).
// Throws std::domain_error("outside chart") for s <= 0 or t <= 0.
Vec2 spiral_map(Vec2 p);
// Inverse valid on the image of the wedge t/s in (1,2).
Vec2 spiral_map_inverse(Vec2 q);

// How a boundary edge of a Domain was generated; lets downstream code
// (boundary measure, mesh snapping) recover the true curve under the chord.
struct EdgeSource {
  enum class Type { straight, chart, arc };
  Type type = Type::straight;
  int chart = -1;   // index into Domain::charts
  Vec2 a, b;        // parameter-space endpoints (chart) or unused (straight)
  Vec2 center;      // arc
  double radius = 0.0, ang0 = 0.0, ang1 = 0.0;
};

struct Loop {
  Polyline pts;                   // vertex i joins vertex i+1 (mod n)
  std::vector<EdgeSource> edges;  // size == pts.size(); may be empty (all straight)
};

enum class DomainFamily {
  square,
  rect,
  lshape,
  disk,
  rect_union,
  rect_union_part,  // S with the rectangles, no wedge
  wedge,            // {0<x<1, x/10 < y < 1}
  spiral,
  polygon
};

struct Domain {
  Loop outer;                         // CCW
  std::vector<Loop> holes;            // CW
  std::vector<ChartMap> charts;
  std::vector<Polyline> chart_regions;
  std::string label;

  DomainFamily family = DomainFamily::polygon;
  std::map<std::string, double> params;  // family-specific build parameters
  Vec2 offset{0.0, 0.0};                 // rigid translation applied after build
};

struct MetricEstimate {
  double lower = 0.0;
  double upper = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
};

// Q-hat = max(upper, 1/lower), with a tiny-value guard on lower.
double qhat(const MetricEstimate& e);

// ---- domain constructors -------------------------------------------------

// Square S = (0,1)x(-1,0), wedge V = {0<x1<1, x1/10 <= x2 < 1} and rectangles
// P_k = {|x1 - 2^-k| < 2^-k-2, 0 <= x2 < 2^-k-2}, k = 1..k_max. The boundary
// pinch at the origin is resolved by absorbing the sliver below the line for
// x < 2^-(k_max+4) into the domain; the remaining wedge piece left of the last
// rectangle becomes a hole. Requires k_max <= 12.
Domain build_rect_union(int k_max);

// S and the rectangles only (the class-L piece of the union).
Domain build_rect_union_part(int k_max);

// The wedge V alone.
Domain build_wedge();

// Spiral domain: image of {e^-n_max < s < 1, s < t < 2s} under the spiral
// chart; closed at the inner end by the image of the segment s = e^-n_max.
// 1 <= n_max <= 20.
Domain build_spiral(int n_max);

Domain build_square();
Domain build_rect(double x0, double y0, double x1, double y1);
Domain build_lshape();
Domain build_disk();

// Rigid translation (straight and arc edges only; chart-generated domains
// cannot be translated without invalidating their charts).
Domain translate(const Domain& d, Vec2 shift);

// ---- metric diagnostics ----------------------------------------------------

// Samples n_samples point pairs (y,z) in `region` with |y-z| <= 1e-3 * diam
// and returns min/max of |phi(y)-phi(z)| / |y-z|.
// Throws std::invalid_argument("empty region") when the region is degenerate.
MetricEstimate estimate_quasiisometry(const ChartMap& map, const Polyline& region,
                                      int n_samples, std::uint64_t seed);

// Length of the image of the parameter segment [a,b] under the chart,
// by adaptive quadrature of |J(gamma(t)) gamma'(t)|.
double curve_length(const ChartMap& map, Vec2 a, Vec2 b, double tol = 1e-11);

// Total H^1 measure of the domain boundary: exact chords for straight edges,
// arc lengths for arcs, chart quadrature for charted edges.
double boundary_measure(const Domain& d);

struct AreaCheck {
  double lhs = 0.0;  // integral of the 1-d formal Jacobian over the curve
  double rhs = 0.0;  // length of the image polyline at matching resolution
};

// Area-formula check along a parameter polyline (open). `panels` subdivisions
// per polyline segment are used on both sides.
AreaCheck area_formula_check(const ChartMap& map, const Polyline& curve, int panels = 256);

// Validity checks for the Domain invariants (simple loops, disjoint, holes
// strictly inside outer). Returns human-readable violations; empty = ok.
std::vector<std::string> domain_check(const Domain& d);

// ---- serialization (format frozen in docs/formats.md) ----------------------

std::string write_domain(const Domain& d);
Domain read_domain(const std::string& text);

// Parameter-region polygon of the spiral band T_n (corners of
// {e^-(n+1) < s < e^-(n-1), s < t < 2s}).
Polyline spiral_band_region(int n);

}  // namespace roughlap::geom

namespace roughlap::mesh {
struct Mesh;
}

namespace roughlap::geom {
// Shortest-path distance between two mesh vertices over the edge graph; an
// upper bound for the interior metric that converges under refinement.
// Throws std::runtime_error("no path") when the mesh is disconnected.
double interior_metric(const mesh::Mesh& m, int x, int y);
}  // namespace roughlap::geom
