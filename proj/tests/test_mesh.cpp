#include <doctest.h>

#include <cmath>
#include <map>

#include "roughlap/geometry.hpp"
#include "roughlap/mesh.hpp"

using namespace roughlap;
using namespace roughlap::mesh;

TEST_CASE("unit square at h=0.5 is the 3x3 grid") {
  Mesh m = triangulate(geom::build_square(), 0.5);
  CHECK(m.n_vertices() == 9);
  CHECK(m.n_triangles() == 8);
  ValidationReport rep = validate(m);
  CHECK(rep.valid());
  CHECK(rep.min_angle_deg == doctest::Approx(45.0).epsilon(1e-9));
  CHECK(rep.boundary_loops == 1);
}

TEST_CASE("refinement counts and quality") {
  Mesh m = triangulate(geom::build_square(), 0.5);
  Mesh r = refine(m);
  CHECK(r.n_triangles() == 32);
  CHECK(r.n_vertices() == 25);
  CHECK(r.boundary_edges.size() == 2 * m.boundary_edges.size());
  CHECK(validate(r).valid());
  CHECK(validate(r).min_angle_deg == doctest::Approx(45.0).epsilon(1e-9));
  Mesh rr = refine(r);
  CHECK(rr.n_triangles() == 128);
  CHECK(validate(rr).valid());
  CHECK(mesh_area(rr) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("triangle count scales like h^-2 on the square") {
  const int n1 = triangulate(geom::build_square(), 0.1).n_triangles();
  const int n2 = triangulate(geom::build_square(), 0.05).n_triangles();
  CHECK(n2 >= 2 * n1);   // at least double
  CHECK(n2 <= 8 * n1);   // within a factor 2 of the 4x scaling
}

TEST_CASE("validate flags a flipped triangle") {
  Mesh m = triangulate(geom::build_square(), 0.5);
  std::swap(m.triangles[3][0], m.triangles[3][1]);
  ValidationReport rep = validate(m);
  CHECK(!rep.valid());
  bool found = false;
  for (const auto& v : rep.violations) found |= v.find("negative area at triangle 3") == 0;
  CHECK(found);
}

TEST_CASE("lshape and disk meshes validate") {
  Mesh l = triangulate(geom::build_lshape(), 0.2);
  CHECK(validate(l).valid());
  CHECK(mesh_area(l) == doctest::Approx(0.75).epsilon(1e-12));

  Mesh d = triangulate(geom::build_disk(), 0.2);
  CHECK(validate(d).valid());
  // polygonal area below pi, converging under boundary-snapped refinement
  const double a0 = mesh_area(d);
  Mesh dr = refine(refine(d));
  CHECK(validate(dr).valid());
  const double a2 = mesh_area(dr);
  const double pi = 3.141592653589793;
  CHECK(a0 < pi);
  CHECK(a2 < pi);
  CHECK(pi - a2 < 0.3 * (pi - a0));  // snapping recovers the circle at O(h^2)
}

TEST_CASE("rect-union mesh matches its domain") {
  geom::Domain dom = geom::build_rect_union(2);
  Mesh m = triangulate(dom, 0.1);
  ValidationReport rep = validate(m);
  CHECK(rep.valid());
  CHECK(rep.boundary_loops == static_cast<int>(1 + dom.holes.size()));
  // mesh area = outer loop area minus holes
  double area = polygon_area(dom.outer.pts);
  for (const auto& h : dom.holes) area += polygon_area(h.pts);  // holes are CW (negative)
  CHECK(mesh_area(m) == doctest::Approx(area).epsilon(1e-10));

  // markers partition the boundary into the domain's loops
  std::map<int, double> marker_len;
  for (const auto& be : m.boundary_edges)
    marker_len[be.marker] += dist(m.vertices[be.a], m.vertices[be.b]);
  REQUIRE(marker_len.size() == 1 + dom.holes.size());
  for (std::size_t h = 0; h < dom.holes.size(); ++h) {
    double len = 0.0;
    const auto& pts = dom.holes[h].pts;
    for (std::size_t i = 0; i < pts.size(); ++i) len += dist(pts[i], pts[(i + 1) % pts.size()]);
    CHECK(marker_len[static_cast<int>(h) + 1] == doctest::Approx(len).epsilon(1e-10));
  }
}

TEST_CASE("rect-union refuses an unresolvable target_h") {
  CHECK_THROWS_AS(triangulate(geom::build_rect_union(4), 0.2), std::runtime_error);
  try {
    triangulate(geom::build_rect_union(4), 0.2);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("feature underresolved") == 0);
    CHECK(std::string(e.what()).find("P4") != std::string::npos);
  }
}

TEST_CASE("spiral mesh structure") {
  geom::Domain dom = geom::build_spiral(3);
  Mesh m = triangulate(dom, 0.1);
  ValidationReport rep = validate(m);
  CHECK(rep.valid());
  CHECK(rep.boundary_loops == 1);

  SUBCASE("interior bands carry identical triangle counts") {
    std::map<int, int> band_count;
    for (int t = 0; t < m.n_triangles(); ++t) {
      const auto& tr = m.triangles[t];
      const Vec2 c = (1.0 / 3.0) * (m.vertices[tr[0]] + m.vertices[tr[1]] + m.vertices[tr[2]]);
      const double s = norm(c);  // rho = s for the spiral chart
      const int band = static_cast<int>(std::floor(-std::log(s))) + 1;
      band_count[band]++;
    }
    // bands 1..3 exist; the two end bands carry the wedge fans, interior equal
    REQUIRE(band_count.size() >= 3);
    CHECK(std::abs(band_count[2] - band_count[1]) <= 40);
    CHECK(std::abs(band_count[2] - band_count[3]) <= 40);
  }

  SUBCASE("min angle uniform in n_max at the intrinsic corner floor") {
    const double floor3 = rep.min_angle_deg;
    for (int n : {1, 6, 12}) {
      ValidationReport r = validate(triangulate(geom::build_spiral(n), 0.1));
      CHECK(r.valid());
      CHECK(r.min_angle_deg == doctest::Approx(floor3).epsilon(1e-6));
    }
    // regression baseline at n_max=6 (intrinsic spiral-arc crossing angle)
    ValidationReport r6 = validate(triangulate(geom::build_spiral(6), 0.1));
    CHECK(r6.min_angle_deg == doctest::Approx(8.485).epsilon(0.01));
  }
}

TEST_CASE("boundary midpoint snapping stays within C h^2 of the true curve") {
  // measure the max chord-to-curve gap via the curve table on the spiral
  auto max_gap = [](const Mesh& m) {
    double worst = 0.0, hmax = 0.0;
    for (std::size_t e = 0; e < m.boundary_edges.size(); ++e) {
      const auto& be = m.boundary_edges[e];
      const auto& bc = m.boundary_curves[e];
      if (bc.curve < 0) continue;
      const Vec2 chord_mid = 0.5 * (m.vertices[be.a] + m.vertices[be.b]);
      const Vec2 on_curve = m.curves[bc.curve](0.5 * (bc.t0 + bc.t1));
      worst = std::max(worst, dist(chord_mid, on_curve));
      hmax = std::max(hmax, dist(m.vertices[be.a], m.vertices[be.b]));
    }
    return std::pair{worst, hmax};
  };
  Mesh m = triangulate(geom::build_spiral(2), 0.15);
  auto [gap0, h0] = max_gap(m);
  const double C = gap0 / (h0 * h0);
  for (int i = 0; i < 3; ++i) {
    m = refine(m);
    auto [gap, h] = max_gap(m);
    CHECK(gap <= 1.05 * C * h * h);
  }
}

TEST_CASE("mesh file round-trips bit-exactly") {
  Mesh m = triangulate(geom::build_spiral(2), 0.2);
  const std::string text = write_mesh(m);
  Mesh back = read_mesh(text);
  CHECK(write_mesh(back) == text);
  REQUIRE(back.n_vertices() == m.n_vertices());
  for (int i = 0; i < m.n_vertices(); ++i) {
    CHECK(back.vertices[i].x == m.vertices[i].x);
    CHECK(back.vertices[i].y == m.vertices[i].y);
  }
  CHECK(back.axisymmetric == m.axisymmetric);
  CHECK_THROWS(read_mesh("mesh x"));
}

TEST_CASE("wedge and rect-union-part meshes validate") {
  CHECK(validate(triangulate(geom::build_wedge(), 0.1)).valid());
  geom::Domain part = geom::build_rect_union_part(3);
  Mesh m = triangulate(part, 0.1);
  CHECK(validate(m).valid());
  CHECK(validate(m).boundary_loops == 1);
  CHECK(mesh_area(m) == doctest::Approx(polygon_area(part.outer.pts)).epsilon(1e-10));
}

TEST_CASE("translated mesh carries the offset") {
  geom::Domain d = geom::translate(geom::build_rect_union(2), {2.0, 0.0});
  Mesh m = triangulate(d, 0.1);
  CHECK(validate(m).valid());
  double min_x = 1e300;
  for (const Vec2& v : m.vertices) min_x = std::min(min_x, v.x);
  CHECK(min_x == doctest::Approx(2.0).epsilon(1e-12));
}
