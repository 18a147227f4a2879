#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "roughlap/geometry.hpp"
#include "roughlap/mesh.hpp"

using namespace roughlap;
using namespace roughlap::geom;

namespace {
constexpr double kPi = 3.141592653589793238462643383279;

bool domain_contains(const Domain& d, Vec2 p) {
  if (!point_in_loop(d.outer.pts, p)) return false;
  for (const auto& h : d.holes)
    if (point_in_loop(h.pts, p)) return false;
  return true;
}
}  // namespace

TEST_CASE("spiral map formulas") {
  // (1,1): theta = 0
  Vec2 q = spiral_map({1.0, 1.0});
  CHECK(q.x == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(q.y) < 1e-14);
  // (1, 1.5): rho = 1, theta = 2 pi ln(3/2)
  q = spiral_map({1.0, 1.5});
  const double theta = 2.0 * kPi * std::log(1.5);
  CHECK(norm(q) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q.x == doctest::Approx(std::cos(theta)).epsilon(1e-13));
  CHECK(q.y == doctest::Approx(std::sin(theta)).epsilon(1e-13));
  CHECK_THROWS_WITH(spiral_map({-1.0, 1.0}), "outside chart");
  CHECK_THROWS_WITH(spiral_map({0.0, 1.0}), "outside chart");
}

TEST_CASE("spiral roundtrip on 1000 random wedge points") {
  Rng rng(42);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double s = std::exp(rng.uniform(-10.0, 0.0));
    const double t = s * (1.0 + rng.uniform(1e-9, 1.0 - 1e-9));
    const Vec2 p{s, t};
    const Vec2 back = spiral_map_inverse(spiral_map(p));
    worst = std::max(worst, dist(p, back) / norm(p));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("chart roundtrips for every built-in chart") {
  Rng rng(7);
  auto roundtrip = [&](const ChartMap& c, auto sample) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Vec2 p = sample();
      const Vec2 back = c.inverse(c.forward(p));
      worst = std::max(worst, dist(p, back) / std::max(norm(p), 1e-30));
    }
    return worst;
  };
  auto anywhere = [&] { return Vec2{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)}; };
  auto wedge = [&] {
    const double s = std::exp(rng.uniform(-6.0, 0.0));
    return Vec2{s, s * (1.0 + rng.uniform(1e-6, 1.0 - 1e-6))};
  };
  CHECK(roundtrip(identity_chart(), anywhere) <= 1e-12);
  CHECK(roundtrip(similarity_chart(2.5), anywhere) <= 1e-12);
  CHECK(roundtrip(spiral_chart(), wedge) <= 1e-12);
  CHECK(roundtrip(similarity_conjugate(spiral_chart(), 0.5, 2.0), wedge) <= 1e-12);
}

TEST_CASE("spiral jacobian matches centered finite differences away from s=0") {
  ChartMap c = spiral_chart();
  Rng rng(11);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double s = rng.uniform(0.2, 1.0);
    const double t = s * (1.0 + rng.uniform(0.05, 0.95));
    const Mat2 J = c.jacobian({s, t});
    const Vec2 dxs = (1.0 / (2.0 * h)) * (c.forward({s + h, t}) - c.forward({s - h, t}));
    const Vec2 dxt = (1.0 / (2.0 * h)) * (c.forward({s, t + h}) - c.forward({s, t - h}));
    worst = std::max({worst, std::abs(J.a - dxs.x), std::abs(J.c - dxs.y),
                      std::abs(J.b - dxt.x), std::abs(J.d - dxt.y)});
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("similarity conjugation") {
  ChartMap spiral = spiral_chart();
  SUBCASE("unit coefficients act as identity") {
    ChartMap c = similarity_conjugate(spiral, 1.0, 1.0);
    for (double s : {0.3, 0.7, 1.0}) {
      const Vec2 p{s, 1.4 * s};
      CHECK(dist(c.forward(p), spiral.forward(p)) < 1e-15);
    }
  }
  SUBCASE("scalings compose") {
    ChartMap c = similarity_conjugate(identity_chart(), 2.0, 3.0);
    const Vec2 p{0.4, -1.1};
    CHECK(dist(c.forward(p), 6.0 * p) < 1e-15);
  }
  SUBCASE("conjugation by e^{n-1} reproduces the spiral on band n") {
    for (int n : {2, 4, 6}) {
      const double k = std::exp(-(n - 1.0)), k1 = std::exp(n - 1.0);
      ChartMap c = similarity_conjugate(spiral, k, k1);
      Rng rng(n);
      for (int i = 0; i < 100; ++i) {
        const double s = std::exp(rng.uniform(-(n + 1.0), -(n - 1.0)));
        const Vec2 p{s, s * (1.0 + rng.uniform(0.01, 0.99))};
        CHECK(dist(c.forward(p), spiral.forward(p)) <= 1e-12 * norm(spiral.forward(p)));
      }
    }
  }
}

TEST_CASE("quasiisometry estimates") {
  SUBCASE("identity gives 1") {
    Polyline sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    MetricEstimate e = estimate_quasiisometry(identity_chart(), sq, 1000, 5);
    CHECK(qhat(e) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("similarity S_2 gives exactly 2") {
    Polyline sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    MetricEstimate e = estimate_quasiisometry(similarity_chart(2.0), sq, 1000, 5);
    CHECK(e.lower == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(e.upper == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(qhat(e) == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("spiral Q is band-independent within 5%") {
    ChartMap spiral = spiral_chart();
    const MetricEstimate e1 = estimate_quasiisometry(spiral, spiral_band_region(1), 10000, 99);
    const MetricEstimate e5 = estimate_quasiisometry(spiral, spiral_band_region(5), 10000, 99);
    CHECK(std::abs(qhat(e5) - qhat(e1)) / qhat(e1) < 0.05);
  }
  SUBCASE("sampled estimate contains the deterministic grid scan") {
    ChartMap spiral = spiral_chart();
    double lo = 0, hi = 0;
    oracles::grid_quasiisometry(spiral, spiral_band_region(1), 60, lo, hi);
    const MetricEstimate e = estimate_quasiisometry(spiral, spiral_band_region(1), 20000, 3);
    // the random sampler explores the narrow smallest-stretch direction the
    // coarse direction grid misses, so its range contains the scanned one
    CHECK(e.lower <= lo * 1.001);
    CHECK(e.upper >= hi * 0.95);
    CHECK(e.upper <= hi * 1.2);
  }
  SUBCASE("degenerate region is rejected") {
    Polyline line = {{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS_WITH(estimate_quasiisometry(identity_chart(), line, 1000, 1), "empty region");
  }
  SUBCASE("conjugation bound upper <= k k1 upper") {
    ChartMap spiral = spiral_chart();
    const double k = 2.0, k1 = 3.0;
    ChartMap c = similarity_conjugate(spiral, k, k1);
    // conjugate acts on the pre-scaled band
    Polyline region = spiral_band_region(1);
    for (Vec2& p : region) p = (1.0 / k1) * p;
    const MetricEstimate base = estimate_quasiisometry(spiral, spiral_band_region(1), 5000, 17);
    const MetricEstimate conj = estimate_quasiisometry(c, region, 5000, 17);
    CHECK(conj.upper <= k * k1 * base.upper * 1.02);
  }
}

TEST_CASE("rect-union constructor") {
  SUBCASE("k_max=1 contains rectangle P_1") {
    Domain d = build_rect_union(1);
    CHECK(domain_contains(d, {0.5, 0.06}));    // inside P_1
    CHECK(domain_contains(d, {0.5, 0.124}));   // top of P_1 region is open but in V
    CHECK(domain_contains(d, {0.38, 0.001}));  // just right of the left edge 0.375
    CHECK(!domain_contains(d, {0.37, 0.009})); // wedge hole left of P_1
    CHECK(!domain_contains(d, {0.7, 0.05}));   // notch right of P_1
    bool has_left = false, has_right = false;
    for (const auto& loop : d.holes)
      for (const Vec2& p : loop.pts) {
        has_left |= (p.x == 0.375 && p.y == 0.0);
        has_right |= (p.x == 0.625);
      }
    CHECK(has_left);
    CHECK(!has_right);  // right side of P_1 borders the notch, not a hole
  }
  SUBCASE("k_max=0 equals S union V on a fine pixel grid") {
    Domain d = build_rect_union(0);
    CHECK(d.holes.empty());
    auto in_sv = [](Vec2 p) {
      const bool in_s = 0.0 < p.x && p.x < 1.0 && -1.0 < p.y && p.y < 0.0;
      const bool in_v = 0.0 < p.x && p.x < 1.0 && 0.1 * p.x <= p.y && p.y < 1.0;
      return in_s || in_v;
    };
    auto bdist = [](Vec2 p) {
      double d0 = std::min({std::abs(p.x), std::abs(p.x - 1.0), std::abs(p.y + 1.0),
                            std::abs(p.y - 1.0), std::abs(p.y)});
      d0 = std::min(d0, std::abs(p.y - 0.1 * p.x) / std::sqrt(1.01));
      return d0;
    };
    const double mismatch = oracles::pixel_mismatch(d, in_sv, bdist, {-0.1, -1.1}, {1.1, 1.1},
                                                    400, 400, 0.02);
    CHECK(mismatch == 0.0);
  }
  SUBCASE("domain invariants hold for all k") {
    for (int k = 0; k <= 8; ++k) {
      Domain d = build_rect_union(k);
      CHECK(domain_check(d).empty());
      CHECK(static_cast<int>(d.holes.size()) == (k >= 1 ? k : 0));
    }
  }
  SUBCASE("boundary length below the series bound, converging geometrically") {
    // adding rectangle P_k pastes over 2*width(P_k) of floor/line boundary and
    // exposes only ~0.1*width of vertical sides, so the truncated measure
    // decreases toward its limit; the geometric-series bound still caps it
    const double bound = boundary_measure(build_rect_union(0)) + 3.0;
    std::vector<double> len;
    for (int k = 0; k <= 12; ++k) {
      len.push_back(boundary_measure(build_rect_union(k)));
      CHECK(len.back() < bound);
      CHECK(len.back() > 6.0);
    }
    for (int k = 2; k <= 12; ++k) {
      const double d_prev = std::abs(len[k - 1] - len[k - 2]);
      const double d_cur = std::abs(len[k] - len[k - 1]);
      CHECK(d_cur < d_prev);  // geometric convergence of the truncation
    }
  }
  SUBCASE("truncation limit") {
    CHECK_THROWS_WITH(build_rect_union(13), "truncation limit exceeded");
  }
}

TEST_CASE("spiral domain constructor") {
  SUBCASE("boundary rays lie on the logarithmic spirals") {
    Domain d = build_spiral(3);
    REQUIRE(!d.outer.edges.empty());
    int checked = 0;
    for (std::size_t e = 0; e < d.outer.edges.size(); ++e) {
      const EdgeSource& src = d.outer.edges[e];
      if (src.type != EdgeSource::Type::chart) continue;
      const double ratio = src.a.y / src.a.x;  // t/s: 1 on one spiral, 2 on the other
      const Vec2 p = d.outer.pts[e];
      const double rho = norm(p);
      const double theta = 2.0 * kPi * std::log(src.a.y / (src.a.x * src.a.x));
      if (std::abs(ratio - 1.0) < 1e-9) {
        CHECK(rho == doctest::Approx(std::exp(-theta / (2.0 * kPi))).epsilon(1e-10));
        ++checked;
      } else if (std::abs(ratio - 2.0) < 1e-9) {
        CHECK(rho == doctest::Approx(2.0 * std::exp(-theta / (2.0 * kPi))).epsilon(1e-10));
        ++checked;
      }
    }
    CHECK(checked > 300);
  }
  SUBCASE("loop is simple and CCW") {
    Domain d = build_spiral(4);
    CHECK(domain_check(d).empty());
  }
  SUBCASE("truncations agree on the common band") {
    Domain d1 = build_spiral(1);
    Domain d2 = build_spiral(2);
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const double s = std::exp(rng.uniform(-0.9, -0.05));
      const Vec2 p = spiral_map({s, s * (1.0 + rng.uniform(0.1, 0.9))});
      CHECK(domain_contains(d1, p));
      CHECK(domain_contains(d2, p));
    }
  }
}

TEST_CASE("boundary measure") {
  SUBCASE("unit square") {
    CHECK(boundary_measure(build_square()) == doctest::Approx(4.0).epsilon(1e-14));
  }
  SUBCASE("spiral ray length approaches sqrt(1+4pi^2)") {
    ChartMap spiral = spiral_chart();
    const double expect = std::sqrt(1.0 + 4.0 * kPi * kPi);
    const double len6 = curve_length(spiral, {std::exp(-6.0), std::exp(-6.0)}, {1.0, 1.0});
    CHECK(len6 == doctest::Approx(expect * (1.0 - std::exp(-6.0))).epsilon(1e-8));
    const double len14 = curve_length(spiral, {std::exp(-14.0), std::exp(-14.0)}, {1.0, 1.0});
    CHECK(len14 == doctest::Approx(expect).epsilon(1e-5));
  }
  SUBCASE("spiral domain measure matches the analytic boundary pieces") {
    // both spiral rays: sqrt(1+4pi^2)(1-e^-n); arcs rho=1 and rho=e^-n span 2 pi ln 2
    const int n = 5;
    Domain d = build_spiral(n);
    const double root = std::sqrt(1.0 + 4.0 * kPi * kPi);
    const double analytic = 2.0 * root * (1.0 - std::exp(-static_cast<double>(n))) +
                            2.0 * kPi * std::log(2.0) * (1.0 + std::exp(-static_cast<double>(n)));
    CHECK(boundary_measure(d) == doctest::Approx(analytic).epsilon(1e-6));
  }
}

TEST_CASE("area formula") {
  SUBCASE("identity is exact") {
    AreaCheck c = area_formula_check(identity_chart(), {{0, 0}, {0.3, 0.4}, {1.0, 0.2}}, 8);
    const double len = dist({0, 0}, {0.3, 0.4}) + dist({0.3, 0.4}, {1.0, 0.2});
    CHECK(c.lhs == doctest::Approx(len).epsilon(1e-14));
    CHECK(c.rhs == doctest::Approx(len).epsilon(1e-14));
  }
  SUBCASE("similarity scales lengths by k") {
    AreaCheck c = area_formula_check(similarity_chart(3.0), {{0, 0}, {1, 1}}, 8);
    CHECK(c.lhs == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(c.rhs == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("spiral ray agrees within 0.5% and hits the analytic value") {
    AreaCheck c = area_formula_check(spiral_chart(), {{std::exp(-6.0), std::exp(-6.0)}, {1, 1}},
                                     256);
    CHECK(std::abs(c.lhs - c.rhs) / c.rhs < 0.005);
    const double expect = std::sqrt(1.0 + 4.0 * kPi * kPi) * (1.0 - std::exp(-6.0));
    CHECK(c.lhs == doctest::Approx(expect).epsilon(0.005));
    CHECK(c.rhs == doctest::Approx(expect).epsilon(0.005));
  }
  SUBCASE("0.5% agreement at 64 panels for all built-in charts") {
    const Polyline curves[] = {{{0.1, 0.2}, {0.9, 0.7}},
                               {{std::exp(-3.0), 1.5 * std::exp(-3.0)}, {0.8, 1.0}}};
    const ChartMap charts[] = {identity_chart(), similarity_chart(0.7), spiral_chart(),
                               similarity_conjugate(spiral_chart(), 2.0, 0.5)};
    for (const auto& chart : charts)
      for (const auto& curve : curves) {
        // keep the curve inside the spiral charts' wedge
        if (chart.kind != ChartMap::Kind::identity && chart.kind != ChartMap::Kind::similarity &&
            curve[0].x > 0.09)
          continue;
        AreaCheck c = area_formula_check(chart, curve, 64);
        CHECK(std::abs(c.lhs - c.rhs) / std::max(c.rhs, 1e-30) < 0.005);
      }
  }
  SUBCASE("outside chart is reported") {
    CHECK_THROWS_WITH(area_formula_check(spiral_chart(), {{-0.5, 0.1}, {1, 1}}, 8),
                      "outside chart");
  }
}

TEST_CASE("interior metric") {
  SUBCASE("square diagonal converges to sqrt(2)") {
    mesh::Mesh m = mesh::triangulate(build_square(), 0.5);
    for (int i = 0; i < 4; ++i) m = mesh::refine(m);
    const int a = mesh::nearest_vertex(m, {0, 0});
    const int b = mesh::nearest_vertex(m, {1, 1});
    const double d = interior_metric(m, a, b);
    CHECK(d >= std::sqrt(2.0) - 1e-12);
    CHECK(d <= std::sqrt(2.0) * 1.05);
  }
  SUBCASE("L-shape geodesic bends around the re-entrant corner") {
    mesh::Mesh m = mesh::triangulate(build_lshape(), 0.25);
    for (int i = 0; i < 4; ++i) m = mesh::refine(m);
    const int a = mesh::nearest_vertex(m, {0.9, 0.1});
    const int b = mesh::nearest_vertex(m, {0.1, 0.9});
    // two-segment geodesic through the corner for the endpoints actually used
    const double expect =
        dist(m.vertices[a], {0.5, 0.5}) + dist({0.5, 0.5}, m.vertices[b]);
    const double d = interior_metric(m, a, b);
    CHECK(d >= expect - 1e-12);
    CHECK(d <= expect * 1.05);
  }
  SUBCASE("refinement is non-increasing for fixed endpoints") {
    mesh::Mesh m = mesh::triangulate(build_lshape(), 0.25);
    // refine keeps the original vertex ids, so the endpoints stay put
    const int a = mesh::nearest_vertex(m, {0.9, 0.1});
    const int b = mesh::nearest_vertex(m, {0.1, 0.9});
    double prev = interior_metric(m, a, b);
    for (int i = 0; i < 3; ++i) {
      m = mesh::refine(m);
      const double d = interior_metric(m, a, b);
      CHECK(d <= prev + 1e-12);
      prev = d;
    }
  }
  SUBCASE("disconnected mesh has no path") {
    mesh::Mesh m;
    m.vertices = {{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}, {5, 6}};
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    CHECK_THROWS_WITH(geom::interior_metric(m, 0, 3), "no path");
  }
}

TEST_CASE("domain serialization round-trips") {
  Domain d = build_rect_union(2);
  const std::string text = write_domain(d);
  Domain back = read_domain(text);
  REQUIRE(back.outer.pts.size() == d.outer.pts.size());
  REQUIRE(back.holes.size() == d.holes.size());
  for (std::size_t i = 0; i < d.outer.pts.size(); ++i) {
    CHECK(back.outer.pts[i].x == d.outer.pts[i].x);
    CHECK(back.outer.pts[i].y == d.outer.pts[i].y);
  }
  CHECK(write_domain(back) == text);
  CHECK_THROWS(read_domain("not a domain"));
}

TEST_CASE("translate shifts loops and rejects charted domains") {
  Domain d = translate(build_rect_union(1), {2.0, 0.5});
  CHECK(d.outer.pts[0].x == doctest::Approx(2.0));
  CHECK(d.offset.x == 2.0);
  CHECK_THROWS(translate(build_spiral(2), {1.0, 0.0}));
}
