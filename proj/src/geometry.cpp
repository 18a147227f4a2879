#include "roughlap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace roughlap::geom {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

ChartMap identity_chart() {
  ChartMap m;
  m.kind = ChartMap::Kind::identity;
  m.forward = [](Vec2 p) { return p; };
  m.inverse = [](Vec2 p) { return p; };
  m.jacobian = [](Vec2) { return Mat2{}; };
  return m;
}

ChartMap similarity_chart(double k) {
  if (!(k > 0.0)) throw std::invalid_argument("similarity coefficient must be positive");
  ChartMap m;
  m.kind = ChartMap::Kind::similarity;
  m.scale = k;
  m.forward = [k](Vec2 p) { return k * p; };
  m.inverse = [k](Vec2 p) { return (1.0 / k) * p; };
  m.jacobian = [k](Vec2) { return Mat2{k, 0.0, 0.0, k}; };
  return m;
}

Vec2 spiral_map(Vec2 p) {
  if (!(p.x > 0.0) || !(p.y > 0.0)) throw std::domain_error("outside chart");
  const double s = p.x, t = p.y;
  const double theta = kTwoPi * std::log(t / (s * s));
  return {s * std::cos(theta), s * std::sin(theta)};
}

Vec2 spiral_map_inverse(Vec2 q) {
  const double rho = norm(q);
  if (!(rho > 0.0)) throw std::domain_error("outside chart");
  const double theta0 = std::atan2(q.y, q.x);
  // t/s in (1,2) pins theta into a window of width 2*pi*ln 2 < 2*pi
  const double lo = kTwoPi * std::log(1.0 / rho);
  const double hi = kTwoPi * std::log(2.0 / rho);
  const double m = std::ceil((lo - theta0) / kTwoPi - 1e-12);
  const double theta = theta0 + kTwoPi * m;
  if (theta > hi + 1e-9) throw std::domain_error("outside chart");
  return {rho, rho * rho * std::exp(theta / kTwoPi)};
}

ChartMap spiral_chart() {
  ChartMap m;
  m.kind = ChartMap::Kind::spiral;
  m.forward = [](Vec2 p) { return spiral_map(p); };
  m.inverse = [](Vec2 q) { return spiral_map_inverse(q); };
  m.jacobian = [](Vec2 p) {
    if (!(p.x > 0.0) || !(p.y > 0.0)) throw std::domain_error("outside chart");
    const double s = p.x, t = p.y;
    const double theta = kTwoPi * std::log(t / (s * s));
    const double c = std::cos(theta), sn = std::sin(theta);
    const double q = kTwoPi * s / t;
    return Mat2{c + 2.0 * kTwoPi * sn, -q * sn, sn - 2.0 * kTwoPi * c, q * c};
  };
  return m;
}

ChartMap similarity_conjugate(const ChartMap& map, double k, double k1) {
  if (!(k > 0.0) || !(k1 > 0.0))
    throw std::invalid_argument("similarity coefficients must be positive");
  ChartMap m;
  m.kind = ChartMap::Kind::composite;
  m.outer_scale = k;
  m.inner_scale = k1;
  m.scale = map.scale;
  auto fwd = map.forward;
  auto inv = map.inverse;
  auto jac = map.jacobian;
  m.forward = [fwd, k, k1](Vec2 p) { return k * fwd(k1 * p); };
  m.inverse = [inv, k, k1](Vec2 q) { return (1.0 / k1) * inv((1.0 / k) * q); };
  m.jacobian = [jac, k, k1](Vec2 p) { return (k * k1) * jac(k1 * p); };
  return m;
}

double qhat(const MetricEstimate& e) {
  const double lower = std::max(e.lower, 1e-300);
  return std::max(e.upper, 1.0 / lower);
}

// ---- Example-5.7 construction ------------------------------------------------

namespace {

double rect_left(int k) { return 3.0 * std::ldexp(1.0, -k - 2); }
double rect_right(int k) { return 5.0 * std::ldexp(1.0, -k - 2); }
double rect_top(int k) { return std::ldexp(1.0, -k - 2); }
double line_y(double x) { return 0.1 * x; }

void push_straight_loop(Loop& loop) {
  loop.edges.assign(loop.pts.size(), EdgeSource{});
}

}  // namespace

Domain build_rect_union(int k_max) {
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  if (k_max > 12) throw std::invalid_argument("truncation limit exceeded");
  Domain d;
  d.family = DomainFamily::rect_union;
  d.label = "rect-union-k" + std::to_string(k_max);
  d.params["k_max"] = k_max;

  const double x_cut = std::ldexp(1.0, -(k_max + 4));
  d.params["x_cut"] = x_cut;
  // the notch right of the first rectangle; with no rectangles it starts at x_cut
  const double notch_x = (k_max >= 1) ? rect_right(1) : x_cut;

  d.outer.pts = {{0.0, -1.0}, {1.0, -1.0}, {1.0, 0.0},         {notch_x, 0.0},
                 {notch_x, line_y(notch_x)}, {1.0, 0.1},       {1.0, 1.0},
                 {0.0, 1.0}};
  push_straight_loop(d.outer);

  // gap holes between consecutive rectangles, CW
  for (int k = 1; k + 1 <= k_max; ++k) {
    const double gl = rect_right(k + 1);
    const double gr = rect_left(k);
    Loop hole;
    hole.pts = {{gl, 0.0}, {gl, line_y(gl)}, {gr, line_y(gr)}, {gr, 0.0}};
    push_straight_loop(hole);
    d.holes.push_back(std::move(hole));
  }
  // wedge hole left of the innermost rectangle, CW
  if (k_max >= 1) {
    const double gr = rect_left(k_max);
    Loop hole;
    hole.pts = {{x_cut, 0.0}, {x_cut, line_y(x_cut)}, {gr, line_y(gr)}, {gr, 0.0}};
    push_straight_loop(hole);
    d.holes.push_back(std::move(hole));
  }
  return d;
}

Domain build_rect_union_part(int k_max) {
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  if (k_max > 12) throw std::invalid_argument("truncation limit exceeded");
  Domain d;
  d.family = DomainFamily::rect_union_part;
  d.label = "rect-union-part-k" + std::to_string(k_max);
  d.params["k_max"] = k_max;
  Polyline& p = d.outer.pts;
  p = {{0.0, -1.0}, {1.0, -1.0}, {1.0, 0.0}};
  for (int k = 1; k <= k_max; ++k) {
    p.push_back({rect_right(k), 0.0});
    p.push_back({rect_right(k), rect_top(k)});
    p.push_back({rect_left(k), rect_top(k)});
    p.push_back({rect_left(k), 0.0});
  }
  p.push_back({0.0, 0.0});
  push_straight_loop(d.outer);
  return d;
}

Domain build_wedge() {
  Domain d;
  d.family = DomainFamily::wedge;
  d.label = "wedge";
  d.outer.pts = {{0.0, 0.0}, {1.0, 0.1}, {1.0, 1.0}, {0.0, 1.0}};
  push_straight_loop(d.outer);
  return d;
}

// ---- spiral ------------------------------------------------------------------

Polyline spiral_band_region(int n) {
  const double a = std::exp(-(n + 1.0));
  const double b = std::exp(-(n - 1.0));
  return {{a, a}, {b, b}, {b, 2.0 * b}, {a, 2.0 * a}};
}

Domain build_spiral(int n_max) {
  if (n_max < 1 || n_max > 20) throw std::invalid_argument("n_max must be in [1,20]");
  Domain d;
  d.family = DomainFamily::spiral;
  d.label = "spiral-n" + std::to_string(n_max);
  d.params["n_max"] = n_max;
  d.charts.push_back(spiral_chart());
  const double sin_ = std::exp(static_cast<double>(-n_max));
  d.chart_regions.push_back({{sin_, sin_}, {1.0, 1.0}, {1.0, 2.0}, {sin_, 2.0 * sin_}});

  const ChartMap& chart = d.charts[0];
  Loop& loop = d.outer;
  const int per_band = 64;   // polyline sampling density per winding
  const int arc_n = 64;

  auto append_piece = [&](const std::vector<Vec2>& params) {
    // params are (s,t) samples; first one is assumed already present (or loop empty)
    for (std::size_t i = 0; i + 1 < params.size(); ++i) {
      if (loop.pts.empty()) loop.pts.push_back(chart.forward(params[i]));
      EdgeSource e;
      e.type = EdgeSource::Type::chart;
      e.chart = 0;
      e.a = params[i];
      e.b = params[i + 1];
      loop.edges.push_back(e);
      loop.pts.push_back(chart.forward(params[i + 1]));
    }
  };

  // inner ray t = s, from s = e^-n to 1
  std::vector<Vec2> piece;
  for (int j = 0; j <= per_band * n_max; ++j) {
    const double tau = -n_max + static_cast<double>(j) / per_band;
    const double s = std::exp(tau);
    piece.push_back({s, s});
  }
  append_piece(piece);

  // outer circle arc: s = 1, t in [1,2]
  piece.clear();
  for (int j = 0; j <= arc_n; ++j)
    piece.push_back({1.0, std::pow(2.0, static_cast<double>(j) / arc_n)});
  append_piece(piece);

  // outer ray t = 2s, from s = 1 back to e^-n
  piece.clear();
  for (int j = 0; j <= per_band * n_max; ++j) {
    const double tau = -static_cast<double>(j) / per_band;
    const double s = std::exp(tau);
    piece.push_back({s, 2.0 * s});
  }
  append_piece(piece);

  // truncation closure: s = e^-n, t from 2e^-n down to e^-n
  piece.clear();
  for (int j = 0; j <= arc_n; ++j)
    piece.push_back({sin_, sin_ * std::pow(2.0, 1.0 - static_cast<double>(j) / arc_n)});
  append_piece(piece);

  // close the loop: drop the duplicated last vertex, keep its edge
  loop.pts.pop_back();
  return d;
}

// ---- simple built-ins ----------------------------------------------------------

Domain build_square() { return build_rect(0.0, 0.0, 1.0, 1.0); }

Domain build_rect(double x0, double y0, double x1, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("degenerate rectangle");
  Domain d;
  d.family = DomainFamily::rect;
  d.label = "rect";
  d.params = {{"x0", x0}, {"y0", y0}, {"x1", x1}, {"y1", y1}};
  d.outer.pts = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  push_straight_loop(d.outer);
  return d;
}

Domain build_lshape() {
  Domain d;
  d.family = DomainFamily::lshape;
  d.label = "lshape";
  d.outer.pts = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.5}, {0.5, 0.5}, {0.5, 1.0}, {0.0, 1.0}};
  push_straight_loop(d.outer);
  return d;
}

Domain build_disk() {
  Domain d;
  d.family = DomainFamily::disk;
  d.label = "disk";
  const int n = 64;
  for (int i = 0; i < n; ++i) {
    const double a0 = kTwoPi * i / n;
    const double a1 = kTwoPi * (i + 1) / n;
    d.outer.pts.push_back({std::cos(a0), std::sin(a0)});
    EdgeSource e;
    e.type = EdgeSource::Type::arc;
    e.center = {0.0, 0.0};
    e.radius = 1.0;
    e.ang0 = a0;
    e.ang1 = a1;
    d.outer.edges.push_back(e);
  }
  return d;
}

Domain translate(const Domain& d, Vec2 shift) {
  Domain out = d;
  auto move_loop = [&](Loop& loop) {
    for (Vec2& p : loop.pts) p = p + shift;
    for (EdgeSource& e : loop.edges) {
      if (e.type == EdgeSource::Type::chart)
        throw std::invalid_argument("cannot translate chart-generated domains");
      if (e.type == EdgeSource::Type::arc) e.center = e.center + shift;
    }
  };
  move_loop(out.outer);
  for (Loop& h : out.holes) move_loop(h);
  out.offset = d.offset + shift;
  out.label = d.label;
  return out;
}

// ---- metric diagnostics ----------------------------------------------------

MetricEstimate estimate_quasiisometry(const ChartMap& map, const Polyline& region,
                                      int n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw std::invalid_argument("n_samples must be >= 100");
  if (region.size() < 3 || polygon_area(region) == 0.0)
    throw std::invalid_argument("empty region");
  const double diam = polygon_diameter(region);
  if (!(diam > 0.0)) throw std::invalid_argument("empty region");
  Vec2 lo, hi;
  polygon_bbox(region, lo, hi);

  const double delta = 1e-3 * diam;
  Rng rng(seed);
  MetricEstimate est;
  est.samples = n_samples;
  est.seed = seed;
  est.lower = std::numeric_limits<double>::max();
  est.upper = 0.0;

  long attempts = 0;
  const long attempt_cap = 1000L * n_samples;
  int accepted = 0;
  while (accepted < n_samples) {
    if (++attempts > attempt_cap) throw std::invalid_argument("empty region");
    Vec2 y{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
    if (!point_in_loop(region, y)) continue;
    bool got = false;
    Vec2 z;
    for (int tries = 0; tries < 32 && !got; ++tries) {
      const double ang = kTwoPi * rng.next_double();
      const double rad = delta * std::max(rng.next_double(), 1e-6);
      z = y + Vec2{rad * std::cos(ang), rad * std::sin(ang)};
      got = point_in_loop(region, z);
    }
    if (!got) continue;
    const double ratio = dist(map.forward(y), map.forward(z)) / dist(y, z);
    est.lower = std::min(est.lower, ratio);
    est.upper = std::max(est.upper, ratio);
    ++accepted;
  }
  return est;
}

double curve_length(const ChartMap& map, Vec2 a, Vec2 b, double tol) {
  const Vec2 dir = b - a;
  auto speed = [&](double t) { return norm(map.jacobian(a + t * dir).apply(dir)); };
  // relative tolerance against a chord-based scale
  const double scale =
      dist(map.forward(a), map.forward(b)) + dist(map.forward(a), map.forward(0.5 * (a + b)));
  return adaptive_simpson(speed, 0.0, 1.0, tol * std::max(scale, 1e-30));
}

namespace {
double loop_measure(const Domain& d, const Loop& loop) {
  double total = 0.0;
  const std::size_t n = loop.pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = loop.pts[i];
    const Vec2& q = loop.pts[(i + 1) % n];
    if (loop.edges.empty() || loop.edges[i].type == EdgeSource::Type::straight) {
      total += dist(p, q);
    } else if (loop.edges[i].type == EdgeSource::Type::arc) {
      total += loop.edges[i].radius * std::abs(loop.edges[i].ang1 - loop.edges[i].ang0);
    } else {
      const EdgeSource& e = loop.edges[i];
      total += curve_length(d.charts.at(e.chart), e.a, e.b);
    }
  }
  return total;
}
}  // namespace

double boundary_measure(const Domain& d) {
  double total = loop_measure(d, d.outer);
  for (const Loop& h : d.holes) total += loop_measure(d, h);
  return total;
}

AreaCheck area_formula_check(const ChartMap& map, const Polyline& curve, int panels) {
  if (curve.size() < 2) throw std::invalid_argument("curve needs at least 2 points");
  if (panels < 1) throw std::invalid_argument("panels must be positive");
  AreaCheck out;
  // 2-point Gauss nodes on [0,1]
  const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
  const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
  for (std::size_t s = 0; s + 1 < curve.size(); ++s) {
    const Vec2 a = curve[s], b = curve[s + 1];
    const Vec2 dir = b - a;
    auto speed = [&](double t) { return norm(map.jacobian(a + t * dir).apply(dir)); };

    // split the segment into panels equalizing image arclength plus tangent
    // turn, so winding charts (the spiral rays) get chord-resolved evenly
    const int fine = 16 * panels;
    std::vector<double> darc(fine), dturn(fine);
    double prev_phi = 0.0;
    double total_arc = 0.0, total_turn = 0.0;
    for (int j = 0; j < fine; ++j) {
      const Vec2 v = map.jacobian(a + ((j + 0.5) / fine) * dir).apply(dir);
      darc[j] = norm(v) / fine;
      const double phi = std::atan2(v.y, v.x);
      if (j > 0) {
        double dphi = phi - prev_phi;
        while (dphi > 3.141592653589793) dphi -= 2.0 * 3.141592653589793;
        while (dphi < -3.141592653589793) dphi += 2.0 * 3.141592653589793;
        dturn[j] = std::abs(dphi);
      }
      prev_phi = phi;
      total_arc += darc[j];
      total_turn += dturn[j];
    }
    std::vector<double> cum(fine + 1, 0.0);
    for (int j = 0; j < fine; ++j)
      cum[j + 1] = cum[j] + darc[j] / std::max(total_arc, 1e-300) +
                   dturn[j] / std::max(total_turn, 1e-300);
    std::vector<double> knots(panels + 1, 0.0);
    knots[panels] = 1.0;
    int seg = 0;
    for (int j = 1; j < panels; ++j) {
      const double target = cum[fine] * j / panels;
      while (seg + 1 < fine && cum[seg + 1] < target) ++seg;
      const double frac = (target - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-300);
      knots[j] = (seg + frac) / fine;
    }

    Vec2 prev = map.forward(a);
    for (int j = 0; j < panels; ++j) {
      const double t0 = knots[j], t1 = knots[j + 1];
      const double w = (t1 - t0) * 0.5;
      out.lhs += w * (speed(t0 + (t1 - t0) * g0) + speed(t0 + (t1 - t0) * g1));
      const Vec2 next = map.forward(a + t1 * dir);
      out.rhs += dist(prev, next);
      prev = next;
    }
  }
  return out;
}

std::vector<std::string> domain_check(const Domain& d) {
  std::vector<std::string> bad;
  auto check_loop = [&](const Loop& loop, const std::string& name, bool ccw) {
    if (loop.pts.size() < 3) {
      bad.push_back(name + ": fewer than 3 vertices");
      return;
    }
    if (!loop_is_simple(loop.pts)) bad.push_back(name + ": not simple");
    const double area = polygon_area(loop.pts);
    if (ccw && area <= 0.0) bad.push_back(name + ": not CCW");
    if (!ccw && area >= 0.0) bad.push_back(name + ": not CW");
    for (const Vec2& p : loop.pts)
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        bad.push_back(name + ": non-finite vertex");
        break;
      }
  };
  check_loop(d.outer, "outer", true);
  for (std::size_t h = 0; h < d.holes.size(); ++h)
    check_loop(d.holes[h], "hole " + std::to_string(h), false);

  // holes strictly inside the outer loop, disjoint from it and from each other
  auto loops_touch = [&](const Polyline& a, const Polyline& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]))
          return true;
    return false;
  };
  for (std::size_t h = 0; h < d.holes.size(); ++h) {
    const Polyline& hp = d.holes[h].pts;
    for (const Vec2& p : hp)
      if (!point_in_loop(d.outer.pts, p)) {
        bad.push_back("hole " + std::to_string(h) + ": vertex outside outer loop");
        break;
      }
    if (loops_touch(hp, d.outer.pts))
      bad.push_back("hole " + std::to_string(h) + ": touches outer loop");
    for (std::size_t g = h + 1; g < d.holes.size(); ++g)
      if (loops_touch(hp, d.holes[g].pts))
        bad.push_back("holes " + std::to_string(h) + "," + std::to_string(g) + ": touch");
  }
  return bad;
}

// ---- serialization ---------------------------------------------------------

namespace {
void write_loop(std::string& out, const Loop& loop, const char* kind) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "loop %s %zu\n", kind, loop.pts.size());
  out += buf;
  for (const Vec2& p : loop.pts) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out += buf;
  }
}
}  // namespace

std::string write_domain(const Domain& d) {
  std::string out = "domain " + d.label + "\n";
  write_loop(out, d.outer, "outer");
  for (const Loop& h : d.holes) write_loop(out, h, "hole");
  char buf[160];
  for (const ChartMap& c : d.charts) {
    switch (c.kind) {
      case ChartMap::Kind::identity:
        out += "chart identity\n";
        break;
      case ChartMap::Kind::similarity:
        std::snprintf(buf, sizeof buf, "chart similarity %.17g\n", c.scale);
        out += buf;
        break;
      case ChartMap::Kind::spiral:
        out += "chart spiral\n";
        break;
      case ChartMap::Kind::composite:
        std::snprintf(buf, sizeof buf, "chart composite %.17g %.17g\n", c.outer_scale,
                      c.inner_scale);
        out += buf;
        break;
    }
  }
  return out;
}

Domain read_domain(const std::string& text) {
  std::istringstream in(text);
  Domain d;
  d.family = DomainFamily::polygon;
  std::string word;
  if (!(in >> word) || word != "domain") throw std::runtime_error("domain parse: missing header");
  in >> d.label;
  while (in >> word) {
    if (word == "loop") {
      std::string kind;
      std::size_t n = 0;
      if (!(in >> kind >> n)) throw std::runtime_error("domain parse: bad loop header");
      Loop loop;
      loop.pts.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        if (!(in >> loop.pts[i].x >> loop.pts[i].y))
          throw std::runtime_error("domain parse: bad vertex");
      loop.edges.assign(n, EdgeSource{});
      if (kind == "outer")
        d.outer = std::move(loop);
      else if (kind == "hole")
        d.holes.push_back(std::move(loop));
      else
        throw std::runtime_error("domain parse: unknown loop kind '" + kind + "'");
    } else if (word == "chart") {
      std::string kind;
      if (!(in >> kind)) throw std::runtime_error("domain parse: bad chart line");
      if (kind == "identity") {
        d.charts.push_back(identity_chart());
      } else if (kind == "similarity") {
        double k;
        if (!(in >> k)) throw std::runtime_error("domain parse: bad similarity");
        d.charts.push_back(similarity_chart(k));
      } else if (kind == "spiral") {
        d.charts.push_back(spiral_chart());
      } else if (kind == "composite") {
        double k, k1;
        if (!(in >> k >> k1)) throw std::runtime_error("domain parse: bad composite");
        d.charts.push_back(similarity_conjugate(spiral_chart(), k, k1));
      } else {
        throw std::runtime_error("domain parse: unknown chart kind '" + kind + "'");
      }
    } else {
      throw std::runtime_error("domain parse: unexpected token '" + word + "'");
    }
  }
  if (d.outer.pts.empty()) throw std::runtime_error("domain parse: no outer loop");
  return d;
}

}  // namespace roughlap::geom
