#include "roughlap/core.hpp"

#include <algorithm>
#include <limits>

namespace roughlap {

double polygon_area(const Polyline& loop) {
  double s = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = loop[i];
    const Vec2& q = loop[(i + 1) % n];
    s += cross(p, q);
  }
  return 0.5 * s;
}

bool point_in_loop(const Polyline& loop, Vec2 p) {
  // standard crossing-number walk; points on the boundary count as inside
  bool inside = false;
  const std::size_t n = loop.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xcut = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xcut) inside = !inside;
    }
  }
  return inside;
}

double polygon_diameter(const Polyline& loop) {
  double d = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i)
    for (std::size_t j = i + 1; j < loop.size(); ++j)
      d = std::max(d, dist(loop[i], loop[j]));
  return d;
}

void polygon_bbox(const Polyline& loop, Vec2& lo, Vec2& hi) {
  lo = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  hi = {-lo.x, -lo.y};
  for (const Vec2& p : loop) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
}

static int orient(Vec2 a, Vec2 b, Vec2 c) {
  double v = cross(b - a, c - a);
  double scale = std::abs(b.x - a.x) + std::abs(b.y - a.y) + std::abs(c.x - a.x) +
                 std::abs(c.y - a.y);
  double eps = 1e-14 * scale * scale;
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

static bool on_segment(Vec2 p, Vec2 q, Vec2 r) {
  return std::min(p.x, q.x) - 1e-15 <= r.x && r.x <= std::max(p.x, q.x) + 1e-15 &&
         std::min(p.y, q.y) - 1e-15 <= r.y && r.y <= std::max(p.y, q.y) + 1e-15;
}

bool segments_intersect(Vec2 p, Vec2 q, Vec2 r, Vec2 s) {
  int o1 = orient(p, q, r);
  int o2 = orient(p, q, s);
  int o3 = orient(r, s, p);
  int o4 = orient(r, s, q);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p, q, r)) return true;
  if (o2 == 0 && on_segment(p, q, s)) return true;
  if (o3 == 0 && on_segment(r, s, p)) return true;
  if (o4 == 0 && on_segment(r, s, q)) return true;
  return false;
}

bool loop_is_simple(const Polyline& loop) {
  const std::size_t n = loop.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = loop[i], b = loop[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip edges sharing an endpoint
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      Vec2 c = loop[j], d = loop[(j + 1) % n];
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  // repeated vertices also break simplicity
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (dist(loop[i], loop[j]) == 0.0) return false;
  return true;
}

static double simpson(const std::function<double(double)>& f, double a, double fa, double b,
                      double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  (void)f;
  (void)m;
}

static double adsimp(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, m, fm, lm, flm);
  double right = simpson(f, m, fm, b, fb, rm, frm);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adsimp(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adsimp(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = simpson(f, a, fa, b, fb, m, fm);
  return adsimp(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

}  // namespace roughlap
