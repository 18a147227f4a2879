#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughlap {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

struct Mat2 {
  // row-major: [a b; c d]
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  double det() const { return a * d - b * c; }
};

inline Mat2 operator*(double s, Mat2 m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }

using Polyline = std::vector<Vec2>;  // closed loops store each vertex once

// Signed area of a closed polygon (positive = CCW).
double polygon_area(const Polyline& loop);

// Winding-number point-in-polygon test for a single closed loop.
bool point_in_loop(const Polyline& loop, Vec2 p);

// Max pairwise vertex distance.
double polygon_diameter(const Polyline& loop);

void polygon_bbox(const Polyline& loop, Vec2& lo, Vec2& hi);

// True if the closed loop has no self-intersections (vertices may touch only
// at consecutive edges).
bool loop_is_simple(const Polyline& loop);

// True if segments pq and rs properly intersect or overlap.
bool segments_intersect(Vec2 p, Vec2 q, Vec2 r, Vec2 s);

// Deterministic RNG (splitmix64). Used instead of <random> distributions so
// that every seeded estimate is reproducible bit-for-bit across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo,hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  std::uint64_t state_;
};

// Adaptive Simpson quadrature of f over [a,b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 40);

}  // namespace roughlap
