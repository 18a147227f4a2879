#include "roughlap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace roughlap::mesh {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Structured-mesh assembly helper; vertices deduplicated by exact coordinate
// match (shared block interfaces compute shared nodes with the same formula).
struct Builder {
  Mesh m;
  std::map<std::pair<double, double>, int> pool;

  int vertex(Vec2 p) {
    auto key = std::make_pair(p.x, p.y);
    auto it = pool.find(key);
    if (it != pool.end()) return it->second;
    int id = m.n_vertices();
    m.vertices.push_back(p);
    pool.emplace(key, id);
    return id;
  }

  void tri(int a, int b, int c) { m.triangles.push_back({a, b, c}); }

  // corners CCW: v00-v10-v11-v01; parity picks the diagonal (union jack)
  void quad(int v00, int v10, int v11, int v01, int parity) {
    if (v00 == v01) {  // collapsed left edge
      tri(v00, v10, v11);
      return;
    }
    if (v10 == v11) {  // collapsed right edge
      tri(v00, v10, v01);
      return;
    }
    if (parity % 2 == 0) {
      tri(v00, v10, v11);
      tri(v00, v11, v01);
    } else {
      tri(v00, v10, v01);
      tri(v10, v11, v01);
    }
  }

  void bedge(int a, int b, int marker, int curve = -1, double t0 = 0.0, double t1 = 0.0) {
    m.boundary_edges.push_back({a, b, marker});
    m.boundary_curves.push_back({curve, t0, t1});
  }
};

double line_y(double x) { return 0.1 * x; }
double rect_left(int k) { return 3.0 * std::ldexp(1.0, -k - 2); }
double rect_right(int k) { return 5.0 * std::ldexp(1.0, -k - 2); }
double rect_top(int k) { return std::ldexp(1.0, -k - 2); }

void subdivide(std::vector<double>& xs, double a, double b, double h) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-12)));
  for (int i = 1; i < n; ++i) xs.push_back(a + (b - a) * i / n);
  xs.push_back(b);
}

// ---- rect-union (Example 5.7) ----------------------------------------------

struct Segment {
  enum class Type { sliver, rect, gap, wedge, notch };
  Type type;
  int k = 0;       // rectangle / gap index
  double a, b;     // x-range
  int marker = 0;  // marker of the boundary at y=0 / on the line over this span
};

Mesh triangulate_rect_union(int k_max, double target_h) {
  const double thresh = (k_max >= 1) ? std::ldexp(1.0, -k_max) : 0.5;
  if (target_h > thresh) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "feature underresolved: rectangle P%d (width %.6g) needs target_h <= %.6g",
                  std::max(k_max, 1), std::ldexp(1.0, -std::max(k_max, 1) - 1), thresh);
    throw std::runtime_error(msg);
  }
  const double x_cut = std::ldexp(1.0, -(k_max + 4));
  const int wedge_marker = k_max;  // wedge hole is listed last

  std::vector<Segment> segs;
  segs.push_back({Segment::Type::sliver, 0, 0.0, x_cut, -1});
  if (k_max >= 1) {
    segs.push_back({Segment::Type::wedge, 0, x_cut, rect_left(k_max), wedge_marker});
    for (int k = k_max; k >= 1; --k) {
      segs.push_back({Segment::Type::rect, k, rect_left(k), rect_right(k), -1});
      if (k >= 2)
        segs.push_back({Segment::Type::gap, k - 1, rect_right(k), rect_left(k - 1), k - 1});
    }
    segs.push_back({Segment::Type::notch, 0, rect_right(1), 1.0, 0});
  } else {
    segs.push_back({Segment::Type::notch, 0, x_cut, 1.0, 0});
  }

  // global x-grid: per-feature refinement inside rectangles, target_h elsewhere
  std::vector<double> xs = {0.0};
  std::vector<std::pair<int, int>> seg_cols;  // column-index range per segment
  for (Segment& s : segs) {
    int c0 = static_cast<int>(xs.size()) - 1;
    double h = target_h;
    if (s.type == Segment::Type::rect) h = std::min(h, 0.5 * (s.b - s.a));
    if (s.type == Segment::Type::sliver) h = std::max(s.b - s.a, 1e-9);  // one column
    subdivide(xs, s.a, s.b, h);
    seg_cols.push_back({c0, static_cast<int>(xs.size()) - 1});
  }
  const int nx = static_cast<int>(xs.size());
  std::vector<double> yline(nx);
  for (int i = 0; i < nx; ++i) yline[i] = line_y(xs[i]);

  Builder bld;

  // S = (0,1) x (-1,0)
  const int mS = std::max(1, static_cast<int>(std::ceil(1.0 / target_h)));
  std::vector<std::vector<int>> sgrid(mS + 1, std::vector<int>(nx));
  for (int j = 0; j <= mS; ++j) {
    const double y = (j == mS) ? 0.0 : -1.0 + static_cast<double>(j) / mS;
    for (int i = 0; i < nx; ++i) sgrid[j][i] = bld.vertex({xs[i], y});
  }
  for (int j = 0; j < mS; ++j)
    for (int i = 0; i + 1 < nx; ++i)
      bld.quad(sgrid[j][i], sgrid[j][i + 1], sgrid[j + 1][i + 1], sgrid[j + 1][i], i + j);

  // V = {0<x<1, line<y<1}
  const int mV = std::max(1, static_cast<int>(std::ceil(1.0 / target_h)));
  std::vector<std::vector<int>> vgrid(mV + 1, std::vector<int>(nx));
  for (int j = 0; j <= mV; ++j)
    for (int i = 0; i < nx; ++i) {
      double y;
      if (j == 0)
        y = yline[i];
      else if (j == mV)
        y = 1.0;
      else
        y = yline[i] + (static_cast<double>(j) / mV) * (1.0 - yline[i]);
      vgrid[j][i] = bld.vertex({xs[i], y});
    }
  for (int j = 0; j < mV; ++j)
    for (int i = 0; i + 1 < nx; ++i)
      bld.quad(vgrid[j][i], vgrid[j][i + 1], vgrid[j + 1][i + 1], vgrid[j + 1][i], i + j);

  // band blocks between y=0 and the line: sliver + rectangles
  for (std::size_t si = 0; si < segs.size(); ++si) {
    const Segment& s = segs[si];
    if (s.type != Segment::Type::sliver && s.type != Segment::Type::rect) continue;
    const auto [c0, c1] = seg_cols[si];
    const int mB = (s.type == Segment::Type::sliver)
                       ? 1
                       : std::max(1, static_cast<int>(std::ceil(line_y(s.b) / target_h)));
    std::vector<std::vector<int>> grid(mB + 1, std::vector<int>(c1 - c0 + 1));
    for (int j = 0; j <= mB; ++j)
      for (int i = c0; i <= c1; ++i) {
        const double y = (static_cast<double>(j) / mB) * yline[i];
        grid[j][i - c0] = bld.vertex({xs[i], (j == 0) ? 0.0 : y});
      }
    for (int j = 0; j < mB; ++j)
      for (int i = 0; i + 1 <= c1 - c0; ++i)
        bld.quad(grid[j][i], grid[j][i + 1], grid[j + 1][i + 1], grid[j + 1][i], i + j);

    // vertical sides of the band are hole / outer boundaries
    auto side_edges = [&](int col, int marker) {
      for (int j = 0; j < mB; ++j) bld.bedge(grid[j][col - c0], grid[j + 1][col - c0], marker);
    };
    if (s.type == Segment::Type::sliver) {
      if (x_cut < 1.0) side_edges(c1, (k_max >= 1) ? wedge_marker : 0);
    } else {
      side_edges(c0, s.k);                              // left side: gap k / wedge
      side_edges(c1, (s.k == 1) ? 0 : s.k - 1);         // right side: gap k-1 / notch
    }
  }

  // horizontal boundary edges at y=0 and on the line over uncovered spans
  for (std::size_t si = 0; si < segs.size(); ++si) {
    const Segment& s = segs[si];
    if (s.marker < 0) continue;
    const auto [c0, c1] = seg_cols[si];
    for (int i = c0; i < c1; ++i) {
      bld.bedge(sgrid[mS][i], sgrid[mS][i + 1], s.marker);
      bld.bedge(vgrid[0][i], vgrid[0][i + 1], s.marker);
    }
  }

  // outer rectangle sides of S and V
  for (int j = 0; j < mS; ++j) {
    bld.bedge(sgrid[j][0], sgrid[j + 1][0], 0);
    bld.bedge(sgrid[j][nx - 1], sgrid[j + 1][nx - 1], 0);
  }
  for (int i = 0; i + 1 < nx; ++i) bld.bedge(sgrid[0][i], sgrid[0][i + 1], 0);
  for (int j = 0; j < mV; ++j) {
    bld.bedge(vgrid[j][0], vgrid[j + 1][0], 0);
    bld.bedge(vgrid[j][nx - 1], vgrid[j + 1][nx - 1], 0);
  }
  for (int i = 0; i + 1 < nx; ++i) bld.bedge(vgrid[mV][i], vgrid[mV][i + 1], 0);

  return std::move(bld.m);
}

// S plus the full rectangles, no wedge (the class-L piece)
Mesh triangulate_rect_union_part(int k_max, double target_h) {
  const double thresh = (k_max >= 1) ? std::ldexp(1.0, -k_max) : 0.5;
  if (target_h > thresh)
    throw std::runtime_error("feature underresolved: smallest rectangle needs target_h <= " +
                             std::to_string(thresh));

  std::vector<Segment> segs;
  double prev = 0.0;
  for (int k = k_max; k >= 1; --k) {
    if (rect_left(k) > prev) segs.push_back({Segment::Type::gap, k, prev, rect_left(k), 0});
    segs.push_back({Segment::Type::rect, k, rect_left(k), rect_right(k), -1});
    prev = rect_right(k);
  }
  segs.push_back({Segment::Type::notch, 0, prev, 1.0, 0});

  std::vector<double> xs = {0.0};
  std::vector<std::pair<int, int>> seg_cols;
  for (Segment& s : segs) {
    int c0 = static_cast<int>(xs.size()) - 1;
    double h = target_h;
    if (s.type == Segment::Type::rect) h = std::min(h, 0.5 * (s.b - s.a));
    subdivide(xs, s.a, s.b, h);
    seg_cols.push_back({c0, static_cast<int>(xs.size()) - 1});
  }
  const int nx = static_cast<int>(xs.size());

  Builder bld;
  const int mS = std::max(1, static_cast<int>(std::ceil(1.0 / target_h)));
  std::vector<std::vector<int>> sgrid(mS + 1, std::vector<int>(nx));
  for (int j = 0; j <= mS; ++j) {
    const double y = (j == mS) ? 0.0 : -1.0 + static_cast<double>(j) / mS;
    for (int i = 0; i < nx; ++i) sgrid[j][i] = bld.vertex({xs[i], y});
  }
  for (int j = 0; j < mS; ++j)
    for (int i = 0; i + 1 < nx; ++i)
      bld.quad(sgrid[j][i], sgrid[j][i + 1], sgrid[j + 1][i + 1], sgrid[j + 1][i], i + j);

  for (std::size_t si = 0; si < segs.size(); ++si) {
    const Segment& s = segs[si];
    const auto [c0, c1] = seg_cols[si];
    if (s.type != Segment::Type::rect) {
      for (int i = c0; i < c1; ++i) bld.bedge(sgrid[mS][i], sgrid[mS][i + 1], 0);
      continue;
    }
    const double top = rect_top(s.k);
    const int mB = std::max(1, static_cast<int>(std::ceil(top / target_h)));
    std::vector<std::vector<int>> grid(mB + 1, std::vector<int>(c1 - c0 + 1));
    for (int j = 0; j <= mB; ++j)
      for (int i = c0; i <= c1; ++i) {
        const double y = (j == 0) ? 0.0 : (static_cast<double>(j) / mB) * top;
        grid[j][i - c0] = bld.vertex({xs[i], y});
      }
    for (int j = 0; j < mB; ++j)
      for (int i = 0; i + 1 <= c1 - c0; ++i)
        bld.quad(grid[j][i], grid[j][i + 1], grid[j + 1][i + 1], grid[j + 1][i], i + j);
    for (int j = 0; j < mB; ++j) {
      bld.bedge(grid[j][0], grid[j + 1][0], 0);
      bld.bedge(grid[j][c1 - c0], grid[j + 1][c1 - c0], 0);
    }
    for (int i = 0; i + 1 <= c1 - c0; ++i) bld.bedge(grid[mB][i], grid[mB][i + 1], 0);
  }

  for (int j = 0; j < mS; ++j) {
    bld.bedge(sgrid[j][0], sgrid[j + 1][0], 0);
    bld.bedge(sgrid[j][nx - 1], sgrid[j + 1][nx - 1], 0);
  }
  for (int i = 0; i + 1 < nx; ++i) bld.bedge(sgrid[0][i], sgrid[0][i + 1], 0);
  return std::move(bld.m);
}

Mesh triangulate_wedge(double target_h) {
  Builder bld;
  const int nx = std::max(2, static_cast<int>(std::ceil(1.0 / target_h)));
  const int ny = nx;
  std::vector<std::vector<int>> grid(ny + 1, std::vector<int>(nx + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = static_cast<double>(i) / nx;
      const double ya = line_y(x);
      double y;
      if (j == 0)
        y = ya;
      else if (j == ny)
        y = 1.0;
      else
        y = ya + (static_cast<double>(j) / ny) * (1.0 - ya);
      grid[j][i] = bld.vertex({x, y});
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      bld.quad(grid[j][i], grid[j][i + 1], grid[j + 1][i + 1], grid[j + 1][i], i + j);
  for (int i = 0; i < nx; ++i) {
    bld.bedge(grid[0][i], grid[0][i + 1], 0);
    bld.bedge(grid[ny][i], grid[ny][i + 1], 0);
  }
  for (int j = 0; j < ny; ++j) {
    bld.bedge(grid[j][0], grid[j + 1][0], 0);
    bld.bedge(grid[j][nx], grid[j + 1][nx], 0);
  }
  return std::move(bld.m);
}

Mesh triangulate_rect(double x0, double y0, double x1, double y1, double target_h) {
  Builder bld;
  const int nx = std::max(1, static_cast<int>(std::ceil((x1 - x0) / target_h - 1e-12)));
  const int ny = std::max(1, static_cast<int>(std::ceil((y1 - y0) / target_h - 1e-12)));
  std::vector<std::vector<int>> grid(ny + 1, std::vector<int>(nx + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      grid[j][i] = bld.vertex({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      bld.quad(grid[j][i], grid[j][i + 1], grid[j + 1][i + 1], grid[j + 1][i], i + j);
  for (int i = 0; i < nx; ++i) {
    bld.bedge(grid[0][i], grid[0][i + 1], 0);
    bld.bedge(grid[ny][i], grid[ny][i + 1], 0);
  }
  for (int j = 0; j < ny; ++j) {
    bld.bedge(grid[j][0], grid[j + 1][0], 0);
    bld.bedge(grid[j][nx], grid[j + 1][nx], 0);
  }
  return std::move(bld.m);
}

Mesh triangulate_lshape(double target_h) {
  Builder bld;
  int n = std::max(2, static_cast<int>(std::ceil(1.0 / target_h)));
  if (n % 2) ++n;  // keep the re-entrant corner on the grid
  auto keep = [&](int i, int j) { return !(i >= n / 2 && j >= n / 2); };
  std::vector<std::vector<int>> grid(n + 1, std::vector<int>(n + 1, -1));
  auto vtx = [&](int i, int j) {
    if (grid[j][i] < 0)
      grid[j][i] = bld.vertex({static_cast<double>(i) / n, static_cast<double>(j) / n});
    return grid[j][i];
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!keep(i, j)) continue;
      bld.quad(vtx(i, j), vtx(i + 1, j), vtx(i + 1, j + 1), vtx(i, j + 1), i + j);
    }
  // boundary: cell edges with no kept neighbor
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!keep(i, j)) continue;
      if (j == 0 || !keep(i, j - 1)) bld.bedge(grid[j][i], grid[j][i + 1], 0);
      if (j == n - 1 || !keep(i, j + 1)) bld.bedge(grid[j + 1][i], grid[j + 1][i + 1], 0);
      if (i == 0 || !keep(i - 1, j)) bld.bedge(grid[j][i], grid[j + 1][i], 0);
      if (i == n - 1 || !keep(i + 1, j)) bld.bedge(grid[j][i + 1], grid[j + 1][i + 1], 0);
    }
  return std::move(bld.m);
}

Mesh triangulate_disk(double target_h) {
  Builder bld;
  const int N = std::max(2, static_cast<int>(std::ceil(1.5 / target_h)));
  const int n = 2 * N;  // cells per side of the reference square
  auto map = [](double u, double v) {
    return Vec2{u * std::sqrt(1.0 - 0.5 * v * v), v * std::sqrt(1.0 - 0.5 * u * u)};
  };
  std::vector<std::vector<int>> grid(n + 1, std::vector<int>(n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const double u = -1.0 + 2.0 * i / n;
      const double v = -1.0 + 2.0 * j / n;
      grid[j][i] = bld.vertex(map(u, v));
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      bld.quad(grid[j][i], grid[j][i + 1], grid[j + 1][i + 1], grid[j + 1][i], i + j);

  bld.m.curves.push_back([](double t) { return Vec2{std::cos(t), std::sin(t)}; });
  auto arc_edge = [&](int a, int b) {
    const Vec2 pa = bld.m.vertices[a], pb = bld.m.vertices[b];
    double t0 = std::atan2(pa.y, pa.x);
    double t1 = std::atan2(pb.y, pb.x);
    if (t1 - t0 > 3.141592653589793) t1 -= kTwoPi;
    if (t0 - t1 > 3.141592653589793) t1 += kTwoPi;
    bld.bedge(a, b, 0, 0, t0, t1);
  };
  for (int i = 0; i < n; ++i) {
    arc_edge(grid[0][i], grid[0][i + 1]);
    arc_edge(grid[n][i], grid[n][i + 1]);
    arc_edge(grid[i][0], grid[i + 1][0]);
    arc_edge(grid[i][n], grid[i + 1][n]);
  }
  return std::move(bld.m);
}

// The spiral band is meshed in log-polar coordinates (theta, ln rho), where
// the pullback metric is conformal (angles survive, sizes scale with rho, so
// uniform cells give the geometric grading toward the origin). There the band
// is a straight strip of slope -1/(2 pi) and perpendicular thickness
// ln2 * cos(alpha), cut off by the oblique lines ln rho = 0 and -n along
// which the circle arcs run. Rows run parallel to the spirals; consecutive
// rows are stitched by a sorted merge, and the thin 9-degree end wedges
// between a row and the arc cut get a graded strip fill whose quality floor
// is the intrinsic corner angle.
Mesh triangulate_spiral(int n_max, double target_h) {
  if (target_h > 0.3)
    throw std::runtime_error("feature underresolved: spiral winding needs target_h <= 0.3");
  const double cosA = kTwoPi / std::sqrt(kTwoPi * kTwoPi + 1.0);
  const double sinA = 1.0 / std::sqrt(kTwoPi * kTwoPi + 1.0);
  const double thickness = std::log(2.0) * cosA;  // across the band
  const double L = n_max / sinA;                  // along it, cut to cut

  const int m = std::max(2, static_cast<int>(std::ceil(thickness / target_h)));
  const double deta = thickness / m;
  const double D = kTwoPi * deta;  // row-to-row offset of the oblique cuts

  // node offsets within a row: graded wedge fractions at both ends
  const std::vector<double> F = {0.0, 0.125, 0.25, 0.5, 0.75, 1.0};
  const int nf = static_cast<int>(F.size()) - 1;  // 5
  std::vector<double> offs;
  for (int j = 0; j < nf; ++j) offs.push_back(F[j] * D);
  const int n_mid = std::max(1, static_cast<int>(std::ceil((L - 2.0 * D) / target_h)));
  for (int j = 0; j <= n_mid; ++j) offs.push_back(D + (L - 2.0 * D) * j / n_mid);
  for (int j = nf - 1; j >= 0; --j) offs.push_back(L - F[j] * D);
  const int K = static_cast<int>(offs.size()) - 1;

  auto phys = [&](double xi, double eta) {
    const double a = xi * cosA + eta * sinA;   // theta
    const double b = -xi * sinA + eta * cosA;  // ln rho
    const double rho = std::exp(b);
    return Vec2{rho * std::cos(a), rho * std::sin(a)};
  };

  Mesh msh;
  std::vector<std::vector<int>> row(m + 1, std::vector<int>(K + 1));
  std::vector<double> start(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double eta = i * deta;
    start[i] = kTwoPi * eta;  // row origins sit exactly on the outer cut
    for (int k = 0; k <= K; ++k) {
      row[i][k] = msh.n_vertices();
      msh.vertices.push_back(phys(start[i] + offs[k], eta));
    }
  }

  auto emit = [&](int v0, int v1, int v2) {
    const Vec2 p0 = msh.vertices[v0], p1 = msh.vertices[v1], p2 = msh.vertices[v2];
    const double area = cross(p1 - p0, p2 - p0);
    if (area == 0.0) return;
    if (area > 0.0)
      msh.triangles.push_back({v0, v1, v2});
    else
      msh.triangles.push_back({v0, v2, v1});
  };

  // snapping curves: two spirals, outer arc, inner arc
  const double T = thickness;
  msh.curves.push_back([phys](double xi) { return phys(xi, 0.0); });
  msh.curves.push_back([phys, T](double xi) { return phys(xi, T); });
  msh.curves.push_back([phys](double eta) { return phys(kTwoPi * eta, eta); });
  msh.curves.push_back([phys, L](double eta) { return phys(kTwoPi * eta + L, eta); });
  auto bedge = [&](int va, int vb, int curve, double t0, double t1) {
    msh.boundary_edges.push_back({va, vb, 0});
    msh.boundary_curves.push_back({curve, t0, t1});
  };

  for (int i = 0; i < m; ++i) {
    const double eta = i * deta;
    // left wedge between row i and the outer-arc cut up to row i+1's origin
    {
      std::vector<int> cut(nf + 1);
      cut[0] = row[i][0];
      cut[nf] = row[i + 1][0];
      for (int j = 1; j < nf; ++j)
        cut[j] = msh.n_vertices(),
        msh.vertices.push_back(phys(start[i] + F[j] * D, eta + F[j] * deta));
      for (int j = 0; j < nf; ++j) {
        emit(row[i][j], row[i][j + 1], cut[j + 1]);
        if (j > 0) emit(row[i][j], cut[j + 1], cut[j]);
        bedge(cut[j], cut[j + 1], 2, eta + F[j] * deta, eta + F[j + 1] * deta);
      }
    }
    // right wedge between row i+1 and the inner-arc cut
    {
      std::vector<int> cut(nf + 1);  // cut[j] at fraction g = 1 - F[nf-j] ... ascending eta
      cut[0] = row[i][K];
      cut[nf] = row[i + 1][K];
      for (int j = 1; j < nf; ++j) {
        const double g = 1.0 - F[nf - j];
        cut[j] = msh.n_vertices();
        msh.vertices.push_back(phys(start[i] + L + g * D, eta + g * deta));
      }
      // row i+1 suffix nodes share xi with the cut nodes: offs index K-nf+j <-> g
      for (int j = 0; j < nf; ++j) {
        const int r0 = row[i + 1][K - nf + j], r1 = row[i + 1][K - nf + j + 1];
        emit(cut[j], cut[j + 1], r1);  // degenerates at the corner strip, skipped
        emit(cut[j], r1, r0);
        const double g0 = 1.0 - F[nf - j], g1 = 1.0 - F[nf - j - 1];
        bedge(cut[j], cut[j + 1], 3, eta + g0 * deta, eta + g1 * deta);
      }
    }
    // middle: merge row i (from offs index nf) against row i+1 (up to K - nf)
    {
      int a = nf, b = 0;
      auto lo = [&](int k) { return start[i] + offs[k]; };
      auto hi = [&](int k) { return start[i + 1] + offs[k]; };
      while (a < K || b < K - nf) {
        const bool advance_lo = (b == K - nf) || (a < K && lo(a + 1) <= hi(b + 1));
        if (advance_lo) {
          emit(row[i][a], row[i][a + 1], row[i + 1][b]);
          ++a;
        } else {
          emit(row[i][a], row[i + 1][b + 1], row[i + 1][b]);
          ++b;
        }
      }
    }
  }

  for (int k = 0; k < K; ++k) {
    bedge(row[0][k], row[0][k + 1], 0, start[0] + offs[k], start[0] + offs[k + 1]);
    bedge(row[m][k], row[m][k + 1], 1, start[m] + offs[k], start[m] + offs[k + 1]);
  }
  return msh;
}

}  // namespace

Mesh triangulate(const geom::Domain& domain, double target_h) {
  if (!(target_h > 0.0)) throw std::invalid_argument("target_h must be positive");
  Mesh m;
  switch (domain.family) {
    case geom::DomainFamily::square:
    case geom::DomainFamily::rect: {
      const auto& p = domain.params;
      double x0 = p.count("x0") ? p.at("x0") : 0.0;
      double y0 = p.count("y0") ? p.at("y0") : 0.0;
      double x1 = p.count("x1") ? p.at("x1") : 1.0;
      double y1 = p.count("y1") ? p.at("y1") : 1.0;
      m = triangulate_rect(x0, y0, x1, y1, target_h);
      break;
    }
    case geom::DomainFamily::lshape:
      m = triangulate_lshape(target_h);
      break;
    case geom::DomainFamily::disk:
      m = triangulate_disk(target_h);
      break;
    case geom::DomainFamily::rect_union:
      m = triangulate_rect_union(static_cast<int>(domain.params.at("k_max")), target_h);
      break;
    case geom::DomainFamily::rect_union_part:
      m = triangulate_rect_union_part(static_cast<int>(domain.params.at("k_max")), target_h);
      break;
    case geom::DomainFamily::wedge:
      m = triangulate_wedge(target_h);
      break;
    case geom::DomainFamily::spiral:
      m = triangulate_spiral(static_cast<int>(domain.params.at("n_max")), target_h);
      break;
    default:
      throw std::runtime_error("triangulate: unsupported domain family '" + domain.label + "'");
  }
  if (domain.offset.x != 0.0 || domain.offset.y != 0.0) {
    const Vec2 off = domain.offset;
    for (Vec2& v : m.vertices) v = v + off;
    for (auto& c : m.curves) {
      auto base = c;
      c = [base, off](double t) { return base(t) + off; };
    }
  }
  return m;
}

Mesh refine(const Mesh& m) {
  Mesh out;
  out.vertices = m.vertices;
  out.axisymmetric = m.axisymmetric;
  out.curves = m.curves;

  std::map<std::pair<int, int>, int> mid;
  auto edge_key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };

  const bool curved = !m.boundary_curves.empty();
  // boundary midpoints first so curved edges snap onto their true curve
  for (std::size_t e = 0; e < m.boundary_edges.size(); ++e) {
    const BoundaryEdge& be = m.boundary_edges[e];
    Vec2 p;
    double tm = 0.0;
    int curve = -1;
    if (curved && m.boundary_curves[e].curve >= 0) {
      curve = m.boundary_curves[e].curve;
      tm = 0.5 * (m.boundary_curves[e].t0 + m.boundary_curves[e].t1);
      p = m.curves[curve](tm);
    } else {
      p = 0.5 * (m.vertices[be.a] + m.vertices[be.b]);
    }
    const int id = out.n_vertices();
    out.vertices.push_back(p);
    mid[edge_key(be.a, be.b)] = id;

    if (curved) {
      out.boundary_edges.push_back({be.a, id, be.marker});
      out.boundary_curves.push_back({curve, m.boundary_curves[e].t0, tm});
      out.boundary_edges.push_back({id, be.b, be.marker});
      out.boundary_curves.push_back({curve, tm, m.boundary_curves[e].t1});
    } else {
      out.boundary_edges.push_back({be.a, id, be.marker});
      out.boundary_edges.push_back({id, be.b, be.marker});
    }
  }

  auto midpoint = [&](int a, int b) {
    auto key = edge_key(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const int id = out.n_vertices();
    out.vertices.push_back(0.5 * (m.vertices[a] + m.vertices[b]));
    mid.emplace(key, id);
    return id;
  };

  for (const auto& t : m.triangles) {
    const int a = t[0], b = t[1], c = t[2];
    const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
  }
  return out;
}

double triangle_area(const Mesh& m, int t) {
  const auto& tr = m.triangles[t];
  const Vec2 a = m.vertices[tr[0]], b = m.vertices[tr[1]], c = m.vertices[tr[2]];
  return 0.5 * cross(b - a, c - a);
}

double mesh_area(const Mesh& m) {
  double s = 0.0;
  for (int t = 0; t < m.n_triangles(); ++t) s += triangle_area(m, t);
  return s;
}

double mesh_h(const Mesh& m) {
  double h = 0.0;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e)
      h = std::max(h, dist(m.vertices[t[e]], m.vertices[t[(e + 1) % 3]]));
  return h;
}

int nearest_vertex(const Mesh& m, Vec2 p) {
  int best = -1;
  double bd = std::numeric_limits<double>::max();
  for (int i = 0; i < m.n_vertices(); ++i) {
    const double d = dist(m.vertices[i], p);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

int locate_triangle(const Mesh& m, Vec2 p) {
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    const Vec2 a = m.vertices[tr[0]], b = m.vertices[tr[1]], c = m.vertices[tr[2]];
    const double d = cross(b - a, c - a);
    if (d <= 0.0) continue;
    const double w0 = cross(b - p, c - p) / d;
    const double w1 = cross(c - p, a - p) / d;
    const double w2 = 1.0 - w0 - w1;
    const double tol = -1e-10;
    if (w0 >= tol && w1 >= tol && w2 >= tol) return t;
  }
  return -1;
}

double interpolate(const Mesh& m, const std::vector<double>& nodal, Vec2 p) {
  const int t = locate_triangle(m, p);
  if (t < 0) throw std::runtime_error("interpolate: point outside mesh");
  const auto& tr = m.triangles[t];
  const Vec2 a = m.vertices[tr[0]], b = m.vertices[tr[1]], c = m.vertices[tr[2]];
  const double d = cross(b - a, c - a);
  const double w0 = cross(b - p, c - p) / d;
  const double w1 = cross(c - p, a - p) / d;
  const double w2 = 1.0 - w0 - w1;
  return w0 * nodal[tr[0]] + w1 * nodal[tr[1]] + w2 * nodal[tr[2]];
}

ValidationReport validate(const Mesh& m) {
  ValidationReport rep;
  const int nv = m.n_vertices();

  for (int t = 0; t < m.n_triangles(); ++t) {
    for (int e = 0; e < 3; ++e)
      if (m.triangles[t][e] < 0 || m.triangles[t][e] >= nv) {
        rep.violations.push_back("vertex index out of range at triangle " + std::to_string(t));
        return rep;
      }
    const double area = triangle_area(m, t);
    if (area <= 0.0) rep.violations.push_back("negative area at triangle " + std::to_string(t));
  }

  // quality stats
  for (const auto& t : m.triangles) {
    const Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
    const double area = 0.5 * std::abs(cross(b - a, c - a));
    if (area <= 0.0) continue;
    const double lmax = std::max({la, lb, lc});
    rep.max_aspect = std::max(rep.max_aspect, lmax * lmax / (2.0 * area));
    auto angle = [](double opp, double s1, double s2) {
      double cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
      cosv = std::clamp(cosv, -1.0, 1.0);
      return std::acos(cosv) * 180.0 / 3.141592653589793;
    };
    rep.min_angle_deg = std::min({rep.min_angle_deg, angle(la, lb, lc), angle(lb, lc, la),
                                  angle(lc, la, lb)});
  }

  // conformity
  std::map<std::pair<int, int>, int> edge_count;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) ++edge_count[key(t[e], t[(e + 1) % 3])];

  std::set<std::pair<int, int>> listed;
  for (const auto& be : m.boundary_edges) {
    auto k = key(be.a, be.b);
    if (!listed.insert(k).second)
      rep.violations.push_back("duplicate boundary edge " + std::to_string(be.a) + "-" +
                               std::to_string(be.b));
    auto it = edge_count.find(k);
    if (it == edge_count.end())
      rep.violations.push_back("boundary edge not in mesh: " + std::to_string(be.a) + "-" +
                               std::to_string(be.b));
    else if (it->second != 1)
      rep.violations.push_back("listed boundary edge is interior: " + std::to_string(be.a) +
                               "-" + std::to_string(be.b));
  }
  auto on_axis = [&](int v) { return m.axisymmetric && std::abs(m.vertices[v].x) <= 1e-12; };
  for (const auto& [k, cnt] : edge_count) {
    if (cnt > 2)
      rep.violations.push_back("edge shared by more than 2 triangles: " +
                               std::to_string(k.first) + "-" + std::to_string(k.second));
    if (cnt == 1 && !listed.count(k) && !(on_axis(k.first) && on_axis(k.second)))
      rep.violations.push_back("exterior edge missing from boundary list: " +
                               std::to_string(k.first) + "-" + std::to_string(k.second));
  }

  if (m.axisymmetric)
    for (int i = 0; i < nv; ++i)
      if (m.vertices[i].x < -1e-12)
        rep.violations.push_back("negative r at vertex " + std::to_string(i));

  // boundary loops: connected components of the boundary-edge graph; chains
  // may terminate on the axis of an axisymmetric mesh
  {
    std::map<int, std::vector<int>> adj;  // vertex -> boundary edge ids
    for (std::size_t e = 0; e < m.boundary_edges.size(); ++e) {
      adj[m.boundary_edges[e].a].push_back(static_cast<int>(e));
      adj[m.boundary_edges[e].b].push_back(static_cast<int>(e));
    }
    for (const auto& [v, es] : adj) {
      if (es.size() > 2)
        rep.violations.push_back("non-manifold boundary at vertex " + std::to_string(v));
      if (es.size() == 1 && !on_axis(v))
        rep.violations.push_back("open boundary chain at vertex " + std::to_string(v));
    }
    std::vector<char> seen(m.boundary_edges.size(), 0);
    for (std::size_t e0 = 0; e0 < m.boundary_edges.size(); ++e0) {
      if (seen[e0]) continue;
      ++rep.boundary_loops;
      std::vector<int> stack = {static_cast<int>(e0)};
      seen[e0] = 1;
      while (!stack.empty()) {
        const int e = stack.back();
        stack.pop_back();
        for (int v : {m.boundary_edges[e].a, m.boundary_edges[e].b})
          for (int f : adj[v])
            if (!seen[f]) {
              seen[f] = 1;
              stack.push_back(f);
            }
      }
    }
  }
  return rep;
}

std::string write_mesh(const Mesh& m) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "mesh %d %d %zu %d\n", m.n_vertices(), m.n_triangles(),
                m.boundary_edges.size(), m.axisymmetric ? 1 : 0);
  out += buf;
  for (const Vec2& v : m.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
    out += buf;
  }
  for (const auto& t : m.triangles) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", t[0], t[1], t[2]);
    out += buf;
  }
  for (const auto& e : m.boundary_edges) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", e.a, e.b, e.marker);
    out += buf;
  }
  return out;
}

Mesh read_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  if (!(in >> word) || word != "mesh") throw std::runtime_error("mesh parse: missing header");
  int nv = 0, nt = 0, nbe = 0, axisym = 0;
  if (!(in >> nv >> nt >> nbe >> axisym)) throw std::runtime_error("mesh parse: bad header");
  Mesh m;
  m.axisymmetric = axisym != 0;
  m.vertices.resize(nv);
  for (int i = 0; i < nv; ++i)
    if (!(in >> m.vertices[i].x >> m.vertices[i].y))
      throw std::runtime_error("mesh parse: bad vertex line");
  m.triangles.resize(nt);
  for (int i = 0; i < nt; ++i)
    if (!(in >> m.triangles[i][0] >> m.triangles[i][1] >> m.triangles[i][2]))
      throw std::runtime_error("mesh parse: bad triangle line");
  m.boundary_edges.resize(nbe);
  for (int i = 0; i < nbe; ++i)
    if (!(in >> m.boundary_edges[i].a >> m.boundary_edges[i].b >> m.boundary_edges[i].marker))
      throw std::runtime_error("mesh parse: bad boundary line");
  return m;
}

}  // namespace roughlap::mesh
