#include "roughlap/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "roughlap/solve.hpp"

namespace roughlap::ext {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kTwoPi = 2.0 * kPi;

double nrm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
Vec3 sub3(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
}  // namespace

void ContinuationSchedule::check() const {
  if (epsilons.empty()) throw std::invalid_argument("schedule: empty epsilon list");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    const double e = epsilons[i];
    if (e > 1.0) throw std::invalid_argument("schedule: epsilon must be <= 1");
    const bool last = (i + 1 == epsilons.size());
    if (e < 0.0 || (e == 0.0 && !last))
      throw std::invalid_argument("schedule: epsilons must be positive (trailing 0 allowed)");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw std::invalid_argument("schedule: epsilons must be strictly decreasing");
  }
  if (k < 0.0) throw std::invalid_argument("schedule: wavenumber must be >= 0");
  if (bc == BC::robin && robin_h < 0.0)
    throw std::invalid_argument("schedule: Robin coefficient must be nonnegative");
}

Complex green_gamma() { return Complex(-1.0, 1.0) / std::sqrt(2.0); }

Complex green_oracle(const Vec3& x, const Vec3& y, const GreenKernel& kernel) {
  const double d = nrm3(sub3(x, y));
  if (!(d > 0.0)) throw std::invalid_argument("green_oracle: x = y is singular");
  if (kernel.epsilon < 0.0) throw std::invalid_argument("green_oracle: epsilon must be >= 0");
  const Complex phase = std::exp(green_gamma() * std::sqrt(kernel.epsilon) * d);
  return phase / (4.0 * kPi * d);
}

double exterior_ball_green(const Vec3& x, const Vec3& y) {
  const double d = nrm3(sub3(x, y));
  const double ry = nrm3(y);
  if (!(d > 0.0) || !(ry > 1.0)) throw std::invalid_argument("exterior_ball_green: bad points");
  const Vec3 image{y[0] / (ry * ry), y[1] / (ry * ry), y[2] / (ry * ry)};
  const double dim = nrm3(sub3(x, image));
  return 1.0 / (4.0 * kPi * d) - (1.0 / ry) / (4.0 * kPi * dim);
}

Source bump_source(double z0, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
  // normalize to unit 3-D mass: 4*pi Int_0^R f(rho) rho^2 drho = 1
  auto profile = [radius](double d) {
    const double q = d / radius;
    return (q < 1.0) ? std::exp(-1.0 / (1.0 - q * q)) : 0.0;
  };
  const double mass =
      4.0 * kPi *
      adaptive_simpson([&](double r) { return profile(r) * r * r; }, 0.0, radius, 1e-14);
  const double scale = 1.0 / mass;
  Source s;
  s.center = {0.0, z0};
  s.radius = radius;
  s.f = [profile, scale, z0](Vec2 p) {
    const double d = std::hypot(p.x, p.y - z0);
    return scale * profile(d);
  };
  return s;
}

Source shell_source(double rho0, double radius) {
  if (!(radius > 0.0) || !(rho0 > radius))
    throw std::invalid_argument("shell source needs 0 < radius < rho0");
  auto profile = [radius](double d) {
    const double q = d / radius;
    return (q * q < 1.0) ? std::exp(-1.0 / (1.0 - q * q)) : 0.0;
  };
  const double mass = 4.0 * kPi *
                      adaptive_simpson([&](double r) { return profile(r - rho0) * r * r; },
                                       rho0 - radius, rho0 + radius, 1e-14);
  const double scale = 1.0 / mass;
  Source s;
  s.center = {0.0, 0.0};
  s.radius = rho0 + radius;
  s.f = [profile, scale, rho0](Vec2 p) { return scale * profile(norm(p) - rho0); };
  return s;
}

// ---- meshes -----------------------------------------------------------------

namespace {

std::vector<double> graded_radii(double a, double b, double h0, double growth,
                                 double max_step) {
  std::vector<double> rs = {a};
  double step = h0;
  while (rs.back() + step < b) {
    rs.push_back(rs.back() + step);
    step = std::min(step * growth, max_step);
  }
  // snap the final node; merge if the leftover sliver is too thin
  if (b - rs.back() < 0.25 * step && rs.size() > 1) rs.back() = b;
  else rs.push_back(b);
  return rs;
}

}  // namespace

mesh::Mesh polar_annulus_mesh(double a, double b, double target_h, double growth,
                              double max_step) {
  if (!(a > 0.0) || !(b > a)) throw std::invalid_argument("polar annulus: need 0 < a < b");
  const std::vector<double> rho = graded_radii(a, b, target_h, growth, max_step);
  const int npsi = std::max(4,static_cast<int>(std::ceil(kPi * a / target_h)));

  mesh::Mesh m;
  m.axisymmetric = true;
  const int nr = static_cast<int>(rho.size());
  std::vector<std::vector<int>> grid(nr, std::vector<int>(npsi + 1));
  for (int j = 0; j < nr; ++j)
    for (int i = 0; i <= npsi; ++i) {
      const double psi = kPi * i / npsi;
      const double r = (i == 0 || i == npsi) ? 0.0 : rho[j] * std::sin(psi);
      grid[j][i] = m.n_vertices();
      m.vertices.push_back({r, rho[j] * std::cos(psi)});
    }
  for (int j = 0; j + 1 < nr; ++j)
    for (int i = 0; i < npsi; ++i) {
      const int v00 = grid[j][i], v10 = grid[j][i + 1];
      const int v11 = grid[j + 1][i + 1], v01 = grid[j + 1][i];
      if ((i + j) % 2 == 0) {
        m.triangles.push_back({v00, v10, v11});
        m.triangles.push_back({v00, v11, v01});
      } else {
        m.triangles.push_back({v00, v10, v01});
        m.triangles.push_back({v10, v11, v01});
      }
    }
  // meridian arcs: marker 0 at rho = a, marker 9 at rho = b; axis edges stay out
  m.curves.push_back([a](double psi) { return Vec2{a * std::sin(psi), a * std::cos(psi)}; });
  m.curves.push_back([b](double psi) { return Vec2{b * std::sin(psi), b * std::cos(psi)}; });
  for (int i = 0; i < npsi; ++i) {
    const double p0 = kPi * i / npsi, p1 = kPi * (i + 1) / npsi;
    m.boundary_edges.push_back({grid[0][i], grid[0][i + 1], 0});
    m.boundary_curves.push_back({0, p0, p1});
    m.boundary_edges.push_back({grid[nr - 1][i], grid[nr - 1][i + 1], 9});
    m.boundary_curves.push_back({1, p0, p1});
  }
  return m;
}

namespace {

// Transfinite exterior mesh around an off-axis rectilinear obstacle: four box
// strips plus the notch quad tile box\polygon, then rays from the box centre
// run to the far boundary (axis chord + circle) with 1.2-graded layers.
mesh::Mesh rect_union_exterior_mesh(const geom::Domain& obstacle, double R_inf,
                                    double target_h) {
  const double shift_r = obstacle.offset.x;
  const double shift_z = obstacle.offset.y;
  const int k_max = static_cast<int>(obstacle.params.at("k_max"));
  const double notch_r0 = (k_max >= 1) ? 5.0 * std::ldexp(1.0, -3) : obstacle.params.at("x_cut");

  // obstacle outline in (r,z): r = x + shift_r, z = y + shift_z
  auto R = [&](double x) { return x + shift_r; };
  auto Z = [&](double y) { return y + shift_z; };
  if (R(0.0) <= 0.05) throw std::invalid_argument("obstacle must sit at r > 0");
  const double margin = 0.5;
  const double r0 = R(0.0) - margin, r1 = R(1.0) + margin;
  const double z0 = Z(-1.0) - margin, z1 = Z(1.0) + margin;
  const double far_corner = std::hypot(std::max(std::abs(r0), r1), std::max(std::abs(z0), z1));
  if (2.0 * far_corner > R_inf) throw std::invalid_argument("truncation radius too small");
  if (r0 <= 0.0) throw std::invalid_argument("obstacle too close to the axis");

  // global grids with all block interfaces on them
  auto build_axis = [&](std::vector<double> brk, double h) {
    std::sort(brk.begin(), brk.end());
    std::vector<double> xs = {brk.front()};
    for (std::size_t i = 1; i < brk.size(); ++i) {
      const int n = std::max(1, static_cast<int>(std::ceil((brk[i] - brk[i - 1]) / h - 1e-12)));
      for (int j = 1; j <= n; ++j) xs.push_back(brk[i - 1] + (brk[i] - brk[i - 1]) * j / n);
    }
    return xs;
  };
  const int m_notch = std::max(1, static_cast<int>(std::ceil(0.1 / target_h)));
  std::vector<double> zbrk = {z0, Z(-1.0), Z(0.0), Z(1.0), z1};
  for (int i = 1; i < m_notch; ++i) zbrk.push_back(Z(0.1 * i / m_notch));
  zbrk.push_back(Z(0.1));
  std::vector<double> rbrk = {r0, R(0.0), R(notch_r0), R(1.0), r1};
  const std::vector<double> rg = build_axis(rbrk, target_h);
  const std::vector<double> zg = build_axis(zbrk, target_h);

  auto idx_of = [](const std::vector<double>& v, double x) {
    auto it = std::lower_bound(v.begin(), v.end(), x - 1e-13);
    return static_cast<int>(it - v.begin());
  };

  struct B {
    mesh::Mesh m;
    std::map<std::pair<double, double>, int> pool;
    int vtx(double r, double z) {
      auto key = std::make_pair(r, z);
      auto it = pool.find(key);
      if (it != pool.end()) return it->second;
      const int id = m.n_vertices();
      m.vertices.push_back({r, z});
      pool.emplace(key, id);
      return id;
    }
    void quad(int v00, int v10, int v11, int v01, int parity) {
      if (parity % 2 == 0) {
        m.triangles.push_back({v00, v10, v11});
        m.triangles.push_back({v00, v11, v01});
      } else {
        m.triangles.push_back({v00, v10, v01});
        m.triangles.push_back({v10, v11, v01});
      }
    }
  } bld;
  bld.m.axisymmetric = true;

  // a tensor block over index ranges of the global grids
  auto block = [&](int i0, int i1, int j0, int j1) {
    for (int j = j0; j < j1; ++j)
      for (int i = i0; i < i1; ++i) {
        const int v00 = bld.vtx(rg[i], zg[j]);
        const int v10 = bld.vtx(rg[i + 1], zg[j]);
        const int v11 = bld.vtx(rg[i + 1], zg[j + 1]);
        const int v01 = bld.vtx(rg[i], zg[j + 1]);
        bld.quad(v00, v10, v11, v01, i + j);
      }
  };
  const int iA = 0, iL = idx_of(rg, R(0.0)), iN = idx_of(rg, R(notch_r0)),
            iRt = idx_of(rg, R(1.0)), iB = static_cast<int>(rg.size()) - 1;
  const int jA = 0, jBot = idx_of(zg, Z(-1.0)), jZero = idx_of(zg, Z(0.0)),
            jTen = idx_of(zg, Z(0.1)), jTop = idx_of(zg, Z(1.0)),
            jB = static_cast<int>(zg.size()) - 1;

  block(iA, iL, jA, jB);        // left strip (low r)
  block(iRt, iB, jA, jB);       // right strip (high r)
  block(iL, iRt, jA, jBot);     // below the obstacle
  block(iL, iRt, jTop, jB);     // above the obstacle
  // notch quad: r in [R(notch_r0), R(1)], z from Z(0) to the line z = Z((r-shift)/10)
  {
    auto line_z = [&](double r) { return Z(0.1 * (r - shift_r)); };
    for (int j = 0; j < m_notch; ++j)
      for (int i = iN; i < iRt; ++i) {
        auto zz = [&](int col, int row) {
          const double base = Z(0.0);
          const double top = line_z(rg[col]);
          return (row == 0) ? base : base + (top - base) * row / m_notch;
        };
        const int v00 = bld.vtx(rg[i], zz(i, j));
        const int v10 = bld.vtx(rg[i + 1], zz(i + 1, j));
        const int v11 = bld.vtx(rg[i + 1], zz(i + 1, j + 1));
        const int v01 = bld.vtx(rg[i], zz(i, j + 1));
        bld.quad(v00, v10, v11, v01, i + j);
      }
  }

  // obstacle boundary, marker 0
  auto bedge = [&](int a, int b, int marker) {
    bld.m.boundary_edges.push_back({a, b, marker});
    bld.m.boundary_curves.push_back({-1, 0.0, 0.0});
  };
  for (int j = jBot; j < jTop; ++j) bedge(bld.vtx(rg[iL], zg[j]), bld.vtx(rg[iL], zg[j + 1]), 0);
  for (int j = jBot; j < jZero; ++j)
    bedge(bld.vtx(rg[iRt], zg[j]), bld.vtx(rg[iRt], zg[j + 1]), 0);
  for (int j = jTen; j < jTop; ++j)
    bedge(bld.vtx(rg[iRt], zg[j]), bld.vtx(rg[iRt], zg[j + 1]), 0);
  for (int i = iL; i < iRt; ++i) {
    bedge(bld.vtx(rg[i], Z(-1.0)), bld.vtx(rg[i + 1], Z(-1.0)), 0);
    bedge(bld.vtx(rg[i], Z(1.0)), bld.vtx(rg[i + 1], Z(1.0)), 0);
  }
  {
    auto line_z = [&](double r) { return Z(0.1 * (r - shift_r)); };
    for (int i = iN; i < iRt; ++i) {  // notch floor and sloped roof
      bedge(bld.vtx(rg[i], Z(0.0)), bld.vtx(rg[i + 1], Z(0.0)), 0);
      bedge(bld.vtx(rg[i], line_z(rg[i])), bld.vtx(rg[i + 1], line_z(rg[i + 1])), 0);
    }
    for (int j = 0; j < m_notch; ++j) {  // notch left wall
      const double ztop = line_z(rg[iN]) - Z(0.0);
      const double za = Z(0.0) + ztop * j / m_notch;
      const double zb = Z(0.0) + ztop * (j + 1) / m_notch;
      bedge(bld.vtx(rg[iN], za), bld.vtx(rg[iN], zb), 0);
    }
  }

  // transfinite shell from the box perimeter to the far boundary
  const Vec2 cbox{0.5 * (r0 + r1), 0.5 * (z0 + z1)};
  std::vector<int> ring;  // CCW perimeter vertex ids
  for (int i = iA; i < iB; ++i) ring.push_back(bld.vtx(rg[i], zg[jA]));
  for (int j = jA; j < jB; ++j) ring.push_back(bld.vtx(rg[iB], zg[j]));
  for (int i = iB; i > iA; --i) ring.push_back(bld.vtx(rg[i], zg[jB]));
  for (int j = jB; j > jA; --j) ring.push_back(bld.vtx(rg[iA], zg[j]));

  const int nray = static_cast<int>(ring.size());
  // far point along each ray: axis chord r=0 or the circle rho = R_inf
  std::vector<Vec2> far(nray);
  std::vector<char> on_axis(nray, 0);
  for (int i = 0; i < nray; ++i) {
    const Vec2 p = bld.m.vertices[ring[i]];
    const Vec2 d = p - cbox;
    const double dn = norm(d);
    const double cd = dot(cbox, d) / dn;
    const double t_circle =
        (-cd + std::sqrt(cd * cd + (R_inf * R_inf - dot(cbox, cbox)))) / dn;
    double t_hit = t_circle;
    if (d.x < 0.0) {
      const double t_axis = (0.0 - cbox.x) / d.x * dn;  // parameter along unit dir
      if (t_axis > 0.0 && t_axis < t_circle) {
        t_hit = t_axis;
        on_axis[i] = 1;
      }
    }
    Vec2 q = cbox + (t_hit / dn) * d;
    if (on_axis[i]) q.x = 0.0;
    far[i] = q;
  }
  // shared layer count from the longest ray
  double longest = 0.0, h_peri = 0.0;
  for (int i = 0; i < nray; ++i) {
    longest = std::max(longest, dist(far[i], bld.m.vertices[ring[i]]));
    h_peri = std::max(h_peri, dist(bld.m.vertices[ring[i]],
                                   bld.m.vertices[ring[(i + 1) % nray]]));
  }
  const double growth = 1.2;
  const int nlayer = std::max(
      2, static_cast<int>(std::ceil(std::log(1.0 + (growth - 1.0) * longest / h_peri) /
                                    std::log(growth))));
  std::vector<double> frac(nlayer + 1, 0.0);
  {
    double acc = 0.0, step = 1.0;
    for (int j = 1; j <= nlayer; ++j) {
      acc += step;
      frac[j] = acc;
      step *= growth;
    }
    for (int j = 0; j <= nlayer; ++j) frac[j] /= acc;
  }
  std::vector<std::vector<int>> shell(nlayer + 1, std::vector<int>(nray));
  for (int i = 0; i < nray; ++i) {
    shell[0][i] = ring[i];
    const Vec2 p = bld.m.vertices[ring[i]];
    for (int j = 1; j <= nlayer; ++j) {
      Vec2 q = p + frac[j] * (far[i] - p);
      if (j == nlayer) q = far[i];
      if (q.x < 1e-13) q.x = std::max(q.x, 0.0);
      shell[j][i] = bld.vtx(q.x, q.y);
    }
  }
  for (int j = 0; j < nlayer; ++j)
    for (int i = 0; i < nray; ++i) {
      const int in = (i + 1) % nray;
      bld.quad(shell[j][i], shell[j + 1][i], shell[j + 1][in], shell[j][in], i + j);
    }
  for (int i = 0; i < nray; ++i) {
    const int in = (i + 1) % nray;
    if (on_axis[i] && on_axis[in]) continue;  // axis edges stay unlisted
    bld.m.boundary_edges.push_back({shell[nlayer][i], shell[nlayer][in], 9});
    bld.m.boundary_curves.push_back({-1, 0.0, 0.0});
  }
  return std::move(bld.m);
}

}  // namespace

mesh::Mesh build_exterior_mesh(const geom::Domain& obstacle, double R_inf, double target_h) {
  if (!(target_h > 0.0)) throw std::invalid_argument("target_h must be positive");
  switch (obstacle.family) {
    case geom::DomainFamily::disk: {
      if (obstacle.offset.x != 0.0 || obstacle.offset.y != 0.0)
        throw std::invalid_argument("sphere obstacle must be centred on the origin");
      if (!(R_inf > 2.0)) throw std::invalid_argument("truncation radius too small");
      return polar_annulus_mesh(1.0, R_inf, target_h);
    }
    case geom::DomainFamily::rect_union:
      return rect_union_exterior_mesh(obstacle, R_inf, target_h);
    default:
      throw std::invalid_argument("build_exterior_mesh: unsupported obstacle family");
  }
}

// ---- shifted solves ----------------------------------------------------------

std::vector<Complex> solve_single_shift(const mesh::Mesh& m, const ContinuationSchedule& bc_of,
                                        double eps, const Source& F, double tol,
                                        int* iterations) {
  using BC = ContinuationSchedule::BC;
  fem::SymSparseD K = fem::assemble_stiffness(m);
  fem::SymSparseD M = fem::assemble_mass(m);
  fem::SymSparseD B;
  if (bc_of.bc == BC::robin) {
    fem::RobinCoefficient h;
    h.per_marker = {bc_of.robin_h, 0.0};  // marker 0 only
    B = fem::assemble_boundary_mass(m, h);
  }

  // eliminate the artificial boundary (marker 9) and, for Dirichlet, marker 0
  const int n = m.n_vertices();
  std::vector<char> fixed(n, 0);
  for (const auto& be : m.boundary_edges) {
    if (be.marker == 9 || (bc_of.bc == BC::dirichlet && be.marker == 0)) {
      fixed[be.a] = 1;
      fixed[be.b] = 1;
    }
  }
  std::vector<int> to_red(n, -1), to_full;
  for (int i = 0; i < n; ++i)
    if (!fixed[i]) {
      to_red[i] = static_cast<int>(to_full.size());
      to_full.push_back(i);
    }
  const int nr = static_cast<int>(to_full.size());

  auto reduce = [&](const fem::SymSparseD& A) {
    fem::SymSparseD R;
    R.dim = nr;
    for (const auto& [i, j, v] : A.entries)
      if (to_red[i] >= 0 && to_red[j] >= 0) R.add(to_red[i], to_red[j], v);
    R.finalize();
    return R;
  };
  fem::SymSparseD Kr = reduce(K), Mr = reduce(M);
  fem::SymSparseD Br;
  if (bc_of.bc == BC::robin) Br = reduce(B);

  const Complex shift = -(bc_of.k * bc_of.k + Complex(0.0, 1.0) * eps);
  fem::SymSparseZ A = (bc_of.bc == BC::robin)
                          ? fem::combine(Kr, 1.0, Mr, shift, &Br, 1.0)
                          : fem::combine(Kr, 1.0, Mr, shift);

  std::vector<double> b = fem::assemble_load(m, F.f);
  std::vector<Complex> br(nr);
  for (int i = 0; i < nr; ++i) br[i] = b[to_full[i]];

  std::vector<Complex> xr;
  solve::CGInfo info = solve::cocg(A, br, xr, tol);
  if (iterations) *iterations = info.iterations;

  std::vector<Complex> full(n, Complex(0));
  for (int i = 0; i < nr; ++i) full[to_full[i]] = xr[i];
  return full;
}

ContinuationResult solve_shifted(const mesh::Mesh& m, const ContinuationSchedule& schedule,
                                 const Source& F, double tol, const WeightedNormSpec& wspec) {
  schedule.check();
  double R_inf = 0.0;
  for (const Vec2& v : m.vertices) R_inf = std::max(R_inf, norm(v));
  if (norm(F.center) + F.radius > 0.5 * R_inf)
    throw std::invalid_argument("source too close to truncation");

  ContinuationResult out;
  out.epsilons = schedule.epsilons;
  out.truncation_radius = R_inf;
  for (double eps : schedule.epsilons) {
    int iters = 0;
    out.fields.push_back(solve_single_shift(m, schedule, eps, F, tol, &iters));
    out.iterations.push_back(iters);
    out.weighted_norms.push_back(weighted_norm(out.fields.back(), m, wspec));
  }
  for (std::size_t j = 0; j + 1 < out.fields.size(); ++j) {
    std::vector<Complex> diff(out.fields[j].size());
    for (std::size_t i = 0; i < diff.size(); ++i)
      diff[i] = out.fields[j + 1][i] - out.fields[j][i];
    out.pairwise_diffs.push_back(weighted_norm(diff, m, wspec));
  }
  return out;
}

// ---- L_{2,a} quadrature -------------------------------------------------------

namespace {

// degree-5 7-point triangle rule (barycentric coordinates, weights sum to 1)
struct QP {
  double l0, l1, l2, w;
};
const QP kTri7[7] = {
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225},
    {0.0597158717897698, 0.4701420641051151, 0.4701420641051151, 0.1323941527885062},
    {0.4701420641051151, 0.0597158717897698, 0.4701420641051151, 0.1323941527885062},
    {0.4701420641051151, 0.4701420641051151, 0.0597158717897698, 0.1323941527885062},
    {0.7974269853530873, 0.1012865073234563, 0.1012865073234563, 0.1259391805448271},
    {0.1012865073234563, 0.7974269853530873, 0.1012865073234563, 0.1259391805448271},
    {0.1012865073234563, 0.1012865073234563, 0.7974269853530873, 0.1259391805448271},
};

template <typename S>
double weighted_norm_impl(const std::vector<S>& u, const mesh::Mesh& m,
                          const WeightedNormSpec& spec) {
  if (!(spec.a > 1.0) || !(spec.a < 2.0))
    throw std::invalid_argument("weight exponent must be in (1,2)");
  if (u.size() != m.vertices.size())
    throw std::invalid_argument("weighted_norm: dimension mismatch");
  double total = 0.0;
  for (const auto& t : m.triangles) {
    const Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    const double area = 0.5 * cross(b - a, c - a);
    for (const QP& q : kTri7) {
      const Vec2 p = q.l0 * a + q.l1 * b + q.l2 * c;
      const S uv = q.l0 * u[t[0]] + q.l1 * u[t[1]] + q.l2 * u[t[2]];
      const double absu2 = std::norm(Complex(uv));
      const double rho = norm(p);
      double w = area * q.w * absu2 / std::pow(1.0 + rho, spec.a);
      if (m.axisymmetric) w *= kTwoPi * p.x;
      total += w;
    }
  }
  return std::sqrt(std::max(total, 0.0));
}

}  // namespace

double weighted_norm(const std::vector<Complex>& u, const mesh::Mesh& m,
                     const WeightedNormSpec& spec) {
  return weighted_norm_impl(u, m, spec);
}
double weighted_norm(const std::vector<double>& u, const mesh::Mesh& m,
                     const WeightedNormSpec& spec) {
  return weighted_norm_impl(u, m, spec);
}

// ---- field probes ---------------------------------------------------------------

Complex eval_complex(const mesh::Mesh& m, const std::vector<Complex>& u, Vec2 p) {
  const int t = mesh::locate_triangle(m, p);
  if (t < 0) throw std::runtime_error("eval: point outside mesh");
  const auto& tr = m.triangles[t];
  const Vec2 a = m.vertices[tr[0]], b = m.vertices[tr[1]], c = m.vertices[tr[2]];
  const double d = cross(b - a, c - a);
  const double w0 = cross(b - p, c - p) / d;
  const double w1 = cross(c - p, a - p) / d;
  const double w2 = 1.0 - w0 - w1;
  return w0 * u[tr[0]] + w1 * u[tr[1]] + w2 * u[tr[2]];
}

std::array<Complex, 2> grad_complex(const mesh::Mesh& m, const std::vector<Complex>& u, Vec2 p) {
  const int t = mesh::locate_triangle(m, p);
  if (t < 0) throw std::runtime_error("grad: point outside mesh");
  const auto& tr = m.triangles[t];
  const Vec2 a = m.vertices[tr[0]], b = m.vertices[tr[1]], c = m.vertices[tr[2]];
  const double twice = cross(b - a, c - a);
  const Vec2 g0{(b.y - c.y) / twice, (c.x - b.x) / twice};
  const Vec2 g1{(c.y - a.y) / twice, (a.x - c.x) / twice};
  const Vec2 g2{(a.y - b.y) / twice, (b.x - a.x) / twice};
  return {u[tr[0]] * g0.x + u[tr[1]] * g1.x + u[tr[2]] * g2.x,
          u[tr[0]] * g0.y + u[tr[1]] * g1.y + u[tr[2]] * g2.y};
}

DecayFit decay_fit(const std::vector<Complex>& u, const mesh::Mesh& m,
                   const std::vector<double>& radii) {
  if (radii.size() < 3) throw std::invalid_argument("decay_fit needs at least 3 radii");
  const int nsamp = 256;
  std::vector<double> lx, ly;
  for (double rho : radii) {
    double peak = 0.0;
    int found = 0;
    for (int i = 0; i <= nsamp; ++i) {
      const double psi = kPi * i / nsamp;
      const Vec2 p{rho * std::sin(psi), rho * std::cos(psi)};
      const int t = mesh::locate_triangle(m, p);
      if (t < 0) continue;
      ++found;
      const auto& tr = m.triangles[t];
      const Vec2 a = m.vertices[tr[0]], b = m.vertices[tr[1]], c = m.vertices[tr[2]];
      const double d = cross(b - a, c - a);
      const double w0 = cross(b - p, c - p) / d;
      const double w1 = cross(c - p, a - p) / d;
      const double w2 = 1.0 - w0 - w1;
      peak = std::max(peak, std::abs(w0 * u[tr[0]] + w1 * u[tr[1]] + w2 * u[tr[2]]));
    }
    if (found < nsamp / 2 || peak <= 0.0)
      throw std::runtime_error("decay_fit: radius outside the meshed region");
    lx.push_back(std::log(rho));
    ly.push_back(std::log(peak));
  }
  const std::size_t n = lx.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  DecayFit fit;
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.constant = std::exp((sy - fit.exponent * sx) / n);
  return fit;
}

std::vector<double> radiation_residual(const std::vector<Complex>& u, const mesh::Mesh& m,
                                       double k, const std::vector<double>& radii) {
  if (!(k > 0.0)) throw std::invalid_argument("radiation residual requires k>0");
  const int nsamp = 256;
  std::vector<double> out;
  for (double rho : radii) {
    double acc = 0.0;
    for (int i = 0; i < nsamp; ++i) {
      const double psi = kPi * (i + 0.5) / nsamp;
      const Vec2 p{rho * std::sin(psi), rho * std::cos(psi)};
      const int t = mesh::locate_triangle(m, p);
      if (t < 0) continue;
      const Complex uv = eval_complex(m, u, p);
      const auto g = grad_complex(m, u, p);
      const Complex dudr = g[0] * std::sin(psi) + g[1] * std::cos(psi);
      const Complex mis = dudr - Complex(0.0, k) * uv;
      // sphere measure: ds = 2 pi r * rho dpsi with r = rho sin(psi)
      acc += std::norm(mis) * kTwoPi * p.x * rho * (kPi / nsamp);
    }
    out.push_back(acc);
  }
  return out;
}

}  // namespace roughlap::ext
