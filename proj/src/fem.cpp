#include "roughlap/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace roughlap::fem {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct TriGeom {
  Vec2 a, b, c;
  double area;
  Vec2 grad[3];  // P1 hat gradients
};

TriGeom tri_geom(const mesh::Mesh& m, const std::array<int, 3>& t) {
  TriGeom g;
  g.a = m.vertices[t[0]];
  g.b = m.vertices[t[1]];
  g.c = m.vertices[t[2]];
  const double twice = cross(g.b - g.a, g.c - g.a);
  g.area = 0.5 * twice;
  if (!(g.area > 0.0)) throw std::runtime_error("zero area");
  // grad lambda_i = rot90(opposite edge) / (2 area)
  g.grad[0] = {(g.b.y - g.c.y) / twice, (g.c.x - g.b.x) / twice};
  g.grad[1] = {(g.c.y - g.a.y) / twice, (g.a.x - g.c.x) / twice};
  g.grad[2] = {(g.a.y - g.b.y) / twice, (g.b.x - g.a.x) / twice};
  return g;
}
}  // namespace

template <typename Scalar>
void SymSparse<Scalar>::finalize() {
  std::sort(entries.begin(), entries.end(), [](const auto& p, const auto& q) {
    if (std::get<0>(p) != std::get<0>(q)) return std::get<0>(p) < std::get<0>(q);
    return std::get<1>(p) < std::get<1>(q);
  });
  std::vector<std::tuple<int, int, Scalar>> merged;
  merged.reserve(entries.size());
  for (const auto& e : entries) {
    if (!merged.empty() && std::get<0>(merged.back()) == std::get<0>(e) &&
        std::get<1>(merged.back()) == std::get<1>(e))
      std::get<2>(merged.back()) += std::get<2>(e);
    else
      merged.push_back(e);
  }
  entries = std::move(merged);
  finalized = true;
}

template <typename Scalar>
void SymSparse<Scalar>::matvec(const Scalar* x, Scalar* y) const {
  for (int i = 0; i < dim; ++i) y[i] = Scalar(0);
  for (const auto& [i, j, v] : entries) {
    y[i] += v * x[j];
    if (i != j) y[j] += v * x[i];
  }
}

template <typename Scalar>
std::vector<Scalar> SymSparse<Scalar>::diagonal() const {
  std::vector<Scalar> d(dim, Scalar(0));
  for (const auto& [i, j, v] : entries)
    if (i == j) d[i] += v;
  return d;
}

template <typename Scalar>
std::string SymSparse<Scalar>::write_coordinate() const {
  std::string out;
  char buf[128];
  for (const auto& [i, j, v] : entries) {
    if constexpr (std::is_same_v<Scalar, double>) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i, j, v);
    } else {
      std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", i, j, v.real(), v.imag());
    }
    out += buf;
  }
  return out;
}

template struct SymSparse<double>;
template struct SymSparse<std::complex<double>>;

double RobinCoefficient::value(int marker, std::size_t edge_index) const {
  if (per_edge) return (*per_edge)[edge_index];
  if (marker < 0 || marker >= static_cast<int>(per_marker.size()))
    return per_marker.empty() ? 0.0 : per_marker.back();
  return per_marker[marker];
}

SymSparseD assemble_stiffness(const mesh::Mesh& m) {
  SymSparseD K;
  K.dim = m.n_vertices();
  for (const auto& t : m.triangles) {
    const TriGeom g = tri_geom(m, t);
    double w = g.area;
    if (m.axisymmetric) w *= kTwoPi * (g.a.x + g.b.x + g.c.x) / 3.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) K.add(t[i], t[j], w * dot(g.grad[i], g.grad[j]));
  }
  K.finalize();
  return K;
}

SymSparseD assemble_mass(const mesh::Mesh& m) {
  SymSparseD M;
  M.dim = m.n_vertices();
  // barycentric coordinates of the edge midpoints
  static const double q[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
  for (const auto& t : m.triangles) {
    const TriGeom g = tri_geom(m, t);
    if (!m.axisymmetric) {
      const double w = g.area / 12.0;
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) M.add(t[i], t[j], w * (i == j ? 2.0 : 1.0));
    } else {
      const Vec2 pts[3] = {g.a, g.b, g.c};
      for (int k = 0; k < 3; ++k) {
        const double r =
            q[k][0] * pts[0].x + q[k][1] * pts[1].x + q[k][2] * pts[2].x;
        const double w = (g.area / 3.0) * kTwoPi * r;
        for (int i = 0; i < 3; ++i)
          for (int j = i; j < 3; ++j) M.add(t[i], t[j], w * q[k][i] * q[k][j]);
      }
    }
  }
  M.finalize();
  return M;
}

SymSparseD assemble_boundary_mass(const mesh::Mesh& m, const RobinCoefficient& h) {
  SymSparseD B;
  B.dim = m.n_vertices();
  for (std::size_t e = 0; e < m.boundary_edges.size(); ++e) {
    const auto& be = m.boundary_edges[e];
    const double he = h.value(be.marker, e);
    if (he < 0.0) throw std::invalid_argument("Robin coefficient must be nonnegative");
    if (he == 0.0) continue;
    const Vec2 pa = m.vertices[be.a], pb = m.vertices[be.b];
    const double len = dist(pa, pb);
    if (!m.axisymmetric) {
      const double w = he * len / 6.0;
      B.add(be.a, be.a, 2.0 * w);
      B.add(be.b, be.b, 2.0 * w);
      B.add(be.a, be.b, w);
    } else {
      // 2-point Gauss along the edge, weight 2*pi*r (exact for cubics)
      const double xi[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
      for (double x : xi) {
        const double la = 1.0 - x, lb = x;
        const double r = la * pa.x + lb * pb.x;
        const double w = he * 0.5 * len * kTwoPi * r;
        B.add(be.a, be.a, w * la * la);
        B.add(be.b, be.b, w * lb * lb);
        B.add(be.a, be.b, w * la * lb);
      }
    }
  }
  B.finalize();
  return B;
}

std::vector<double> assemble_load(const mesh::Mesh& m, const std::function<double(Vec2)>& F) {
  std::vector<double> b(m.n_vertices(), 0.0);
  static const double q[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
  for (const auto& t : m.triangles) {
    const TriGeom g = tri_geom(m, t);
    const Vec2 pts[3] = {g.a, g.b, g.c};
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = q[k][0] * pts[0] + q[k][1] * pts[1] + q[k][2] * pts[2];
      const double fv = F(p);
      if (!std::isfinite(fv)) throw std::runtime_error("load: source not finite at quad point");
      double w = (g.area / 3.0) * fv;
      if (m.axisymmetric) w *= kTwoPi * p.x;
      for (int i = 0; i < 3; ++i) b[t[i]] += w * q[k][i];
    }
  }
  return b;
}

std::vector<double> assemble_load(const mesh::Mesh& m, const std::vector<double>& vertex_samples) {
  if (vertex_samples.size() != m.vertices.size())
    throw std::invalid_argument("load: sample count != vertex count");
  // nodal data is linear inside each triangle: edge-midpoint values are plain
  // endpoint averages, no point location needed
  std::vector<double> b(m.n_vertices(), 0.0);
  static const int em[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (const auto& t : m.triangles) {
    const TriGeom g = tri_geom(m, t);
    const Vec2 pts[3] = {g.a, g.b, g.c};
    for (int k = 0; k < 3; ++k) {
      const int i0 = em[k][0], i1 = em[k][1];
      const Vec2 p = 0.5 * (pts[i0] + pts[i1]);
      const double fv = 0.5 * (vertex_samples[t[i0]] + vertex_samples[t[i1]]);
      double w = (g.area / 3.0) * fv;
      if (m.axisymmetric) w *= kTwoPi * p.x;
      b[t[i0]] += w * 0.5;
      b[t[i1]] += w * 0.5;
    }
  }
  return b;
}

double quadratic_form(const SymSparseD& A, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != A.dim)
    throw std::invalid_argument("quadratic_form: dimension mismatch");
  std::vector<double> y = A.apply(u);
  double s = 0.0;
  for (int i = 0; i < A.dim; ++i) s += u[i] * y[i];
  return s;
}

Norms norms(const std::vector<double>& u, const SymSparseD& K, const SymSparseD& M,
            const SymSparseD& B1, const SymSparseD* B) {
  const int n = static_cast<int>(u.size());
  if (K.dim != n || M.dim != n || B1.dim != n || (B && B->dim != n))
    throw std::invalid_argument("norms: dimension mismatch");
  Norms out;
  const double m2 = std::max(quadratic_form(M, u), 0.0);
  const double k2 = std::max(quadratic_form(K, u), 0.0);
  out.l2 = std::sqrt(m2);
  out.energy = std::sqrt(k2);
  out.h1 = std::sqrt(m2 + k2);
  out.trace_l2 = std::sqrt(std::max(quadratic_form(B1, u), 0.0));
  out.n_robin = std::sqrt(k2 + (B ? std::max(quadratic_form(*B, u), 0.0) : 0.0));
  return out;
}

SymSparseZ combine(const SymSparseD& K, std::complex<double> alpha, const SymSparseD& M,
                   std::complex<double> beta, const SymSparseD* B, std::complex<double> gamma) {
  SymSparseZ A;
  A.dim = K.dim;
  for (const auto& [i, j, v] : K.entries) A.add(i, j, alpha * v);
  for (const auto& [i, j, v] : M.entries) A.add(i, j, beta * v);
  if (B)
    for (const auto& [i, j, v] : B->entries) A.add(i, j, gamma * v);
  A.finalize();
  return A;
}

SymSparseD combine(const SymSparseD& A, double alpha, const SymSparseD& B, double beta) {
  SymSparseD C;
  C.dim = A.dim;
  for (const auto& [i, j, v] : A.entries) C.add(i, j, alpha * v);
  for (const auto& [i, j, v] : B.entries) C.add(i, j, beta * v);
  C.finalize();
  return C;
}

namespace {
struct QP5 {
  double l0, l1, l2, w;
};
const QP5 kTri7[7] = {
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225},
    {0.0597158717897698, 0.4701420641051151, 0.4701420641051151, 0.1323941527885062},
    {0.4701420641051151, 0.0597158717897698, 0.4701420641051151, 0.1323941527885062},
    {0.4701420641051151, 0.4701420641051151, 0.0597158717897698, 0.1323941527885062},
    {0.7974269853530873, 0.1012865073234563, 0.1012865073234563, 0.1259391805448271},
    {0.1012865073234563, 0.7974269853530873, 0.1012865073234563, 0.1259391805448271},
    {0.1012865073234563, 0.1012865073234563, 0.7974269853530873, 0.1259391805448271},
};
}  // namespace

double l2_error(const mesh::Mesh& m, const std::vector<double>& u,
                const std::function<double(Vec2)>& exact) {
  double acc = 0.0;
  for (const auto& t : m.triangles) {
    const Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    const double area = 0.5 * cross(b - a, c - a);
    for (const QP5& q : kTri7) {
      const Vec2 p = q.l0 * a + q.l1 * b + q.l2 * c;
      const double uh = q.l0 * u[t[0]] + q.l1 * u[t[1]] + q.l2 * u[t[2]];
      const double e = uh - exact(p);
      acc += area * q.w * e * e;
    }
  }
  return std::sqrt(std::max(acc, 0.0));
}

double h1_seminorm_error(const mesh::Mesh& m, const std::vector<double>& u,
                         const std::function<Vec2(Vec2)>& grad_exact) {
  double acc = 0.0;
  for (const auto& t : m.triangles) {
    const TriGeom g = tri_geom(m, t);
    const Vec2 gh = u[t[0]] * g.grad[0] + u[t[1]] * g.grad[1] + u[t[2]] * g.grad[2];
    const Vec2 pts[3] = {g.a, g.b, g.c};
    for (const QP5& q : kTri7) {
      const Vec2 p = q.l0 * pts[0] + q.l1 * pts[1] + q.l2 * pts[2];
      const Vec2 e = gh - grad_exact(p);
      acc += g.area * q.w * dot(e, e);
    }
  }
  return std::sqrt(std::max(acc, 0.0));
}

std::vector<double> interpolate_nodal(const mesh::Mesh& m, const std::function<double(Vec2)>& f) {
  std::vector<double> out(m.vertices.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(m.vertices[i]);
  return out;
}

}  // namespace roughlap::fem
