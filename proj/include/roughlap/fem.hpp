#pragma once

#include <complex>
#include <optional>
#include <tuple>
#include <vector>

#include "roughlap/mesh.hpp"

namespace roughlap::fem {

// Symmetric sparse matrix, upper triangle stored in coordinate form.
// For complex scalars the symmetry is unconjugated (A = A^T, not A^H), which
// is what the shifted operators K - (k^2 + i*eps) M need.
template <typename Scalar>
struct SymSparse {
  int dim = 0;
  std::vector<std::tuple<int, int, Scalar>> entries;  // row <= col after finalize
  bool finalized = false;

  void add(int i, int j, Scalar v) {
    if (i > j) std::swap(i, j);
    entries.emplace_back(i, j, v);
    finalized = false;
  }

  void finalize();
  void matvec(const Scalar* x, Scalar* y) const;
  std::vector<Scalar> apply(const std::vector<Scalar>& x) const {
    std::vector<Scalar> y(dim, Scalar(0));
    matvec(x.data(), y.data());
    return y;
  }
  std::vector<Scalar> diagonal() const;
  std::string write_coordinate() const;  // "i j value" lines, sorted
};

using SymSparseD = SymSparse<double>;
using SymSparseZ = SymSparse<std::complex<double>>;

// Piecewise-constant Robin coefficient: one value per boundary marker, or an
// explicit per-edge table. All values must be >= 0.
struct RobinCoefficient {
  std::vector<double> per_marker;               // index = marker
  std::optional<std::vector<double>> per_edge;  // overrides, parallel to boundary_edges

  static RobinCoefficient constant(double h) { return RobinCoefficient{{h}, std::nullopt}; }
  double value(int marker, std::size_t edge_index) const;
};

template <typename Scalar>
struct Field {
  const mesh::Mesh* mesh = nullptr;
  std::vector<Scalar> coeff;
};

using FieldD = Field<double>;
using FieldZ = Field<std::complex<double>>;

// Stiffness (grad u, grad v); axisymmetric meshes weigh each triangle by
// 2*pi*r at the centroid. Throws on degenerate triangles ("zero area").
SymSparseD assemble_stiffness(const mesh::Mesh& m);

// L2 mass; axisymmetric variant uses the 3-point edge-midpoint rule with
// weight 2*pi*r (exact for the linear weight).
SymSparseD assemble_mass(const mesh::Mesh& m);

// Boundary mass  integral_dD h u v ds  over all listed boundary edges.
// Throws std::invalid_argument("Robin coefficient must be nonnegative").
SymSparseD assemble_boundary_mass(const mesh::Mesh& m, const RobinCoefficient& h);

// Load vector (F, phi) by the 3-point edge-midpoint rule.
std::vector<double> assemble_load(const mesh::Mesh& m, const std::function<double(Vec2)>& F);
std::vector<double> assemble_load(const mesh::Mesh& m, const std::vector<double>& vertex_samples);

struct Norms {
  double l2 = 0.0;
  double h1 = 0.0;
  double energy = 0.0;
  double trace_l2 = 0.0;
  double n_robin = 0.0;  // N(u) = sqrt(u'Ku + u'Bu)
};

// B1 must be the h == 1 boundary mass; B (optional) the h-weighted one.
Norms norms(const std::vector<double>& u, const SymSparseD& K, const SymSparseD& M,
            const SymSparseD& B1, const SymSparseD* B = nullptr);

// alpha*K + beta*M (+ gamma*B), merged on the shared pattern.
SymSparseZ combine(const SymSparseD& K, std::complex<double> alpha, const SymSparseD& M,
                   std::complex<double> beta, const SymSparseD* B = nullptr,
                   std::complex<double> gamma = {});
SymSparseD combine(const SymSparseD& A, double alpha, const SymSparseD& B, double beta);

double quadratic_form(const SymSparseD& A, const std::vector<double>& u);

// Discretization errors against a known solution (degree-5 quadrature).
double l2_error(const mesh::Mesh& m, const std::vector<double>& u,
                const std::function<double(Vec2)>& exact);
double h1_seminorm_error(const mesh::Mesh& m, const std::vector<double>& u,
                         const std::function<Vec2(Vec2)>& grad_exact);

// Nodal interpolant of a function.
std::vector<double> interpolate_nodal(const mesh::Mesh& m, const std::function<double(Vec2)>& f);

}  // namespace roughlap::fem
