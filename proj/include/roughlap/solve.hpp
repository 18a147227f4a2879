#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "roughlap/fem.hpp"

namespace roughlap::solve {

// Iterative solver ran out of iterations; carries the residual history.
struct NoConvergence : std::runtime_error {
  std::vector<double> history;
  NoConvergence(const std::string& what, std::vector<double> hist)
      : std::runtime_error(what), history(std::move(hist)) {}
};

// Mathematical precondition violated (e.g. Neumann compatibility).
struct CompatibilityError : std::runtime_error {
  double defect;
  CompatibilityError(const std::string& what, double defect_)
      : std::runtime_error(what), defect(defect_) {}
};

using DiagnosticsSink = std::function<void(int iter, double residual)>;

struct ConstraintReport {
  double compatibility_defect = 0.0;
  double mean_shift = 0.0;  // constant removed to fix the zero-mean gauge
};

struct LinearSolveResult {
  std::vector<double> solution;
  int iterations = 0;
  double relative_residual = 0.0;
  std::optional<ConstraintReport> constraint_report;
};

// Diagonally preconditioned conjugate gradients for SPD (or consistent PSD)
// systems. `project` (optional) is applied to the residual each iteration to
// hold iterates in the solution subspace of singular pencils.
struct CGInfo {
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> history;
};

CGInfo cg(const fem::SymSparseD& A, const std::vector<double>& b, std::vector<double>& x,
          double tol, int maxit = 0, const std::function<void(std::vector<double>&)>& project = {},
          const DiagnosticsSink& sink = {});

// Conjugate orthogonal CG for complex symmetric systems (A = A^T).
CGInfo cocg(const fem::SymSparseZ& A, const std::vector<std::complex<double>>& b,
            std::vector<std::complex<double>>& x, double tol, int maxit = 0,
            const DiagnosticsSink& sink = {});

// ---- boundary-value solvers -------------------------------------------------

// Homogeneous Dirichlet by dof elimination: solves the reduced SPD system on
// the complement of boundary_dofs to relative residual <= tol.
LinearSolveResult solve_dirichlet(const fem::SymSparseD& K, const std::vector<double>& b,
                                  const std::vector<int>& boundary_dofs, double tol,
                                  const DiagnosticsSink& sink = {});

// Neumann: checks the compatibility defect |(F,1)| <= 1e-10 * ||b|| and solves
// in the mean-zero gauge; throws CompatibilityError otherwise.
LinearSolveResult solve_neumann(const fem::SymSparseD& K, const fem::SymSparseD& M,
                                const std::vector<double>& b, double tol,
                                const DiagnosticsSink& sink = {});

// Robin: (K+B) u = b, positive definite for h >= 0, h not identically 0.
LinearSolveResult solve_robin(const fem::SymSparseD& K, const fem::SymSparseD& B,
                              const std::vector<double>& b, double tol,
                              const DiagnosticsSink& sink = {});

// ---- spectral diagnostics ---------------------------------------------------

enum class SpectrumKind { neumann, steklov, trace, robin_fredholm };

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending
  std::vector<double> residuals;    // ||A x - lambda B x|| / ||x|| per pair
  double mesh_h = 0.0;
  SpectrumKind which = SpectrumKind::neumann;
  std::vector<std::vector<double>> vectors;  // eigenvectors, parallel to eigenvalues
};

struct EigenOptions {
  double tol = 1e-8;
  int maxit = 400;
  std::uint64_t seed = 20240901;
  int extra_block = 4;  // block size = count + extra_block
};

// Smallest `count` eigenvalues of (K+B) x = lambda M x; requires h >= 0 and
// h not identically zero (1'B1 > 0).
SpectrumReport robin_fredholm_spectrum(const fem::SymSparseD& K, const fem::SymSparseD& B,
                                       const fem::SymSparseD& M, int count, double tol);

// Smallest nonzero eigenvalues of K x = mu M x (mean-zero subspace).
SpectrumReport neumann_spectrum(const fem::SymSparseD& K, const fem::SymSparseD& M, int count,
                                double tol);

// Best constant of inf_m ||u - m|| <= c ||grad u||:  c = 1/sqrt(mu_2).
double poincare_constant(const fem::SymSparseD& K, const fem::SymSparseD& M, double tol);

// Smallest `count` eigenvalues mu of (K+M) x = mu B1 x, B1 the h==1 boundary
// mass (singular: interior dofs carry no boundary mass). Solved through the
// equivalent pencil B1 x = nu (K+M+B1) x with nu = 1/(1+mu).
SpectrumReport steklov_spectrum(const fem::SymSparseD& K, const fem::SymSparseD& M,
                                const fem::SymSparseD& B1, int count, double tol);

// Classical Steklov pencil K x = sigma B1 x (sigma_1 = 0 for the constants).
SpectrumReport steklov_classical_spectrum(const fem::SymSparseD& K, const fem::SymSparseD& B1,
                                          int count, double tol);

// Trace-operator norm estimate ||i2|| = 1/sqrt(mu_1) from steklov_spectrum.
double trace_constant(const mesh::Mesh& m, double tol = 1e-8);

struct UnionEmbeddingReport {
  double c_a = 0.0, c_b = 0.0, c_union = 0.0;
  double bound = 0.0;  // sqrt(2) * sqrt(c_a^2 + c_b^2)
  double floor = 0.0;  // lower bound on mu_1 of the union
  std::vector<double> mu_union;
  bool pass = false;
};

// Quantitative echo of the union lemma: the union's trace constant is bounded
// through the pieces' constants. Throws std::runtime_error("geometry
// mismatch") when the meshes cannot triangulate a union of the two pieces.
UnionEmbeddingReport union_embedding_check(const mesh::Mesh& mesh_a, const mesh::Mesh& mesh_b,
                                           const mesh::Mesh& mesh_union, int count);

// ---- small dense helper (used by the Rayleigh-Ritz step and test oracles) ----

// Cyclic Jacobi eigendecomposition of a dense symmetric matrix (row-major).
// Eigenvalues ascending; eigenvectors returned as columns.
void dense_symmetric_eig(std::vector<double> a, int n, std::vector<double>& eigenvalues,
                         std::vector<double>& eigenvectors);

}  // namespace roughlap::solve
