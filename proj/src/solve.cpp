#include "roughlap/solve.hpp"

#include <algorithm>
#include <cmath>

#include "roughlap/core.hpp"

namespace roughlap::solve {

namespace {

double nrm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm2z(const std::vector<std::complex<double>>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace

CGInfo cg(const fem::SymSparseD& A, const std::vector<double>& b, std::vector<double>& x,
          double tol, int maxit, const std::function<void(std::vector<double>&)>& project,
          const DiagnosticsSink& sink) {
  const int n = A.dim;
  if (static_cast<int>(b.size()) != n) throw std::invalid_argument("cg: dimension mismatch");
  if (maxit <= 0) maxit = 20000 + 10 * n;
  x.resize(n, 0.0);

  std::vector<double> d = A.diagonal();
  for (double& v : d) v = (std::abs(v) > 1e-300) ? 1.0 / v : 1.0;

  std::vector<double> r = b;
  if (nrm2(x) > 0.0) {
    std::vector<double> ax = A.apply(x);
    for (int i = 0; i < n; ++i) r[i] -= ax[i];
  }
  if (project) project(r);
  const double bnorm = std::max(nrm2(b), 1e-300);

  CGInfo info;
  double rn = nrm2(r);
  info.history.push_back(rn / bnorm);
  if (rn / bnorm <= tol) {
    info.relative_residual = rn / bnorm;
    return info;
  }

  std::vector<double> z(n), p(n), q(n);
  for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
  p = z;
  double rz = dotv(r, z);

  for (int it = 1; it <= maxit; ++it) {
    A.matvec(p.data(), q.data());
    if (project) project(q);
    const double pq = dotv(p, q);
    if (!(pq > 0.0) && !(pq < 0.0))
      throw NoConvergence("no convergence: CG breakdown", info.history);
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    if (project) project(r);
    rn = nrm2(r);
    info.history.push_back(rn / bnorm);
    if (sink) sink(it, rn / bnorm);
    if (rn / bnorm <= tol) {
      info.iterations = it;
      info.relative_residual = rn / bnorm;
      return info;
    }
    for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
    const double rz_new = dotv(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw NoConvergence("no convergence: CG iteration cap reached", info.history);
}

CGInfo cocg(const fem::SymSparseZ& A, const std::vector<std::complex<double>>& b,
            std::vector<std::complex<double>>& x, double tol, int maxit,
            const DiagnosticsSink& sink) {
  using Z = std::complex<double>;
  const int n = A.dim;
  if (static_cast<int>(b.size()) != n) throw std::invalid_argument("cocg: dimension mismatch");
  if (maxit <= 0) maxit = 20000 + 10 * n;
  x.assign(n, Z(0));

  std::vector<Z> d = A.diagonal();
  for (Z& v : d) v = (std::abs(v) > 1e-300) ? Z(1) / v : Z(1);

  std::vector<Z> r = b, z(n), p(n), q(n);
  const double bnorm = std::max(nrm2z(b), 1e-300);

  CGInfo info;
  double rn = nrm2z(r);
  info.history.push_back(rn / bnorm);
  if (rn / bnorm <= tol) {
    info.relative_residual = rn / bnorm;
    return info;
  }
  for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
  p = z;
  // unconjugated inner product drives the complex-symmetric recurrence
  auto cdot = [](const std::vector<Z>& a, const std::vector<Z>& c) {
    Z s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
    return s;
  };
  Z rz = cdot(r, z);

  for (int it = 1; it <= maxit; ++it) {
    A.matvec(p.data(), q.data());
    const Z pq = cdot(p, q);
    if (std::abs(pq) < 1e-280) throw NoConvergence("no convergence: COCG breakdown", info.history);
    const Z alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rn = nrm2z(r);
    info.history.push_back(rn / bnorm);
    if (sink) sink(it, rn / bnorm);
    if (rn / bnorm <= tol) {
      info.iterations = it;
      info.relative_residual = rn / bnorm;
      return info;
    }
    for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
    const Z rz_new = cdot(r, z);
    if (std::abs(rz) < 1e-280) throw NoConvergence("no convergence: COCG breakdown", info.history);
    const Z beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw NoConvergence("no convergence: COCG iteration cap reached", info.history);
}

// ---- boundary-value solvers -------------------------------------------------

LinearSolveResult solve_dirichlet(const fem::SymSparseD& K, const std::vector<double>& b,
                                  const std::vector<int>& boundary_dofs, double tol,
                                  const DiagnosticsSink& sink) {
  const int n = K.dim;
  if (boundary_dofs.empty()) throw std::invalid_argument("dirichlet: boundary_dofs empty");
  std::vector<char> is_bnd(n, 0);
  for (int i : boundary_dofs) is_bnd.at(i) = 1;

  std::vector<int> to_red(n, -1);
  std::vector<int> to_full;
  for (int i = 0; i < n; ++i)
    if (!is_bnd[i]) {
      to_red[i] = static_cast<int>(to_full.size());
      to_full.push_back(i);
    }
  const int nr = static_cast<int>(to_full.size());
  if (nr == 0) throw std::invalid_argument("dirichlet: no interior dofs");

  fem::SymSparseD Kr;
  Kr.dim = nr;
  for (const auto& [i, j, v] : K.entries)
    if (to_red[i] >= 0 && to_red[j] >= 0) Kr.add(to_red[i], to_red[j], v);
  Kr.finalize();

  std::vector<double> br(nr);
  for (int i = 0; i < nr; ++i) br[i] = b[to_full[i]];

  std::vector<double> xr;
  CGInfo info = cg(Kr, br, xr, tol, 0, {}, sink);

  LinearSolveResult out;
  out.solution.assign(n, 0.0);
  for (int i = 0; i < nr; ++i) out.solution[to_full[i]] = xr[i];
  out.iterations = info.iterations;
  out.relative_residual = info.relative_residual;
  return out;
}

LinearSolveResult solve_neumann(const fem::SymSparseD& K, const fem::SymSparseD& M,
                                const std::vector<double>& b, double tol,
                                const DiagnosticsSink& sink) {
  const int n = K.dim;
  double sum_b = 0.0;
  for (double v : b) sum_b += v;
  const double defect = std::abs(sum_b);
  const double bnorm = nrm2(b);
  if (defect > 1e-10 * std::max(bnorm, 1e-300))
    throw CompatibilityError("Neumann compatibility (F,1)=0 fails", defect);

  // deflate the constant component; CG then stays in the complement of the
  // kernel, with roundoff drift re-projected every iteration
  auto deflate = [n](std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    for (double& x : v) x -= mean;
  };
  std::vector<double> b0 = b;
  deflate(b0);

  std::vector<double> x;
  CGInfo info = cg(K, b0, x, tol, 0, deflate, sink);

  // zero M-mean gauge
  std::vector<double> ones(n, 1.0), m1(n);
  M.matvec(ones.data(), m1.data());
  const double m_total = dotv(ones, m1);
  const double shift = dotv(m1, x) / m_total;
  for (double& v : x) v -= shift;

  LinearSolveResult out;
  out.solution = std::move(x);
  out.iterations = info.iterations;
  out.relative_residual = info.relative_residual;
  out.constraint_report = ConstraintReport{defect, shift};
  return out;
}

LinearSolveResult solve_robin(const fem::SymSparseD& K, const fem::SymSparseD& B,
                              const std::vector<double>& b, double tol,
                              const DiagnosticsSink& sink) {
  std::vector<double> ones(B.dim, 1.0);
  if (fem::quadratic_form(B, ones) <= 0.0)
    throw std::invalid_argument("Robin reduces to Neumann; use solve_neumann");
  fem::SymSparseD A = fem::combine(K, 1.0, B, 1.0);
  std::vector<double> x;
  CGInfo info = cg(A, b, x, tol, 0, {}, sink);
  LinearSolveResult out;
  out.solution = std::move(x);
  out.iterations = info.iterations;
  out.relative_residual = info.relative_residual;
  return out;
}

// ---- dense symmetric eigensolver (cyclic Jacobi) ------------------------------

void dense_symmetric_eig(std::vector<double> a, int n, std::vector<double>& eigenvalues,
                         std::vector<double>& eigenvectors) {
  eigenvectors.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) eigenvectors[i * n + i] = 1.0;
  auto A = [&](int i, int j) -> double& { return a[i * n + j]; };
  auto V = [&](int i, int j) -> double& { return eigenvectors[i * n + j]; };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    double diag = 0.0;
    for (int i = 0; i < n; ++i) diag += A(i, i) * A(i, i);
    if (off <= 1e-28 * std::max(diag, 1e-300)) break;

    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(A(p, q)) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
  }
  // sort ascending, permuting eigenvector columns along
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) { return A(i, i) < A(j, j); });
  eigenvalues.resize(n);
  std::vector<double> sorted_vecs(eigenvectors.size());
  for (int c = 0; c < n; ++c) {
    eigenvalues[c] = A(order[c], order[c]);
    for (int r = 0; r < n; ++r) sorted_vecs[r * n + c] = V(r, order[c]);
  }
  eigenvectors = std::move(sorted_vecs);
}

// ---- blocked subspace iteration for symmetric pencils ---------------------------

namespace {

using Apply = std::function<std::vector<double>(const std::vector<double>&)>;
using Project = std::function<void(std::vector<double>&)>;

struct PencilResult {
  std::vector<double> nu;  // descending
  std::vector<std::vector<double>> vectors;
  std::vector<double> residuals;
  int iterations = 0;
};

// Largest eigenpairs of P x = nu Q x with Q SPD. One iteration maps the block
// through Q^{-1} P, Q-orthonormalizes, and Rayleigh-Ritz-projects. `resid`
// reports the caller's pencil residual used for the convergence test.
PencilResult largest_pencil(int n, const Apply& applyP, const Apply& applyQ, const Apply& solveQ,
                            const Project& project, int count, const EigenOptions& opt,
                            const std::function<double(const std::vector<double>&, double)>& resid) {
  const int m = std::min(n, count + opt.extra_block);
  if (count > n) throw std::invalid_argument("eigensolver: count exceeds dimension");

  Rng rng(opt.seed);
  std::vector<std::vector<double>> X(m, std::vector<double>(n));
  for (auto& col : X) {
    for (double& v : col) v = rng.uniform(-1.0, 1.0);
    if (project) project(col);
  }

  PencilResult out;
  std::vector<std::vector<double>> QX(m);

  auto q_orthonormalize = [&](std::vector<std::vector<double>>& cols) {
    for (int i = 0; i < m; ++i) {
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j < i; ++j) {
          const double c = dotv(cols[i], QX[j]);
          for (int k = 0; k < n; ++k) cols[i][k] -= c * cols[j][k];
        }
      QX[i] = applyQ(cols[i]);
      double nq = std::sqrt(std::max(dotv(cols[i], QX[i]), 0.0));
      if (nq < 1e-150) {
        // degenerate direction; replace with a fresh random one
        for (double& v : cols[i]) v = rng.uniform(-1.0, 1.0);
        if (project) project(cols[i]);
        for (int j = 0; j < i; ++j) {
          const double c = dotv(cols[i], QX[j]);
          for (int k = 0; k < n; ++k) cols[i][k] -= c * cols[j][k];
        }
        QX[i] = applyQ(cols[i]);
        nq = std::sqrt(std::max(dotv(cols[i], QX[i]), 1e-300));
      }
      const double inv = 1.0 / nq;
      for (double& v : cols[i]) v *= inv;
      for (double& v : QX[i]) v *= inv;
    }
  };

  q_orthonormalize(X);

  for (int it = 1; it <= opt.maxit; ++it) {
    // Y = Q^{-1} P X
    std::vector<std::vector<double>> Y(m);
    for (int i = 0; i < m; ++i) {
      Y[i] = solveQ(applyP(X[i]));
      if (project) project(Y[i]);
    }
    q_orthonormalize(Y);

    // Rayleigh-Ritz on the pencil (P, Q) over span(Y)
    std::vector<std::vector<double>> PY(m);
    for (int i = 0; i < m; ++i) PY[i] = applyP(Y[i]);
    std::vector<double> H(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = dotv(Y[i], PY[j]);
        H[i * m + j] = v;
        H[j * m + i] = v;
      }
    std::vector<double> evals, evecs;
    dense_symmetric_eig(H, m, evals, evecs);

    // descending Ritz values
    std::vector<std::vector<double>> Xn(m, std::vector<double>(n, 0.0));
    std::vector<double> nu(m);
    for (int c = 0; c < m; ++c) {
      const int src = m - 1 - c;
      nu[c] = evals[src];
      for (int j = 0; j < m; ++j) {
        const double w = evecs[j * m + src];
        if (w == 0.0) continue;
        for (int k = 0; k < n; ++k) Xn[c][k] += w * Y[j][k];
      }
    }
    X = std::move(Xn);
    out.iterations = it;

    std::vector<double> res(count);
    bool done = true;
    for (int c = 0; c < count; ++c) {
      res[c] = resid(X[c], nu[c]);
      if (!(res[c] <= opt.tol)) done = false;
    }
    if (done || it == opt.maxit) {
      out.nu.assign(nu.begin(), nu.begin() + count);
      out.vectors.assign(X.begin(), X.begin() + count);
      out.residuals = res;
      if (!done) throw NoConvergence("spectrum not converged", res);
      return out;
    }
  }
  throw NoConvergence("spectrum not converged", {});
}

Apply matvec_of(const fem::SymSparseD& A) {
  return [&A](const std::vector<double>& x) { return A.apply(x); };
}

Apply cg_solver_of(const fem::SymSparseD& A, double tol, const Project& project_r = {}) {
  return [&A, tol, project_r](const std::vector<double>& b) {
    std::vector<double> x;
    cg(A, b, x, tol, 0, project_r);
    return x;
  };
}

double pencil_residual(const fem::SymSparseD& A, const fem::SymSparseD& B,
                       const std::vector<double>& x, double lambda) {
  std::vector<double> ax = A.apply(x);
  std::vector<double> bx = B.apply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double r = ax[i] - lambda * bx[i];
    s += r * r;
  }
  return std::sqrt(s) / std::max(nrm2(x), 1e-300);
}

}  // namespace

SpectrumReport robin_fredholm_spectrum(const fem::SymSparseD& K, const fem::SymSparseD& B,
                                       const fem::SymSparseD& M, int count, double tol) {
  std::vector<double> ones(B.dim, 1.0);
  if (fem::quadratic_form(B, ones) <= 0.0)
    throw std::invalid_argument("robin_fredholm_spectrum requires h >= 0, h not identically 0");
  fem::SymSparseD A = fem::combine(K, 1.0, B, 1.0);
  EigenOptions opt;
  opt.tol = tol;
  // largest nu of (M, A); lambda = 1/nu
  auto resid = [&](const std::vector<double>& x, double nu) {
    return pencil_residual(A, M, x, 1.0 / nu);
  };
  PencilResult pr = largest_pencil(A.dim, matvec_of(M), matvec_of(A),
                                   cg_solver_of(A, std::min(1e-10, tol * 1e-2)), {}, count, opt,
                                   resid);
  SpectrumReport rep;
  rep.which = SpectrumKind::robin_fredholm;
  for (int c = 0; c < count; ++c) {
    rep.eigenvalues.push_back(1.0 / pr.nu[c]);
    rep.residuals.push_back(pr.residuals[c]);
    rep.vectors.push_back(pr.vectors[c]);
  }
  return rep;
}

SpectrumReport neumann_spectrum(const fem::SymSparseD& K, const fem::SymSparseD& M, int count,
                                double tol) {
  const int n = K.dim;
  std::vector<double> ones(n, 1.0), m1(n);
  M.matvec(ones.data(), m1.data());
  const double m_total = dotv(ones, m1);

  // hold iterates M-orthogonal to the constants (the kernel of K)
  Project gauge = [m1, m_total, n](std::vector<double>& v) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += m1[i] * v[i];
    c /= m_total;
    for (int i = 0; i < n; ++i) v[i] -= c;
  };
  Project deflate = [n](std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    for (double& x : v) x -= mean;
  };

  EigenOptions opt;
  opt.tol = tol;
  auto resid = [&](const std::vector<double>& x, double nu) {
    return pencil_residual(K, M, x, 1.0 / nu);
  };
  PencilResult pr = largest_pencil(n, matvec_of(M), matvec_of(K),
                                   cg_solver_of(K, std::min(1e-10, tol * 1e-2), deflate), gauge,
                                   count, opt, resid);
  SpectrumReport rep;
  rep.which = SpectrumKind::neumann;
  for (int c = 0; c < count; ++c) {
    rep.eigenvalues.push_back(1.0 / pr.nu[c]);
    rep.residuals.push_back(pr.residuals[c]);
    rep.vectors.push_back(pr.vectors[c]);
  }
  return rep;
}

double poincare_constant(const fem::SymSparseD& K, const fem::SymSparseD& M, double tol) {
  SpectrumReport rep = neumann_spectrum(K, M, 1, tol);
  return 1.0 / std::sqrt(rep.eigenvalues[0]);
}

namespace {
// smallest eigenvalues of A x = lambda B1 x via the pencil B1 x = nu (A+B1) x,
// nu = 1/(1+lambda); works for PSD A as long as A+B1 is SPD
SpectrumReport smallest_with_singular_B(const fem::SymSparseD& A, const fem::SymSparseD& B1,
                                        int count, double tol, SpectrumKind kind) {
  fem::SymSparseD S = fem::combine(A, 1.0, B1, 1.0);
  EigenOptions opt;
  opt.tol = tol;
  auto resid = [&](const std::vector<double>& x, double nu) {
    return pencil_residual(A, B1, x, (1.0 - nu) / nu);
  };
  PencilResult pr = largest_pencil(S.dim, matvec_of(B1), matvec_of(S),
                                   cg_solver_of(S, std::min(1e-10, tol * 1e-2)), {}, count, opt,
                                   resid);
  SpectrumReport rep;
  rep.which = kind;
  for (int c = 0; c < count; ++c) {
    rep.eigenvalues.push_back((1.0 - pr.nu[c]) / pr.nu[c]);
    rep.residuals.push_back(pr.residuals[c]);
    rep.vectors.push_back(pr.vectors[c]);
  }
  return rep;
}
}  // namespace

SpectrumReport steklov_spectrum(const fem::SymSparseD& K, const fem::SymSparseD& M,
                                const fem::SymSparseD& B1, int count, double tol) {
  fem::SymSparseD A = fem::combine(K, 1.0, M, 1.0);
  return smallest_with_singular_B(A, B1, count, tol, SpectrumKind::trace);
}

SpectrumReport steklov_classical_spectrum(const fem::SymSparseD& K, const fem::SymSparseD& B1,
                                          int count, double tol) {
  return smallest_with_singular_B(K, B1, count, tol, SpectrumKind::steklov);
}

double trace_constant(const mesh::Mesh& m, double tol) {
  fem::SymSparseD K = fem::assemble_stiffness(m);
  fem::SymSparseD M = fem::assemble_mass(m);
  fem::SymSparseD B1 = fem::assemble_boundary_mass(m, fem::RobinCoefficient::constant(1.0));
  SpectrumReport rep = steklov_spectrum(K, M, B1, 1, tol);
  return 1.0 / std::sqrt(rep.eigenvalues[0]);
}

UnionEmbeddingReport union_embedding_check(const mesh::Mesh& mesh_a, const mesh::Mesh& mesh_b,
                                           const mesh::Mesh& mesh_union, int count) {
  const double area_a = mesh::mesh_area(mesh_a);
  const double area_b = mesh::mesh_area(mesh_b);
  const double area_u = mesh::mesh_area(mesh_union);
  const double tol_geom = 1e-6 * (area_a + area_b);
  if (area_u > area_a + area_b + tol_geom ||
      area_u < std::max(area_a, area_b) - tol_geom)
    throw std::runtime_error("geometry mismatch");

  UnionEmbeddingReport rep;
  rep.c_a = trace_constant(mesh_a);
  rep.c_b = trace_constant(mesh_b);

  fem::SymSparseD K = fem::assemble_stiffness(mesh_union);
  fem::SymSparseD M = fem::assemble_mass(mesh_union);
  fem::SymSparseD B1 = fem::assemble_boundary_mass(mesh_union, fem::RobinCoefficient::constant(1.0));
  SpectrumReport sp = steklov_spectrum(K, M, B1, count, 1e-8);
  rep.mu_union = sp.eigenvalues;
  rep.c_union = 1.0 / std::sqrt(sp.eigenvalues[0]);

  // || w ||_{L2(d(UuV))} <= || w|_U ||_{L2(dU)} + || w|_V ||_{L2(dV)} and the
  // overlap double-counts H1 energy at most twice
  rep.bound = std::sqrt(2.0) * std::sqrt(rep.c_a * rep.c_a + rep.c_b * rep.c_b);
  rep.floor = 1.0 / (rep.bound * rep.bound);
  rep.pass = rep.c_union <= rep.bound * 1.02;
  return rep;
}

}  // namespace roughlap::solve
