#pragma once

#include <array>
#include <complex>
#include <vector>

#include "roughlap/fem.hpp"
#include "roughlap/geometry.hpp"
#include "roughlap/mesh.hpp"

namespace roughlap::ext {

using Vec3 = std::array<double, 3>;
using Complex = std::complex<double>;

// Epsilon ladder for the limiting-absorption continuation (A - i eps) u = F.
struct ContinuationSchedule {
  std::vector<double> epsilons;  // strictly decreasing, <= 1, optional trailing 0
  double k = 0.0;                // wavenumber; 0 = the Laplace case
  enum class BC { dirichlet, neumann, robin } bc = BC::dirichlet;
  double robin_h = 1.0;

  void check() const;
};

struct WeightedNormSpec {
  double a = 1.5;  // exponent of L_{2,a}, must lie in (1,2)
};

// Compactly supported meridian source density F(r,z); center.x == 0 keeps the
// rotated 3-D problem axisymmetric.
struct Source {
  std::function<double(Vec2)> f;
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
};

// Smooth bump of unit 3-D mass supported in the ball of `radius` around the
// axis point (0, z0).
Source bump_source(double z0, double radius);

// Smooth radial shell of unit 3-D mass supported in rho0 +/- radius. Purely
// monopole outside its support, which makes the c/|x| decay observable at
// desk-scale truncation radii.
Source shell_source(double rho0, double radius);

struct ContinuationResult {
  std::vector<double> epsilons;
  std::vector<std::vector<Complex>> fields;  // one per epsilon, full vertex vectors
  std::vector<double> weighted_norms;
  std::vector<double> pairwise_diffs;  // ||u_{e_{j+1}} - u_{e_j}||_{L_{2,a}}
  double truncation_radius = 0.0;
  std::vector<int> iterations;
};

struct GreenKernel {
  double epsilon = 0.0;
};

// gamma = (-1+i)/sqrt(2): the decaying branch of sqrt(-i eps)
Complex green_gamma();

// e^{gamma sqrt(eps) |x-y|} / (4 pi |x-y|); the free-space kernel at eps = 0.
Complex green_oracle(const Vec3& x, const Vec3& y, const GreenKernel& kernel);

// Dirichlet Green function of the exterior of the unit ball (Kelvin image).
double exterior_ball_green(const Vec3& x, const Vec3& y);

// Meridian mesh of the region between the obstacle boundary (marker 0) and
// the sphere of radius R_inf (marker 9), coarsening outward at ratio 1.2.
// Axis segments (r = 0) are left out of boundary_edges. Supported obstacles:
// the unit disk at the origin (a sphere) and off-axis polygonal cross-sections
// (rect-union family placed at r > 0).
mesh::Mesh build_exterior_mesh(const geom::Domain& obstacle, double R_inf, double target_h);

// Plain polar half-annulus a <= rho <= b (marker 0 inner, 9 outer); the
// sphere-obstacle exterior mesh is this with b = R_inf. `max_step` caps the
// graded radial spacing (wave runs need a few cells per wavelength).
mesh::Mesh polar_annulus_mesh(double a, double b, double target_h, double growth = 1.2,
                              double max_step = 1e300);

// One shifted solve (K_bc - (k^2 + i eps) M) u = F with u = 0 on marker 9.
// Exposed for symmetry/diagnostic tests; eps may be negative here.
std::vector<Complex> solve_single_shift(const mesh::Mesh& m, const ContinuationSchedule& bc_of,
                                        double eps, const Source& F, double tol,
                                        int* iterations = nullptr);

// Runs the whole epsilon ladder and records L_{2,a} norms and Cauchy diffs.
ContinuationResult solve_shifted(const mesh::Mesh& m, const ContinuationSchedule& schedule,
                                 const Source& F, double tol,
                                 const WeightedNormSpec& wspec = {});

double weighted_norm(const std::vector<Complex>& u, const mesh::Mesh& m,
                     const WeightedNormSpec& spec);
double weighted_norm(const std::vector<double>& u, const mesh::Mesh& m,
                     const WeightedNormSpec& spec);

struct DecayFit {
  double exponent = 0.0;  // slope of log max|u| against log rho
  double constant = 0.0;  // e^intercept
};

// Least-squares fit of log max|u| on meridian arcs rho = radii[i].
// Requires at least 3 radii.
DecayFit decay_fit(const std::vector<Complex>& u, const mesh::Mesh& m,
                   const std::vector<double>& radii);

// Sphere integrals of |du/drho - i k u|^2 at the given radii (weight 2 pi r).
std::vector<double> radiation_residual(const std::vector<Complex>& u, const mesh::Mesh& m,
                                       double k, const std::vector<double>& radii);

// P1 evaluation helpers for complex fields on meridian meshes.
Complex eval_complex(const mesh::Mesh& m, const std::vector<Complex>& u, Vec2 p);
std::array<Complex, 2> grad_complex(const mesh::Mesh& m, const std::vector<Complex>& u, Vec2 p);

}  // namespace roughlap::ext
