#ifndef KERNELSMITH_POTENTIAL_HPP
#define KERNELSMITH_POTENTIAL_HPP

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "kernelsmith/calculus.hpp"

namespace kernelsmith {

// Double-layer representation u = D[density] + sum_k c_k ln|z - s_k| of a
// function harmonic in the domain.  The density may be complex (the solver
// is real-linear), in which case u is complex with harmonic real and
// imaginary parts.
struct LayerPotential {
  BoundaryField density;
  CVector log_coeffs;                // one per hole
  std::vector<Complex> log_sources;  // one point inside each hole

  Complex value(Complex z) const;  // interior evaluation
  Complex dz(Complex z) const;     // d/dz of the harmonic completion

  // Limits from inside at the boundary: value at an off-node parameter t of
  // the given curve, and d/dz at a grid node.
  Complex boundary_value(int curve, double t) const;
  Complex boundary_dz(int node) const;
};

// Nystrom discretization of the interior Dirichlet problem: second-kind
// double-layer equation plus one logarithmic source per hole with zero-mean
// side conditions.  The matrix depends only on the domain; one real LU
// factorization serves every data vector.
class DirichletSolver {
 public:
  explicit DirichletSolver(Domain domain);

  const Domain& domain() const { return domain_; }
  const std::vector<Complex>& log_sources() const { return log_sources_; }

  LayerPotential solve(const CVector& boundary_data) const;
  LayerPotential solve_real(const RVector& boundary_data) const;

 private:
  Domain domain_;
  std::vector<Complex> log_sources_;
  std::vector<int> hole_curves_;
  Eigen::PartialPivLU<RMatrix> lu_;
};

// Harmonic measure of curve gamma_j (1-based over the holes, j = 1..n-1):
// harmonic with boundary value 1 on gamma_j and 0 elsewhere.
class HarmonicMeasure {
 public:
  HarmonicMeasure(std::shared_ptr<const DirichletSolver> solver, int j);
  double operator()(Complex z) const;
  const LayerPotential& potential() const { return pot_; }

 private:
  LayerPotential pot_;
};

// F_j' = 2 d(omega_j)/dz: single-valued holomorphic derivative of the
// harmonic measure, with boundary trace for period integrals.
class FPrimeEvaluator {
 public:
  FPrimeEvaluator(std::shared_ptr<const DirichletSolver> solver, int j);
  Complex operator()(Complex z) const;
  Complex boundary(int node) const;
  // \oint F_j' dz along one curve.
  Complex period(int curve) const;

 private:
  std::shared_ptr<const DirichletSolver> solver_;
  LayerPotential pot_;
};

// Green's function G(z,w) = -ln|z-w| + h_w(z), positive inside, zero on the
// boundary, symmetric.
class GreenFunction {
 public:
  explicit GreenFunction(std::shared_ptr<const DirichletSolver> solver);
  double operator()(Complex z, Complex w) const;

 private:
  const LayerPotential& regular_part(Complex w) const;
  std::shared_ptr<const DirichletSolver> solver_;
  mutable std::map<std::pair<double, double>, LayerPotential> cache_;
  mutable std::mutex mutex_;
};

// Bergman-family kernel K_m(z,w) = (d^m/d wbar^m) K(z,w), m <= 2, computed
// from Dirichlet solves with w-differentiated logarithmic data; K itself is
// the m = 0 case.  Both interior values and the boundary trace in z are
// available, the latter through inside limits of the layer representation.
class BergmanKernel {
 public:
  BergmanKernel(std::shared_ptr<const DirichletSolver> solver, int order = 0);

  int order() const { return order_; }
  Complex operator()(Complex z, Complex w) const;
  BoundaryField boundary_trace(Complex w) const;

 private:
  const LayerPotential& potential_for(Complex w) const;
  std::shared_ptr<const DirichletSolver> solver_;
  int order_;
  mutable std::map<std::pair<double, double>, LayerPotential> cache_;
  mutable std::mutex mutex_;
};

// Lambda_m(z,w) = (d^m/d w^m) Lambda(z,w), m <= 2: double pole on the
// diagonal with principal part (m+1)! / (pi (z-w)^(m+2)); symmetric for m=0.
class LambdaKernel {
 public:
  LambdaKernel(std::shared_ptr<const DirichletSolver> solver, int order = 0);

  int order() const { return order_; }
  Complex operator()(Complex z, Complex w) const;
  BoundaryField boundary_trace(Complex w) const;

 private:
  const LayerPotential& potential_for(Complex w) const;
  std::shared_ptr<const DirichletSolver> solver_;
  int order_;
  mutable std::map<std::pair<double, double>, LayerPotential> cache_;
  mutable std::mutex mutex_;
};

// Conformal modulus of a 2-connected domain, normalized so that the annulus
// rho < |z| < 1 has modulus ln(1/rho); computed from the period of F_1'.
double modulus(const Domain& domain);

}  // namespace kernelsmith

#endif
