#ifndef KERNELSMITH_SZEGO_HPP
#define KERNELSMITH_SZEGO_HPP

#include <memory>
#include <vector>

#include "kernelsmith/calculus.hpp"

namespace kernelsmith {

// Boundary values of the Szego kernel S(.,a) and Garabedian kernel L(.,a)
// for one base point, with interior evaluation through the Cauchy integral.
struct SzegoSolution {
  Complex base;
  BoundaryField s_boundary;
  BoundaryField l_boundary;

  // S(z, base) at an interior z.
  Complex szego_at(Complex z) const;
  // L(z, base) at an interior z != base: Cauchy integral of the
  // pole-subtracted trace plus the simple pole 1/(2 pi (z-base)).
  Complex garabedian_at(Complex z) const;

  double scale() const { return s_boundary.max_abs(); }
};

// The Ahlfors map f_a = S(.,a)/L(.,a): a proper n-to-one map onto the unit
// disc with f_a(a) = 0 and f_a'(a) = 2 pi S(a,a) > 0.
struct AhlforsMap {
  Complex base;
  BoundaryField boundary;        // f_a on the boundary (unimodular)
  BoundaryField boundary_deriv;  // f_a' on the boundary
  double derivative_at_base;     // f_a'(a)

  Complex value(Complex z) const;
  Complex derivative(Complex z) const;
  // Winding of the boundary trace of f_a along curve c (degree contribution).
  int boundary_winding(int c) const;
};

struct BasePointCriteria {
  double min_separation = 1e-2;
  double min_slope = 1e-6;  // |S'(zero)| >= min_slope * scale
};

// Dense collocation solver for the Kerzman-Stein integral equation
// (I + A) u = c_a.  The kernel matrix is independent of the base point, so
// one LU factorization serves every solve on the domain.
class SzegoSolver {
 public:
  explicit SzegoSolver(Domain domain);

  const Domain& domain() const { return domain_; }

  SzegoSolution solve(Complex base) const;
  AhlforsMap ahlfors(Complex base) const;

  // Zeros of S(.,a): exactly n-1 of them for an n-connected domain.
  ZeroFindResult szego_zeros(const SzegoSolution& sol) const;

  // Max |A(z,w)| over the grid; identically zero on a disc.
  double kernel_max_abs() const;

  // Walks from an interior start toward the boundary along direction_hint
  // until the zeros of S(.,a) and of every S(.,a_k) are simple and pairwise
  // separated.  Throws if no admissible point is found before the guard.
  Complex select_base_point(Complex direction_hint) const;

  bool base_point_admissible(Complex a, const BasePointCriteria& crit = {}) const;

 private:
  Domain domain_;
  CMatrix kernel_;  // Kerzman-Stein kernel values A(z_i, z_j)
  Eigen::PartialPivLU<CMatrix> lu_;
};

}  // namespace kernelsmith

#endif
