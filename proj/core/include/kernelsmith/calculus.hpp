#ifndef KERNELSMITH_CALCULUS_HPP
#define KERNELSMITH_CALCULUS_HPP

#include <vector>

#include "kernelsmith/geometry.hpp"
#include "kernelsmith/types.hpp"

namespace kernelsmith {

// Complex samples aligned with a Domain's concatenated boundary grid.
struct BoundaryField {
  Domain domain;
  CVector values;

  BoundaryField(Domain d, CVector v);

  int size() const { return static_cast<int>(values.size()); }

  BoundaryField conjugate() const;
  BoundaryField operator+(const BoundaryField& other) const;
  BoundaryField operator-(const BoundaryField& other) const;
  BoundaryField operator*(const BoundaryField& other) const;
  BoundaryField operator*(Complex scalar) const;

  double max_abs() const { return values.cwiseAbs().maxCoeff(); }
  double min_abs() const { return values.cwiseAbs().minCoeff(); }
};

void require_same_grid(const BoundaryField& a, const BoundaryField& b);

// Sample a pointwise function of the boundary position.
BoundaryField sample_boundary(const Domain& d,
                              const std::function<Complex(Complex)>& f);

// Full-grid unit tangent field.
BoundaryField tangent_field(const Domain& d);

// Periodic trapezoid rule: integral of f against arc length ds, resp. dz.
Complex integrate_ds(const BoundaryField& f);
Complex integrate_dz(const BoundaryField& f);

// d/dz of the boundary trace of a function holomorphic near the boundary:
// spectral d/dt per curve divided by z'(t).
BoundaryField boundary_derivative(const BoundaryField& f);

// Cauchy integral (1/2 pi i) \oint f / (zeta - z) dzeta at an interior point.
// Throws GuardError when z is outside or within the guard distance.
Complex cauchy_interior(const BoundaryField& f, Complex z);
// Guard-free variant for callers that manage accuracy themselves.
Complex cauchy_interior_unchecked(const BoundaryField& f, Complex z);

// Interior boundary values (limits from inside) of the Cauchy integral and
// of its z-derivative at grid node k, via singularity subtraction.  Both are
// spectrally accurate for analytic densities.
Complex cauchy_trace_inside(const BoundaryField& f, int node);
Complex cauchy_derivative_trace_inside(const BoundaryField& f, int node);

// Interior boundary value of the Cauchy integral at an off-node boundary
// point z(curve, t) using trigonometric interpolation of the density.
Complex cauchy_trace_inside_offnode(const BoundaryField& f, int curve, double t);

struct ZeroFindOptions {
  double boundary_min_abs = 1e-10;  // g must not vanish on the boundary
  double cluster_distance = 1e-4;   // pairwise distance flagging ill conditioning
  double count_tolerance = 1e-6;
  double polish_tolerance = 1e-9;   // target |g(z*)| <= tol * max |g|
};

struct ZeroFindResult {
  std::vector<Complex> zeros;
  bool clustered = false;  // some pair closer than cluster_distance
};

// Zeros of a holomorphic function from its boundary trace: Newton sums
// s_p = (1/2 pi i) \oint z^p g'/g dz, Newton's identities, companion-matrix
// roots, then Newton polish on the Cauchy-evaluated function.
ZeroFindResult find_zeros(const BoundaryField& g, const BoundaryField& g_deriv,
                          int expected_count,
                          const ZeroFindOptions& opts = {});

}  // namespace kernelsmith

#endif
