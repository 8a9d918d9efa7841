#ifndef KERNELSMITH_GEOMETRY_HPP
#define KERNELSMITH_GEOMETRY_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kernelsmith/types.hpp"

namespace kernelsmith {

// One closed real-analytic boundary curve, stored as equispaced samples of a
// 1-periodic parameterization together with analytically supplied derivatives.
struct ParamCurve {
  CVector pos;     // z(t_k), t_k = k/M
  CVector deriv;   // z'(t_k)
  CVector deriv2;  // z''(t_k), filled spectrally at Domain construction

  int size() const { return static_cast<int>(pos.size()); }

  static ParamCurve sample(const std::function<Complex(double)>& z,
                           const std::function<Complex(double)>& dz, int m);

  // Reverses the traversal direction, keeping t=0 at the same point.
  void reverse();
};

// A bounded n-connected domain with standard orientation: the domain lies to
// the left of every curve (outer counterclockwise, inner holes clockwise).
// Immutable after construction; cheap to copy (shared representation).
class Domain {
 public:
  Domain(std::vector<ParamCurve> curves, int outer_index);

  int connectivity() const;
  int outer_index() const;
  const std::vector<ParamCurve>& curves() const;

  // Flattened boundary grid: curves concatenated in order.
  int total_samples() const;
  int curve_offset(int c) const;
  int curve_of(int k) const;
  Complex point(int k) const;
  Complex dpoint(int k) const;   // dz/dt
  Complex ddpoint(int k) const;  // d^2z/dt^2
  Complex tangent(int k) const;  // unit tangent z'/|z'|
  double ds_weight(int k) const;  // |z'| / M  (trapezoid weight for ds)
  Complex dz_weight(int k) const;  //  z'  / M  (trapezoid weight for dz)

  bool contains(Complex p) const;
  double boundary_distance(Complex p) const;
  // Guard distance for interior evaluation near the curve closest to p.
  double guard_distance(Complex p) const;

  // Winding number of curve c about p, from the sampled polygon.
  int winding_number(int c, Complex p) const;

  // Identity of the boundary grid; fields from different grids don't mix.
  std::uintptr_t grid_id() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Disc/annulus/circle-domain factory.  centers[0]/radii[0] give the outer
// circle; the rest are holes.  Throws GeometryError on overlap or escape.
Domain make_circle_domain(const std::vector<Complex>& centers,
                          const std::vector<double>& radii, int samples = 256);

// The two-connected domain { z : |z + 1/z| < r }, r > 2.  Boundary curves are
// the two root branches of z^2 - r e^{i theta} z + 1 = 0.  samples = 0 picks
// the smallest power of two >= 256 that resolves the curves to ~1e-9.
Domain make_ar_domain(double r, int samples = 0);

int auto_samples_for_ar(double r);

// Unit tangent samples T = z'/|z'| of one curve.
CVector unit_tangent(const Domain& domain, int curve_index);

// Deterministic low-discrepancy interior points (Halton over the bounding
// box) at the given distance from the boundary and from listed exclusions.
std::vector<Complex> interior_points(const Domain& domain, int count,
                                     double margin,
                                     const std::vector<Complex>& avoid = {},
                                     double avoid_distance = 0.0);

// A boundary margin comfortably beyond the interior-evaluation guard of the
// coarsest-resolved stretch of the boundary.
double probe_margin(const Domain& domain);

// JSON loaders for {"type":"circles",...} and {"type":"ar",...} specs.
Domain domain_from_json(const std::string& json_text);

}  // namespace kernelsmith

#endif
