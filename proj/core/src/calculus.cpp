#include "kernelsmith/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "kernelsmith/fft.hpp"

namespace kernelsmith {

BoundaryField::BoundaryField(Domain d, CVector v) : domain(std::move(d)), values(std::move(v)) {
  if (static_cast<int>(values.size()) != domain.total_samples())
    throw Error("boundary field length does not match the domain grid");
}

void require_same_grid(const BoundaryField& a, const BoundaryField& b) {
  if (a.domain.grid_id() != b.domain.grid_id())
    throw Error("boundary fields belong to different grids");
}

BoundaryField BoundaryField::conjugate() const {
  return BoundaryField(domain, values.conjugate());
}
BoundaryField BoundaryField::operator+(const BoundaryField& o) const {
  require_same_grid(*this, o);
  return BoundaryField(domain, values + o.values);
}
BoundaryField BoundaryField::operator-(const BoundaryField& o) const {
  require_same_grid(*this, o);
  return BoundaryField(domain, values - o.values);
}
BoundaryField BoundaryField::operator*(const BoundaryField& o) const {
  require_same_grid(*this, o);
  return BoundaryField(domain, values.cwiseProduct(o.values));
}
BoundaryField BoundaryField::operator*(Complex s) const {
  return BoundaryField(domain, values * s);
}

BoundaryField sample_boundary(const Domain& d,
                              const std::function<Complex(Complex)>& f) {
  CVector v(d.total_samples());
  for (int k = 0; k < d.total_samples(); ++k) v[k] = f(d.point(k));
  return BoundaryField(d, std::move(v));
}

BoundaryField tangent_field(const Domain& d) {
  CVector v(d.total_samples());
  for (int k = 0; k < d.total_samples(); ++k) v[k] = d.tangent(k);
  return BoundaryField(d, std::move(v));
}

Complex integrate_ds(const BoundaryField& f) {
  Complex acc{0.0, 0.0};
  for (int k = 0; k < f.size(); ++k) acc += f.values[k] * f.domain.ds_weight(k);
  return acc;
}

Complex integrate_dz(const BoundaryField& f) {
  Complex acc{0.0, 0.0};
  for (int k = 0; k < f.size(); ++k) acc += f.values[k] * f.domain.dz_weight(k);
  return acc;
}

BoundaryField boundary_derivative(const BoundaryField& f) {
  const Domain& d = f.domain;
  CVector out(f.size());
  for (int c = 0; c < d.connectivity(); ++c) {
    int off = d.curve_offset(c);
    int m = d.curves()[c].size();
    CVector dt = spectral_derivative(f.values.segment(off, m));
    for (int k = 0; k < m; ++k) out[off + k] = dt[k] / d.dpoint(off + k);
  }
  return BoundaryField(d, std::move(out));
}

Complex cauchy_interior_unchecked(const BoundaryField& f, Complex z) {
  Complex acc{0.0, 0.0};
  const Domain& d = f.domain;
  for (int k = 0; k < f.size(); ++k)
    acc += f.values[k] * d.dz_weight(k) / (d.point(k) - z);
  return acc / (kTwoPi * kImagUnit);
}

Complex cauchy_interior(const BoundaryField& f, Complex z) {
  const Domain& d = f.domain;
  double dist = d.boundary_distance(z);
  if (dist < d.guard_distance(z))
    throw GuardError("evaluation point is within the guard distance of the boundary");
  if (!d.contains(z)) throw GuardError("evaluation point is outside the domain");
  return cauchy_interior_unchecked(f, z);
}

Complex cauchy_trace_inside(const BoundaryField& f, int node) {
  const Domain& d = f.domain;
  const Complex x = d.point(node);
  const Complex fx = f.values[node];
  const int c0 = d.curve_of(node);
  const int off = d.curve_offset(c0);
  const int m = d.curves()[c0].size();
  // t-derivative of the density on the node's own curve, for the removable
  // diagonal value of (f - f(x)) / (zeta - x).
  CVector dens_dt = spectral_derivative(f.values.segment(off, m));

  Complex acc{0.0, 0.0};
  for (int k = 0; k < f.size(); ++k) {
    if (k == node) {
      acc += dens_dt[node - off] / static_cast<double>(m);
      continue;
    }
    acc += (f.values[k] - fx) * d.dz_weight(k) / (d.point(k) - x);
  }
  return acc / (kTwoPi * kImagUnit) + fx;
}

Complex cauchy_derivative_trace_inside(const BoundaryField& f, int node) {
  const Domain& d = f.domain;
  const Complex x = d.point(node);
  const Complex fx = f.values[node];
  const int c0 = d.curve_of(node);
  const int off = d.curve_offset(c0);
  const int m = d.curves()[c0].size();

  CVector dens_dt = spectral_derivative(f.values.segment(off, m));
  CVector dens_dtt = spectral_derivative(f.values.segment(off, m), 2);
  const Complex zd = d.dpoint(node);
  const Complex zdd = d.ddpoint(node);
  const Complex fpz = dens_dt[node - off] / zd;  // df/dzeta at the node

  Complex acc{0.0, 0.0};
  for (int k = 0; k < f.size(); ++k) {
    if (k == node) {
      // limit of [f - f(x) - f'(x)(zeta-x)] zeta' / (zeta-x)^2 as t -> t0
      acc += (dens_dtt[node - off] - dens_dt[node - off] * zdd / zd) /
             (2.0 * zd) / static_cast<double>(m);
      continue;
    }
    Complex dz = d.point(k) - x;
    acc += (f.values[k] - fx - fpz * dz) * d.dz_weight(k) / (dz * dz);
  }
  return acc / (kTwoPi * kImagUnit) + fpz;
}

Complex cauchy_trace_inside_offnode(const BoundaryField& f, int curve, double t) {
  const Domain& d = f.domain;
  const int off = d.curve_offset(curve);
  const int m = d.curves()[curve].size();
  CVector pos_hat = fft_forward(d.curves()[curve].pos);
  CVector dens_hat = fft_forward(f.values.segment(off, m));
  const Complex x = trig_interpolate(pos_hat, t);
  const Complex fx = trig_interpolate(dens_hat, t);

  Complex acc{0.0, 0.0};
  for (int k = 0; k < f.size(); ++k)
    acc += (f.values[k] - fx) * d.dz_weight(k) / (d.point(k) - x);
  return acc / (kTwoPi * kImagUnit) + fx;
}

ZeroFindResult find_zeros(const BoundaryField& g, const BoundaryField& g_deriv,
                          int expected_count, const ZeroFindOptions& opts) {
  require_same_grid(g, g_deriv);
  const double gmax = g.max_abs();
  if (g.min_abs() <= opts.boundary_min_abs * std::max(1.0, gmax))
    throw GuardError("function vanishes on (or too near) the boundary");

  const Domain& d = g.domain;
  const int pmax = std::max(expected_count, 0);

  // Newton sums s_p = sum of zero^p via the argument principle.
  std::vector<Complex> s(pmax + 1);
  for (int p = 0; p <= pmax; ++p) {
    Complex acc{0.0, 0.0};
    for (int k = 0; k < g.size(); ++k) {
      Complex zp = std::pow(d.point(k), p);
      acc += zp * g_deriv.values[k] / g.values[k] * d.dz_weight(k);
    }
    s[p] = acc / (kTwoPi * kImagUnit);
  }

  long count = std::lround(s[0].real());
  if (std::abs(s[0] - static_cast<double>(count)) > opts.count_tolerance)
    throw CountMismatchError("argument-principle count is not an integer");
  if (count != expected_count)
    throw CountMismatchError("zero count " + std::to_string(count) +
                             " does not match expected " +
                             std::to_string(expected_count));

  ZeroFindResult result;
  if (count == 0) return result;

  // Newton's identities: k e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} s_i.
  std::vector<Complex> e(count + 1);
  e[0] = 1.0;
  for (int k = 1; k <= count; ++k) {
    Complex acc{0.0, 0.0};
    double sign = 1.0;
    for (int i = 1; i <= k; ++i) {
      acc += sign * e[k - i] * s[i];
      sign = -sign;
    }
    e[k] = acc / static_cast<double>(k);
  }

  // Companion-matrix roots of z^m - e1 z^(m-1) + e2 z^(m-2) - ... where the
  // coefficient of z^j is (-1)^(m-j) e_{m-j}.
  CMatrix comp = CMatrix::Zero(count, count);
  for (int j = 0; j < count; ++j) {
    int i = count - j;
    Complex coef = ((i % 2 == 0) ? 1.0 : -1.0) * e[i];
    comp(j, count - 1) = -coef;
  }
  for (int k = 1; k < count; ++k) comp(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMatrix> eig(comp);
  std::vector<Complex> zeros(eig.eigenvalues().data(),
                             eig.eigenvalues().data() + count);

  // Newton polish on the Cauchy-evaluated function.
  for (Complex& z : zeros) {
    for (int it = 0; it < 40; ++it) {
      Complex gv = cauchy_interior_unchecked(g, z);
      if (std::abs(gv) <= 1e-13 * std::max(1.0, gmax)) break;
      Complex gp = cauchy_interior_unchecked(g_deriv, z);
      if (std::abs(gp) == 0.0) break;
      Complex step = gv / gp;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    if (std::abs(cauchy_interior_unchecked(g, z)) > opts.polish_tolerance * gmax)
      throw Error("zero polish failed to converge");
  }

  std::sort(zeros.begin(), zeros.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  for (size_t i = 0; i < zeros.size(); ++i)
    for (size_t j = i + 1; j < zeros.size(); ++j)
      if (std::abs(zeros[i] - zeros[j]) < opts.cluster_distance)
        result.clustered = true;

  result.zeros = std::move(zeros);
  return result;
}

}  // namespace kernelsmith
