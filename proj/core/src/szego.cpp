#include "kernelsmith/szego.hpp"

#include <algorithm>
#include <cmath>

namespace kernelsmith {

namespace {

// A(z,w) = conj[(1/2 pi i) T(z)/(z-w)] - (1/2 pi i) T(w)/(w-z), the smooth
// skew-hermitian Kerzman-Stein kernel; it cancels exactly on a circle.  This
// is the sign for which (I + A) u = c_a returns the Szego kernel boundary
// values on multiply connected domains.
Complex ks_offdiag(Complex z, Complex tz, Complex w, Complex tw) {
  Complex denom = kTwoPi * kImagUnit;
  return std::conj(tz / (z - w) / denom) - tw / (w - z) / denom;
}

}  // namespace

Complex SzegoSolution::szego_at(Complex z) const {
  return cauchy_interior(s_boundary, z);
}

Complex SzegoSolution::garabedian_at(Complex z) const {
  if (std::abs(z - base) < 1e-6)
    throw GuardError("Garabedian kernel evaluated too close to its pole");
  const Domain& d = s_boundary.domain;
  CVector sub(l_boundary.size());
  for (int k = 0; k < l_boundary.size(); ++k)
    sub[k] = l_boundary.values[k] - 1.0 / (kTwoPi * (d.point(k) - base));
  Complex regular = cauchy_interior(BoundaryField(d, std::move(sub)), z);
  return regular + 1.0 / (kTwoPi * (z - base));
}

Complex AhlforsMap::value(Complex z) const { return cauchy_interior(boundary, z); }
Complex AhlforsMap::derivative(Complex z) const {
  return cauchy_interior(boundary_deriv, z);
}

int AhlforsMap::boundary_winding(int c) const {
  const Domain& d = boundary.domain;
  int off = d.curve_offset(c);
  int m = d.curves()[c].size();
  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    Complex a = boundary.values[off + k];
    Complex b = boundary.values[off + (k + 1) % m];
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

SzegoSolver::SzegoSolver(Domain domain) : domain_(std::move(domain)) {
  const int n = domain_.total_samples();
  kernel_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    Complex zi = domain_.point(i);
    Complex ti = domain_.tangent(i);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      kernel_(i, j) = ks_offdiag(zi, ti, domain_.point(j), domain_.tangent(j));
    }
  }
  // Diagonal by two one-sided cubic extrapolations along the curve, averaged;
  // the kernel is smooth there and this matches it to fourth order.
  for (int i = 0; i < n; ++i) {
    int c = domain_.curve_of(i);
    int off = domain_.curve_offset(c);
    int m = domain_.curves()[c].size();
    auto at = [&](int shift) {
      int j = off + ((i - off + shift) % m + m) % m;
      return kernel_(i, j);
    };
    Complex plus = 3.0 * at(1) - 3.0 * at(2) + at(3);
    Complex minus = 3.0 * at(-1) - 3.0 * at(-2) + at(-3);
    kernel_(i, i) = 0.5 * (plus + minus);
  }

  CMatrix system(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      system(i, j) = kernel_(i, j) * domain_.ds_weight(j) +
                     ((i == j) ? Complex{1.0, 0.0} : Complex{0.0, 0.0});
  lu_.compute(system);
  if (std::abs(lu_.determinant()) < 1e-300)
    throw ResolutionError("Kerzman-Stein collocation matrix is singular");
}

double SzegoSolver::kernel_max_abs() const {
  return kernel_.cwiseAbs().maxCoeff();
}

SzegoSolution SzegoSolver::solve(Complex base) const {
  if (domain_.boundary_distance(base) < domain_.guard_distance(base))
    throw GuardError("base point is within the guard distance of the boundary");
  if (!domain_.contains(base)) throw GuardError("base point is outside the domain");

  const int n = domain_.total_samples();
  CVector rhs(n);
  for (int k = 0; k < n; ++k)
    rhs[k] = std::conj(domain_.tangent(k) / (domain_.point(k) - base) /
                       (kTwoPi * kImagUnit));
  CVector u = lu_.solve(rhs);

  CVector l(n);
  for (int k = 0; k < n; ++k)
    l[k] = kImagUnit * std::conj(u[k]) / domain_.tangent(k);

  return SzegoSolution{base, BoundaryField(domain_, std::move(u)),
                       BoundaryField(domain_, std::move(l))};
}

AhlforsMap SzegoSolver::ahlfors(Complex base) const {
  SzegoSolution sol = solve(base);
  CVector f(sol.s_boundary.size());
  for (int k = 0; k < f.size(); ++k)
    f[k] = sol.s_boundary.values[k] / sol.l_boundary.values[k];
  BoundaryField trace(domain_, std::move(f));
  BoundaryField deriv = boundary_derivative(trace);
  AhlforsMap map{base, trace, deriv, 0.0};
  map.derivative_at_base = cauchy_interior(deriv, base).real();
  return map;
}

ZeroFindResult SzegoSolver::szego_zeros(const SzegoSolution& sol) const {
  BoundaryField ds = boundary_derivative(sol.s_boundary);
  return find_zeros(sol.s_boundary, ds, domain_.connectivity() - 1);
}

bool SzegoSolver::base_point_admissible(Complex a,
                                        const BasePointCriteria& crit) const {
  auto zeros_ok = [&](const SzegoSolution& sol, std::vector<Complex>* out) {
    ZeroFindResult zr;
    try {
      zr = szego_zeros(sol);
    } catch (const Error&) {
      return false;
    }
    if (zr.clustered) return false;
    BoundaryField ds = boundary_derivative(sol.s_boundary);
    double scale = sol.scale();
    for (size_t i = 0; i < zr.zeros.size(); ++i) {
      if (std::abs(cauchy_interior_unchecked(ds, zr.zeros[i])) <
          crit.min_slope * scale)
        return false;
      for (size_t j = i + 1; j < zr.zeros.size(); ++j)
        if (std::abs(zr.zeros[i] - zr.zeros[j]) < crit.min_separation)
          return false;
    }
    if (out) *out = zr.zeros;
    return true;
  };

  std::vector<Complex> zeros;
  SzegoSolution sol = solve(a);
  if (!zeros_ok(sol, &zeros)) return false;
  for (Complex ak : zeros) {
    if (domain_.boundary_distance(ak) < domain_.guard_distance(ak)) return false;
    SzegoSolution solk = solve(ak);
    if (!zeros_ok(solk, nullptr)) return false;
  }
  return true;
}

Complex SzegoSolver::select_base_point(Complex direction_hint) const {
  // Start from the deepest point of a coarse interior scan.
  std::vector<Complex> probes = interior_points(domain_, 24, 0.0);
  Complex start = probes[0];
  double best = -1.0;
  for (Complex p : probes) {
    double dd = domain_.boundary_distance(p);
    if (dd > best) {
      best = dd;
      start = p;
    }
  }

  Complex dir = direction_hint;
  if (std::abs(dir) == 0.0) dir = Complex{1.0, 0.0};
  dir /= std::abs(dir);

  // Step toward the boundary until just outside or blocked, geometrically
  // refining; test admissibility at each stop.
  double reach = 0.0;
  {
    double step = domain_.boundary_distance(start);
    while (step > 1e-4) {
      Complex trial = start + (reach + step) * dir;
      bool inside = false;
      try {
        inside = domain_.contains(trial) &&
                 domain_.boundary_distance(trial) > domain_.guard_distance(trial);
      } catch (const GuardError&) {
        inside = false;
      }
      if (inside)
        reach += step;
      else
        step *= 0.5;
    }
  }

  for (double frac : {0.5, 0.7, 0.85, 0.93, 0.97, 0.99, 0.25, 0.0}) {
    Complex a = start + frac * reach * dir;
    try {
      if (base_point_admissible(a)) return a;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error(
      "no admissible base point along this ray; raise the sample count or "
      "change the direction hint");
}

}  // namespace kernelsmith
