#include "kernelsmith/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "kernelsmith/fft.hpp"

namespace kernelsmith {

namespace {

bool is_power_of_two(int m) { return m >= 1 && (m & (m - 1)) == 0; }

// Winding number of a closed sampled polygon about p, by summing turning
// angles.  Exact integer for p off the polygon.
double polygon_winding(const CVector& pos, Complex p) {
  double total = 0.0;
  const int m = static_cast<int>(pos.size());
  for (int k = 0; k < m; ++k) {
    Complex a = pos[k] - p;
    Complex b = pos[(k + 1) % m] - p;
    total += std::arg(b / a);
  }
  return total / kTwoPi;
}

}  // namespace

ParamCurve ParamCurve::sample(const std::function<Complex(double)>& z,
                              const std::function<Complex(double)>& dz,
                              int m) {
  ParamCurve c;
  c.pos.resize(m);
  c.deriv.resize(m);
  for (int k = 0; k < m; ++k) {
    double t = static_cast<double>(k) / m;
    c.pos[k] = z(t);
    c.deriv[k] = dz(t);
  }
  return c;
}

void ParamCurve::reverse() {
  const int m = size();
  CVector p(m), d(m);
  for (int k = 0; k < m; ++k) {
    int j = (m - k) % m;  // t -> 1 - t keeps the t=0 sample
    p[k] = pos[j];
    d[k] = -deriv[j];
  }
  pos = p;
  deriv = d;
  deriv2.resize(0);
}

struct Domain::Impl {
  std::vector<ParamCurve> curves;
  int outer = 0;
  std::vector<int> offsets;
  int total = 0;
  double diameter = 0.0;
};

Domain::Domain(std::vector<ParamCurve> curves, int outer_index) {
  auto impl = std::make_shared<Impl>();
  impl->curves = std::move(curves);
  impl->outer = outer_index;
  const int n = static_cast<int>(impl->curves.size());
  if (n == 0 || outer_index < 0 || outer_index >= n)
    throw GeometryError("domain needs at least one curve and a valid outer index");

  for (auto& c : impl->curves) {
    if (!is_power_of_two(c.size()) || c.size() < 32)
      throw GeometryError("curve sample count must be a power of two >= 32");
    if (c.deriv.size() != c.pos.size())
      throw GeometryError("curve derivative samples missing");
  }

  // Normalize orientation: domain to the left of every curve.  The outer
  // curve must wind +1 about hole samples (or, for n=1, about an inside
  // probe); holes must wind -1 about their own centroids.
  for (int c = 0; c < n; ++c) {
    Complex probe;
    if (c == impl->outer) {
      if (n > 1) {
        int other = (impl->outer == 0) ? 1 : 0;
        probe = impl->curves[other].pos.mean();
      } else {
        probe = impl->curves[c].pos.mean();
      }
      double w = polygon_winding(impl->curves[c].pos, probe);
      if (std::abs(w + 1.0) < 0.25) impl->curves[c].reverse();
    } else {
      probe = impl->curves[c].pos.mean();
      double w = polygon_winding(impl->curves[c].pos, probe);
      if (std::abs(w - 1.0) < 0.25) impl->curves[c].reverse();
    }
  }

  // Second derivatives and the analytic-curve consistency check: spectral
  // differentiation of the positions must reproduce the supplied derivative.
  for (auto& c : impl->curves) {
    CVector spectral = spectral_derivative(c.pos);
    double scale = std::max(1.0, c.deriv.cwiseAbs().maxCoeff());
    double err = (spectral - c.deriv).cwiseAbs().maxCoeff();
    if (err > 1e-8 * scale)
      throw GeometryError(
          "curve samples are not spectrally consistent with the supplied "
          "derivative (raise the sample count)");
    if (c.deriv.cwiseAbs().minCoeff() <= 1e-12)
      throw GeometryError("curve parameterization has a vanishing derivative");
    c.deriv2 = spectral_derivative(c.deriv);
  }

  impl->offsets.resize(n + 1, 0);
  for (int c = 0; c < n; ++c)
    impl->offsets[c + 1] = impl->offsets[c] + impl->curves[c].size();
  impl->total = impl->offsets[n];

  // Pairwise disjointness.
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      double dmin = std::numeric_limits<double>::max();
      for (int i = 0; i < impl->curves[a].size(); ++i)
        for (int j = 0; j < impl->curves[b].size(); ++j)
          dmin = std::min(dmin,
                          std::abs(impl->curves[a].pos[i] - impl->curves[b].pos[j]));
      if (dmin <= 1e-6) throw GeometryError("boundary curves touch or overlap");
    }

  // Winding structure: outer winds +1 about every hole sample, holes wind 0
  // about samples of other holes.
  for (int c = 0; c < n; ++c) {
    if (c == impl->outer) continue;
    Complex s = impl->curves[c].pos[0];
    if (std::lround(polygon_winding(impl->curves[impl->outer].pos, s)) != 1)
      throw GeometryError("hole lies outside the outer curve");
    for (int b = 0; b < n; ++b) {
      if (b == c || b == impl->outer) continue;
      if (std::lround(polygon_winding(impl->curves[b].pos, s)) != 0)
        throw GeometryError("holes are nested or overlapping");
    }
  }

  Complex lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (auto& c : impl->curves)
    for (int k = 0; k < c.size(); ++k) {
      lo = {std::min(lo.real(), c.pos[k].real()), std::min(lo.imag(), c.pos[k].imag())};
      hi = {std::max(hi.real(), c.pos[k].real()), std::max(hi.imag(), c.pos[k].imag())};
    }
  impl->diameter = std::abs(hi - lo);

  impl_ = impl;
}

int Domain::connectivity() const { return static_cast<int>(impl_->curves.size()); }
int Domain::outer_index() const { return impl_->outer; }
const std::vector<ParamCurve>& Domain::curves() const { return impl_->curves; }
int Domain::total_samples() const { return impl_->total; }
int Domain::curve_offset(int c) const { return impl_->offsets[c]; }

int Domain::curve_of(int k) const {
  int n = connectivity();
  for (int c = 0; c < n; ++c)
    if (k < impl_->offsets[c + 1]) return c;
  throw Error("sample index out of range");
}

Complex Domain::point(int k) const {
  int c = curve_of(k);
  return impl_->curves[c].pos[k - impl_->offsets[c]];
}
Complex Domain::dpoint(int k) const {
  int c = curve_of(k);
  return impl_->curves[c].deriv[k - impl_->offsets[c]];
}
Complex Domain::ddpoint(int k) const {
  int c = curve_of(k);
  return impl_->curves[c].deriv2[k - impl_->offsets[c]];
}
Complex Domain::tangent(int k) const {
  Complex d = dpoint(k);
  return d / std::abs(d);
}
double Domain::ds_weight(int k) const {
  int c = curve_of(k);
  return std::abs(dpoint(k)) / impl_->curves[c].size();
}
Complex Domain::dz_weight(int k) const {
  int c = curve_of(k);
  return dpoint(k) / static_cast<double>(impl_->curves[c].size());
}

bool Domain::contains(Complex p) const {
  double d = boundary_distance(p);
  if (d < 1e-9) throw GuardError("membership test indeterminate this close to the boundary");
  double total = 0.0;
  for (auto& c : impl_->curves) total += polygon_winding(c.pos, p);
  long w = std::lround(total);
  if (std::abs(total - w) > 0.25)
    throw GuardError("membership test indeterminate this close to the boundary");
  return w == 1;
}

double Domain::boundary_distance(Complex p) const {
  double dmin = std::numeric_limits<double>::max();
  for (auto& c : impl_->curves)
    for (int k = 0; k < c.size(); ++k)
      dmin = std::min(dmin, std::abs(c.pos[k] - p));
  return dmin;
}

double Domain::guard_distance(Complex p) const {
  // 5 local grid spacings on the nearest curve.
  double dmin = std::numeric_limits<double>::max();
  double spacing = 0.0;
  for (auto& c : impl_->curves)
    for (int k = 0; k < c.size(); ++k) {
      double d = std::abs(c.pos[k] - p);
      if (d < dmin) {
        dmin = d;
        spacing = std::abs(c.deriv[k]) / c.size();
      }
    }
  return kGuardSpacings * spacing;
}

int Domain::winding_number(int c, Complex p) const {
  return static_cast<int>(std::lround(polygon_winding(impl_->curves[c].pos, p)));
}

std::uintptr_t Domain::grid_id() const {
  return reinterpret_cast<std::uintptr_t>(impl_.get());
}

Domain make_circle_domain(const std::vector<Complex>& centers,
                          const std::vector<double>& radii, int samples) {
  if (centers.empty() || centers.size() != radii.size())
    throw GeometryError("centers and radii must be non-empty and equal-length");
  const int n = static_cast<int>(centers.size());
  for (double r : radii)
    if (!(r > 0.0)) throw GeometryError("radii must be positive");
  for (int k = 1; k < n; ++k) {
    if (std::abs(centers[k] - centers[0]) + radii[k] >= radii[0])
      throw GeometryError("hole is not inside the outer circle");
    for (int j = 1; j < k; ++j)
      if (std::abs(centers[k] - centers[j]) <= radii[k] + radii[j])
        throw GeometryError("holes overlap");
  }

  std::vector<ParamCurve> curves;
  // outer circle counterclockwise
  curves.push_back(ParamCurve::sample(
      [&](double t) { return centers[0] + radii[0] * std::polar(1.0, kTwoPi * t); },
      [&](double t) {
        return radii[0] * kTwoPi * kImagUnit * std::polar(1.0, kTwoPi * t);
      },
      samples));
  // holes clockwise
  for (int k = 1; k < n; ++k) {
    curves.push_back(ParamCurve::sample(
        [&](double t) { return centers[k] + radii[k] * std::polar(1.0, -kTwoPi * t); },
        [&](double t) {
          return -radii[k] * kTwoPi * kImagUnit * std::polar(1.0, -kTwoPi * t);
        },
        samples));
  }

  std::vector<ParamCurve> ordered;
  for (int k = 1; k < n; ++k) ordered.push_back(curves[k]);
  ordered.push_back(curves[0]);
  return Domain(std::move(ordered), n - 1);
}

int auto_samples_for_ar(double r) {
  // Fourier coefficients of the root branches decay like (2/r)^k; pick the
  // smallest power of two with a ~1e-9 derivative tail.
  int m = 256;
  while (kPi * m * std::pow(2.0 / r, m / 2) > 1e-9 && m < (1 << 14)) m *= 2;
  return m;
}

Domain make_ar_domain(double r, int samples) {
  if (!(r > 2.0)) throw GeometryError("pinched or disconnected boundary: r must exceed 2");
  const int m = (samples == 0) ? auto_samples_for_ar(r) : samples;
  if (!is_power_of_two(m) || m < 32)
    throw GeometryError("curve sample count must be a power of two >= 32");

  // Roots of z^2 - r e^{i theta} z + 1 = 0 with a continuous square-root
  // branch; the two roots multiply to 1, so the inner branch is 1/outer.
  CVector disc_root(m);
  Complex prev = std::sqrt(Complex(r * r - 4.0, 0.0));
  for (int k = 0; k < m; ++k) {
    double theta = kTwoPi * k / m;
    Complex rad = r * r * std::polar(1.0, 2.0 * theta) - 4.0;
    Complex w = std::sqrt(rad);
    if (std::abs(w - prev) > std::abs(w + prev)) w = -w;
    disc_root[k] = w;
    prev = w;
  }

  ParamCurve outer, inner;
  outer.pos.resize(m);
  outer.deriv.resize(m);
  inner.pos.resize(m);
  inner.deriv.resize(m);
  for (int k = 0; k < m; ++k) {
    double theta = kTwoPi * k / m;
    Complex e = std::polar(1.0, theta);
    Complex w = disc_root[k];
    Complex zo = 0.5 * (r * e + w);
    Complex zi = 0.5 * (r * e - w);
    outer.pos[k] = zo;
    inner.pos[k] = zi;
    // implicit differentiation: z'(theta) = i r e^{i theta} z / (2z - r e^{i theta})
    outer.deriv[k] = kTwoPi * (kImagUnit * r * e * zo / w);
    inner.deriv[k] = kTwoPi * (kImagUnit * r * e * zi / (-w));
  }

  return Domain({std::move(inner), std::move(outer)}, 1);
}

CVector unit_tangent(const Domain& domain, int curve_index) {
  if (curve_index < 0 || curve_index >= domain.connectivity())
    throw Error("curve index out of range");
  const ParamCurve& c = domain.curves()[curve_index];
  CVector t(c.size());
  for (int k = 0; k < c.size(); ++k) t[k] = c.deriv[k] / std::abs(c.deriv[k]);
  return t;
}

std::vector<Complex> interior_points(const Domain& domain, int count,
                                     double margin,
                                     const std::vector<Complex>& avoid,
                                     double avoid_distance) {
  // bounding box of the outer curve
  const ParamCurve& outer = domain.curves()[domain.outer_index()];
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (int k = 0; k < outer.size(); ++k) {
    xlo = std::min(xlo, outer.pos[k].real());
    xhi = std::max(xhi, outer.pos[k].real());
    ylo = std::min(ylo, outer.pos[k].imag());
    yhi = std::max(yhi, outer.pos[k].imag());
  }

  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    for (int i = index; i > 0; i /= base) {
      f /= base;
      r += f * (i % base);
    }
    return r;
  };

  const double diameter = std::abs(Complex(xhi - xlo, yhi - ylo));
  double sep = diameter /
               (2.0 * std::sqrt(static_cast<double>(std::max(count, 1))) + 1.0);
  // retry with smaller separations when the admissible region is thin
  for (; sep > 1e-4 * diameter; sep *= 0.5) {
    std::vector<Complex> pts;
    for (int i = 1; static_cast<int>(pts.size()) < count && i < 60000; ++i) {
      Complex p{xlo + (xhi - xlo) * halton(i, 2),
                ylo + (yhi - ylo) * halton(i, 3)};
      if (domain.boundary_distance(p) < std::max(margin, 1e-6)) continue;
      bool ok = true;
      try {
        ok = domain.contains(p);
      } catch (const GuardError&) {
        ok = false;
      }
      if (!ok) continue;
      for (Complex a : avoid)
        if (std::abs(p - a) < avoid_distance) {
          ok = false;
          break;
        }
      if (!ok) continue;
      for (Complex q : pts)
        if (std::abs(p - q) < sep) {
          ok = false;
          break;
        }
      if (ok) pts.push_back(p);
    }
    if (static_cast<int>(pts.size()) == count) return pts;
  }
  throw Error("could not place the requested number of interior points");
}

double probe_margin(const Domain& domain) {
  double spacing = 0.0;
  for (const auto& c : domain.curves())
    spacing = std::max(spacing, c.deriv.cwiseAbs().maxCoeff() / c.size());
  return std::max(0.15, 1.3 * kGuardSpacings * spacing);
}

Domain domain_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  std::string type = j.at("type").get<std::string>();
  if (type == "circles") {
    std::vector<Complex> centers;
    for (auto& c : j.at("centers"))
      centers.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
    std::vector<double> radii = j.at("radii").get<std::vector<double>>();
    int m = j.value("M", 256);
    return make_circle_domain(centers, radii, m);
  }
  if (type == "ar") {
    double r = j.at("r").get<double>();
    int m = j.value("M", 0);
    return make_ar_domain(r, m);
  }
  throw GeometryError("unknown domain type: " + type);
}

}  // namespace kernelsmith
