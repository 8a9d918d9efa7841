#include "kernelsmith/potential.hpp"

#include <cmath>

#include "kernelsmith/fft.hpp"

namespace kernelsmith {

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int k = 2; k <= m; ++k) f *= k;
  return f;
}

std::pair<double, double> cache_key(Complex w) { return {w.real(), w.imag()}; }

}  // namespace

Complex LayerPotential::value(Complex z) const {
  const Domain& d = density.domain;
  Complex acc{0.0, 0.0};
  for (int k = 0; k < density.size(); ++k) {
    double kern = std::imag(d.dpoint(k) / (d.point(k) - z));
    acc += density.values[k] * (kern / d.curves()[d.curve_of(k)].size());
  }
  acc /= kTwoPi;
  for (size_t k = 0; k < log_sources.size(); ++k)
    acc += log_coeffs[k] * std::log(std::abs(z - log_sources[k]));
  return acc;
}

Complex LayerPotential::dz(Complex z) const {
  Complex acc{0.0, 0.0};
  const Domain& d = density.domain;
  for (int k = 0; k < density.size(); ++k) {
    Complex dzk = d.point(k) - z;
    acc += density.values[k] * d.dz_weight(k) / (dzk * dzk);
  }
  acc /= (kTwoPi * kImagUnit);
  for (size_t k = 0; k < log_sources.size(); ++k)
    acc += log_coeffs[k] / (z - log_sources[k]);
  return 0.5 * acc;
}

Complex LayerPotential::boundary_value(int curve, double t) const {
  const Domain& d = density.domain;
  const int off = d.curve_offset(curve);
  const int m = d.curves()[curve].size();
  CVector pos_hat = fft_forward(d.curves()[curve].pos);
  CVector dens_hat = fft_forward(density.values.segment(off, m));
  const Complex x = trig_interpolate(pos_hat, t);
  const Complex nu_x = trig_interpolate(dens_hat, t);

  // inside limit: subtract the density value; the total winding about an
  // interior point is 1, which restores nu(x).
  Complex acc{0.0, 0.0};
  for (int k = 0; k < density.size(); ++k) {
    double kern = std::imag(d.dpoint(k) / (d.point(k) - x));
    acc += (density.values[k] - nu_x) * (kern / d.curves()[d.curve_of(k)].size());
  }
  acc = acc / kTwoPi + nu_x;
  for (size_t k = 0; k < log_sources.size(); ++k)
    acc += log_coeffs[k] * std::log(std::abs(x - log_sources[k]));
  return acc;
}

Complex LayerPotential::boundary_dz(int node) const {
  const Domain& d = density.domain;
  Complex w_in = cauchy_derivative_trace_inside(density, node);
  Complex acc = w_in;
  Complex x = d.point(node);
  for (size_t k = 0; k < log_sources.size(); ++k)
    acc += log_coeffs[k] / (x - log_sources[k]);
  return 0.5 * acc;
}

DirichletSolver::DirichletSolver(Domain domain) : domain_(std::move(domain)) {
  const int n = domain_.connectivity();
  const int total = domain_.total_samples();
  for (int c = 0; c < n; ++c) {
    if (c == domain_.outer_index()) continue;
    hole_curves_.push_back(c);
    log_sources_.push_back(domain_.curves()[c].pos.mean());
  }
  const int holes = static_cast<int>(hole_curves_.size());

  RMatrix system = RMatrix::Zero(total + holes, total + holes);
  for (int i = 0; i < total; ++i) {
    Complex zi = domain_.point(i);
    for (int j = 0; j < total; ++j) {
      double kern;
      if (j == i) {
        // removable diagonal of the double-layer kernel
        kern = std::imag(domain_.ddpoint(i) / (2.0 * domain_.dpoint(i)));
      } else {
        kern = std::imag(domain_.dpoint(j) / (domain_.point(j) - zi));
      }
      system(i, j) = kern / (kTwoPi * domain_.curves()[domain_.curve_of(j)].size());
    }
    system(i, i) += 0.5;
    for (int k = 0; k < holes; ++k)
      system(i, total + k) = std::log(std::abs(zi - log_sources_[k]));
  }
  // zero-mean side conditions on the hole densities
  for (int k = 0; k < holes; ++k) {
    int c = hole_curves_[k];
    int off = domain_.curve_offset(c);
    int m = domain_.curves()[c].size();
    for (int j = 0; j < m; ++j)
      system(total + k, off + j) = domain_.ds_weight(off + j);
  }

  lu_.compute(system);
  RVector probe = RVector::Zero(total + holes);
  probe[0] = 1.0;
  if (!lu_.solve(probe).allFinite())
    throw ResolutionError("Dirichlet collocation matrix is singular");
}

LayerPotential DirichletSolver::solve(const CVector& boundary_data) const {
  const int total = domain_.total_samples();
  const int holes = static_cast<int>(hole_curves_.size());
  if (static_cast<int>(boundary_data.size()) != total)
    throw Error("boundary data length does not match the grid");

  RVector rhs_re = RVector::Zero(total + holes);
  RVector rhs_im = RVector::Zero(total + holes);
  for (int i = 0; i < total; ++i) {
    rhs_re[i] = boundary_data[i].real();
    rhs_im[i] = boundary_data[i].imag();
  }
  RVector sol_re = lu_.solve(rhs_re);
  RVector sol_im = lu_.solve(rhs_im);

  CVector dens(total);
  for (int i = 0; i < total; ++i) dens[i] = Complex{sol_re[i], sol_im[i]};
  CVector logc(holes);
  for (int k = 0; k < holes; ++k)
    logc[k] = Complex{sol_re[total + k], sol_im[total + k]};

  return LayerPotential{BoundaryField(domain_, std::move(dens)), std::move(logc),
                        log_sources_};
}

LayerPotential DirichletSolver::solve_real(const RVector& boundary_data) const {
  CVector data(boundary_data.size());
  for (int i = 0; i < boundary_data.size(); ++i) data[i] = boundary_data[i];
  return solve(data);
}

namespace {

LayerPotential solve_harmonic_measure(const DirichletSolver& solver, int j) {
  const Domain& d = solver.domain();
  if (j < 1 || j > d.connectivity() - 1)
    throw Error("harmonic measure index must address an inner curve");
  // the j-th curve among the holes
  int c = j - 1;
  if (c >= d.outer_index()) ++c;
  RVector data = RVector::Zero(d.total_samples());
  int off = d.curve_offset(c);
  int m = d.curves()[c].size();
  for (int k = 0; k < m; ++k) data[off + k] = 1.0;
  return solver.solve_real(data);
}

}  // namespace

HarmonicMeasure::HarmonicMeasure(std::shared_ptr<const DirichletSolver> solver,
                                 int j)
    : pot_(solve_harmonic_measure(*solver, j)) {}

double HarmonicMeasure::operator()(Complex z) const {
  return pot_.value(z).real();
}

FPrimeEvaluator::FPrimeEvaluator(std::shared_ptr<const DirichletSolver> solver,
                                 int j)
    : solver_(solver), pot_(HarmonicMeasure(solver, j).potential()) {}

Complex FPrimeEvaluator::operator()(Complex z) const { return 2.0 * pot_.dz(z); }

Complex FPrimeEvaluator::boundary(int node) const {
  return 2.0 * pot_.boundary_dz(node);
}

Complex FPrimeEvaluator::period(int curve) const {
  const Domain& d = solver_->domain();
  int off = d.curve_offset(curve);
  int m = d.curves()[curve].size();
  Complex acc{0.0, 0.0};
  for (int k = 0; k < m; ++k) acc += boundary(off + k) * d.dz_weight(off + k);
  return acc;
}

GreenFunction::GreenFunction(std::shared_ptr<const DirichletSolver> solver)
    : solver_(std::move(solver)) {}

const LayerPotential& GreenFunction::regular_part(Complex w) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto key = cache_key(w);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const Domain& d = solver_->domain();
  RVector data(d.total_samples());
  for (int k = 0; k < d.total_samples(); ++k)
    data[k] = std::log(std::abs(d.point(k) - w));
  auto [pos, inserted] = cache_.emplace(key, solver_->solve_real(data));
  return pos->second;
}

double GreenFunction::operator()(Complex z, Complex w) const {
  const Domain& d = solver_->domain();
  if (d.boundary_distance(w) < d.guard_distance(w))
    throw GuardError("Green pole within the guard distance of the boundary");
  if (std::abs(z - w) < 1e-9) throw GuardError("Green's function diagonal");
  return -std::log(std::abs(z - w)) + regular_part(w).value(z).real();
}

BergmanKernel::BergmanKernel(std::shared_ptr<const DirichletSolver> solver,
                             int order)
    : solver_(std::move(solver)), order_(order) {
  if (order_ < 0 || order_ > 2) throw Error("kernel derivative order must be <= 2");
}

const LayerPotential& BergmanKernel::potential_for(Complex w) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto key = cache_key(w);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  const Domain& d = solver_->domain();
  if (d.boundary_distance(w) < d.guard_distance(w))
    throw GuardError("kernel base point within the guard distance of the boundary");
  // data = d^(m+1)/d wbar^(m+1) ln|zeta - w| = -m!/2 (conj(zeta - w))^-(m+1)
  CVector data(d.total_samples());
  const double c = -0.5 * factorial(order_);
  for (int k = 0; k < d.total_samples(); ++k)
    data[k] = c / std::pow(std::conj(d.point(k) - w), order_ + 1);
  auto [pos, inserted] = cache_.emplace(key, solver_->solve(data));
  return pos->second;
}

Complex BergmanKernel::operator()(Complex z, Complex w) const {
  return -(2.0 / kPi) * potential_for(w).dz(z);
}

BoundaryField BergmanKernel::boundary_trace(Complex w) const {
  const LayerPotential& pot = potential_for(w);
  const Domain& d = solver_->domain();
  CVector out(d.total_samples());
  for (int k = 0; k < d.total_samples(); ++k)
    out[k] = -(2.0 / kPi) * pot.boundary_dz(k);
  return BoundaryField(d, std::move(out));
}

LambdaKernel::LambdaKernel(std::shared_ptr<const DirichletSolver> solver,
                           int order)
    : solver_(std::move(solver)), order_(order) {
  if (order_ < 0 || order_ > 2) throw Error("kernel derivative order must be <= 2");
}

const LayerPotential& LambdaKernel::potential_for(Complex w) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto key = cache_key(w);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  const Domain& d = solver_->domain();
  if (d.boundary_distance(w) < d.guard_distance(w))
    throw GuardError("kernel base point within the guard distance of the boundary");
  // data = d^(m+1)/d w^(m+1) ln|zeta - w| = -m!/2 (zeta - w)^-(m+1)
  CVector data(d.total_samples());
  const double c = -0.5 * factorial(order_);
  for (int k = 0; k < d.total_samples(); ++k)
    data[k] = c / std::pow(d.point(k) - w, order_ + 1);
  auto [pos, inserted] = cache_.emplace(key, solver_->solve(data));
  return pos->second;
}

Complex LambdaKernel::operator()(Complex z, Complex w) const {
  if (std::abs(z - w) < 1e-3)
    throw GuardError("Lambda kernel evaluated too close to its diagonal");
  Complex pole = factorial(order_ + 1) / (kPi * std::pow(z - w, order_ + 2));
  return pole - (2.0 / kPi) * potential_for(w).dz(z);
}

BoundaryField LambdaKernel::boundary_trace(Complex w) const {
  const LayerPotential& pot = potential_for(w);
  const Domain& d = solver_->domain();
  CVector out(d.total_samples());
  for (int k = 0; k < d.total_samples(); ++k) {
    Complex z = d.point(k);
    Complex pole = factorial(order_ + 1) / (kPi * std::pow(z - w, order_ + 2));
    out[k] = pole - (2.0 / kPi) * pot.boundary_dz(k);
  }
  return BoundaryField(d, std::move(out));
}

double modulus(const Domain& domain) {
  if (domain.connectivity() != 2)
    throw Error("modulus is defined for 2-connected domains only");
  auto solver = std::make_shared<const DirichletSolver>(domain);
  FPrimeEvaluator f1(solver, 1);
  Complex period = f1.period(domain.outer_index());
  return kTwoPi / std::abs(period);
}

}  // namespace kernelsmith
