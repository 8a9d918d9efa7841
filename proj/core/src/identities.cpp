#include "kernelsmith/identities.hpp"

#include <algorithm>
#include <cmath>

namespace kernelsmith {

namespace {

std::pair<double, double> key_of(Complex w) { return {w.real(), w.imag()}; }

// Complex least squares, returning the stacked solution and the maximum
// absolute row residual.
CVector solve_least_squares(const CMatrix& design, const CVector& rhs,
                            double* max_residual) {
  if (design.cols() == 0) {
    if (max_residual) *max_residual = rhs.size() ? rhs.cwiseAbs().maxCoeff() : 0.0;
    return CVector();
  }
  Eigen::JacobiSVD<CMatrix> svd(design,
                                Eigen::ComputeThinU | Eigen::ComputeThinV);
  CVector x = svd.solve(rhs);
  if (max_residual) {
    CVector r = design * x - rhs;
    *max_residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  }
  return x;
}

}  // namespace

KernelContext::KernelContext(Domain domain)
    : domain_(domain),
      szego_(std::make_shared<SzegoSolver>(domain)),
      dirichlet_(std::make_shared<const DirichletSolver>(domain)) {}

const SzegoSolution& KernelContext::solution_at(Complex base) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto key = key_of(base);
  auto it = solutions_.find(key);
  if (it != solutions_.end()) return it->second;
  auto [pos, inserted] = solutions_.emplace(key, szego_->solve(base));
  return pos->second;
}

Complex KernelContext::S(Complex z, Complex w) const {
  return solution_at(w).szego_at(z);
}

Complex KernelContext::L(Complex z, Complex w) const {
  return solution_at(w).garabedian_at(z);
}

const AhlforsMap& KernelContext::ahlfors(Complex base) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto key = key_of(base);
  auto it = ahlfors_.find(key);
  if (it != ahlfors_.end()) return it->second;
  auto [pos, inserted] = ahlfors_.emplace(key, szego_->ahlfors(base));
  return pos->second;
}

BergmanKernel& KernelContext::K(int order) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!bergman_[order])
    bergman_[order] = std::make_shared<BergmanKernel>(dirichlet_, order);
  return *bergman_[order];
}

LambdaKernel& KernelContext::Lam(int order) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!lambda_[order])
    lambda_[order] = std::make_shared<LambdaKernel>(dirichlet_, order);
  return *lambda_[order];
}

GreenFunction& KernelContext::green() const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!green_) green_ = std::make_shared<GreenFunction>(dirichlet_);
  return *green_;
}

FPrimeEvaluator& KernelContext::f_prime(int j) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = fprime_.find(j);
  if (it == fprime_.end())
    it = fprime_.emplace(j, std::make_shared<FPrimeEvaluator>(dirichlet_, j)).first;
  return *it->second;
}

int GeneratorSet::point_index(Complex alpha) const {
  for (size_t i = 0; i < points.size(); ++i)
    if (std::abs(points[i] - alpha) < 1e-5) return static_cast<int>(i);
  throw Error("point is not a member of the generator set");
}

Complex GeneratorSet::table_value(int point, int order, Complex z) const {
  return cauchy_interior(tables[point][order], z);
}

ProperMapCombo build_proper_map_combo(const KernelContext& ctx, Complex base) {
  const AhlforsMap& f = ctx.ahlfors(base);
  const SzegoSolution& sol = ctx.solution_at(base);
  ZeroFindResult zr = ctx.szego().szego_zeros(sol);

  ProperMapCombo combo;
  combo.base = base;
  combo.zeros.push_back(base);
  for (Complex z : zr.zeros) combo.zeros.push_back(z);

  BoundaryField f2 = boundary_derivative(f.boundary_deriv);
  for (Complex zk : combo.zeros) {
    Complex fp = cauchy_interior(f.boundary_deriv, zk);
    Complex fpp = cauchy_interior(f2, zk);
    if (std::abs(fp) < 1e-10)
      throw Error("proper map has a branch point at one of its zeros");
    combo.phi1.push_back(1.0 / fp);
    combo.phi2.push_back(-fpp / (fp * fp * fp));
  }
  return combo;
}

GeneratorSet build_generator_set(const KernelContext& ctx, Complex a) {
  const int n = ctx.domain().connectivity();
  GeneratorSet gen;
  gen.base = a;

  const SzegoSolution& sol = ctx.solution_at(a);
  ZeroFindResult zr = ctx.szego().szego_zeros(sol);
  if (zr.clustered)
    throw Error("zeros of S(.,a) are clustered; move the base point");
  gen.zeros = zr.zeros;

  gen.points.push_back(a);
  auto add_point = [&](Complex p) {
    for (Complex q : gen.points)
      if (std::abs(p - q) < 1e-6) return;
    gen.points.push_back(p);
  };
  for (Complex ak : gen.zeros) add_point(ak);
  for (Complex ak : gen.zeros) {
    const SzegoSolution& solk = ctx.solution_at(ak);
    ZeroFindResult zk = ctx.szego().szego_zeros(solk);
    if (zk.clustered)
      throw Error("zeros of S(.,a_k) are clustered; move the base point");
    for (Complex p : zk.zeros) add_point(p);
  }
  const int cap = n * n - 2 * n + 2;
  if (static_cast<int>(gen.points.size()) > cap)
    throw Error("generator set exceeds its size bound");

  for (Complex alpha : gen.points) {
    std::array<BoundaryField, 3> row = {ctx.K(0).boundary_trace(alpha),
                                        ctx.K(1).boundary_trace(alpha),
                                        ctx.K(2).boundary_trace(alpha)};
    gen.tables.push_back(std::move(row));
  }

  std::vector<Complex> bases;
  bases.push_back(a);
  for (Complex ak : gen.zeros) bases.push_back(ak);
  for (Complex b : bases) {
    ProperMapCombo combo = build_proper_map_combo(ctx, b);
    for (Complex zk : combo.zeros)
      combo.point_index.push_back(gen.point_index(zk));
    gen.combos.push_back(std::move(combo));
  }
  return gen;
}

SzegoExpansion build_szego_expansion(const KernelContext& ctx,
                                     const GeneratorSet& gen) {
  SzegoExpansion exp;
  Complex saa = ctx.S(gen.base, gen.base);
  exp.c0 = 1.0 / saa.real();
  const int m = static_cast<int>(gen.zeros.size());
  CMatrix s(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) s(j, k) = ctx.S(gen.zeros[j], gen.zeros[k]);
  if (m > 0) {
    Eigen::JacobiSVD<CMatrix> svd(s);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    if (smin <= 1e-10 * std::max(smax, 1.0))
      throw ResolutionError("[S(a_j,a_k)] is singular to working precision");
    exp.c = s.inverse();
  }
  return exp;
}

Complex szego_from_generators(const KernelContext& ctx, const GeneratorSet& gen,
                              const SzegoExpansion& exp, Complex z, Complex w) {
  const AhlforsMap& f = ctx.ahlfors(gen.base);
  Complex fz = f.value(z);
  Complex fw = f.value(w);
  Complex denom = 1.0 - fz * std::conj(fw);
  if (std::abs(denom) < 1e-8)
    throw GuardError("Szego expansion denominator is near-singular");

  Complex acc = exp.c0 * ctx.S(z, gen.base) * std::conj(ctx.S(w, gen.base));
  const int m = static_cast<int>(gen.zeros.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      acc += exp.c(i, j) * ctx.S(z, gen.zeros[i]) *
             std::conj(ctx.S(w, gen.zeros[j]));
  return acc / denom;
}

Complex garabedian_from_generators(const KernelContext& ctx,
                                   const GeneratorSet& gen,
                                   const SzegoExpansion& exp, Complex z,
                                   Complex w) {
  const AhlforsMap& f = ctx.ahlfors(gen.base);
  Complex fz = f.value(z);
  Complex fw = f.value(w);
  if (std::abs(fz - fw) < 1e-8)
    throw GuardError("Garabedian expansion evaluated at an Ahlfors collision");

  Complex acc = exp.c0 * ctx.S(z, gen.base) * ctx.L(w, gen.base);
  const int m = static_cast<int>(gen.zeros.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      acc += exp.c(i, j) * ctx.S(z, gen.zeros[i]) * ctx.L(w, gen.zeros[j]);
  return acc * fw / (fz - fw);
}

BergmanExpansion fit_expansions(const KernelContext& ctx,
                                const GeneratorSet& gen,
                                const std::vector<Complex>& probes) {
  const int g = static_cast<int>(probes.size());
  const int m = static_cast<int>(gen.zeros.size());
  BergmanExpansion exp;

  // one-variable tables over the probes
  CMatrix schiffer(g, std::max(m, 1));
  std::vector<CVector> fprime(m, CVector(g));
  for (int s = 0; s < g; ++s) {
    Complex sa = ctx.S(probes[s], gen.base);
    for (int i = 0; i < m; ++i)
      schiffer(s, i) = ctx.L(probes[s], gen.zeros[i]) * sa;
  }
  for (int i = 0; i < m; ++i)
    for (int s = 0; s < g; ++s) fprime[i][s] = ctx.f_prime(i + 1)(probes[s]);

  CMatrix y(g, g);
  double scale = 0.0;
  for (int s = 0; s < g; ++s)
    for (int t = 0; t < g; ++t) {
      Complex k = ctx.K(0)(probes[s], probes[t]);
      Complex sv = ctx.S(probes[s], probes[t]);
      y(s, t) = k - 4.0 * kPi * sv * sv;
      scale = std::max(scale, std::abs(k));
    }
  exp.scale = std::max(scale, 1e-30);

  // K - 4 pi S^2 against F_i'(z) conj(F_j'(w)) and against the Schiffer basis
  if (m == 0) {
    exp.residual_A = exp.residual_lambda = y.cwiseAbs().maxCoeff();
  } else {
    CMatrix design_a(g * g, m * m), design_l(g * g, m * m);
    CVector rhs(g * g);
    for (int s = 0; s < g; ++s)
      for (int t = 0; t < g; ++t) {
        int row = s * g + t;
        rhs[row] = y(s, t);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) {
            design_a(row, i * m + j) = fprime[i][s] * std::conj(fprime[j][t]);
            design_l(row, i * m + j) =
                schiffer(s, i) * std::conj(schiffer(t, j));
          }
      }
    CVector av = solve_least_squares(design_a, rhs, &exp.residual_A);
    CVector lv = solve_least_squares(design_l, rhs, &exp.residual_lambda);
    exp.A.resize(m, m);
    exp.lambda.resize(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        exp.A(i, j) = av[i * m + j];
        exp.lambda(i, j) = lv[i * m + j];
      }
  }

  // Lambda(w,z) - 4 pi L(w,z)^2 against L_i(z) L_j(w), off-diagonal pairs
  {
    std::vector<std::pair<int, int>> rows;
    for (int s = 0; s < g; ++s)
      for (int t = 0; t < g; ++t)
        if (std::abs(probes[s] - probes[t]) > 5e-2) rows.emplace_back(s, t);
    CMatrix design(rows.size(), std::max(m * m, 0));
    CVector rhs(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      auto [s, t] = rows[r];
      Complex lam = ctx.Lam(0)(probes[s], probes[t]);
      Complex lwz = ctx.L(probes[t], probes[s]);
      rhs[r] = lam - 4.0 * kPi * lwz * lwz;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          design(r, i * m + j) = schiffer(s, i) * schiffer(t, j);
    }
    CVector mv = solve_least_squares(design, rhs, &exp.residual_mu);
    if (m > 0) {
      exp.mu.resize(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) exp.mu(i, j) = mv[i * m + j];
    }
  }

  // scalar data at the zeros
  exp.q.resize(m);
  exp.l_at_base.resize(m);
  exp.beta.resize(m, m);
  const SzegoSolution& sol_a = ctx.solution_at(gen.base);
  BoundaryField s_deriv = boundary_derivative(sol_a.s_boundary);
  Complex saa = ctx.S(gen.base, gen.base);
  for (int k = 0; k < m; ++k) {
    exp.q[k] = cauchy_interior(s_deriv, gen.zeros[k]) / kTwoPi;
    if (std::abs(exp.q[k]) < 1e-12)
      throw Error("Schiffer basis is degenerate: a zero of S(.,a) is not simple");
    exp.l_at_base[k] = ctx.L(gen.base, gen.zeros[k]) * saa;
  }
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k)
      exp.beta(i, k) = ctx.S(gen.zeros[k], gen.zeros[i]) *
                       ctx.L(gen.zeros[k], gen.base) / exp.q[k];

  if (m > 0) {
    Eigen::JacobiSVD<CMatrix> svd(exp.lambda);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    if (smin <= 1e-8 * smax)
      throw ResolutionError("lambda matrix is singular: basis degeneracy");
  }
  return exp;
}

std::vector<CheckRecord> check_boundary_identities(
    const KernelContext& ctx, const GeneratorSet& gen,
    const std::vector<Complex>& w_probes) {
  const Domain& d = ctx.domain();
  const int total = d.total_samples();
  std::vector<CheckRecord> records;
  std::string grid =
      "full boundary grid x " + std::to_string(w_probes.size()) + " probes";

  for (int order = 0; order <= 2; ++order) {
    double worst = 0.0;
    for (Complex w : w_probes) {
      BoundaryField tk = ctx.K(order).boundary_trace(w);
      BoundaryField tl = ctx.Lam(order).boundary_trace(w);
      double scale =
          std::max({tk.max_abs(), tl.max_abs(), 1e-30});
      for (int k = 0; k < total; ++k) {
        Complex t = d.tangent(k);
        Complex res = tk.values[k] * t + std::conj(tl.values[k] * t);
        worst = std::max(worst, std::abs(res) / scale);
      }
    }
    records.push_back(make_check("boundary-kernel-identity-m" + std::to_string(order),
                                 grid, worst, 1e-6));
  }

  const AhlforsMap& f = ctx.ahlfors(gen.base);
  {
    double worst = 0.0;
    double scale = 0.0;
    for (int k = 0; k < total; ++k)
      scale = std::max(scale,
                       std::abs(f.boundary_deriv.values[k] / f.boundary.values[k]));
    for (int k = 0; k < total; ++k) {
      Complex t = d.tangent(k);
      Complex q = f.boundary_deriv.values[k] * t / f.boundary.values[k];
      worst = std::max(worst, std::abs(q + std::conj(q)) / scale);
    }
    records.push_back(
        make_check("boundary-log-derivative", "full boundary grid", worst, 1e-6));
  }

  {
    double worst = 0.0;
    for (Complex w : w_probes) {
      BoundaryField tk = ctx.K(0).boundary_trace(w);
      BoundaryField tl = ctx.Lam(0).boundary_trace(w);
      double scale = std::max({tk.max_abs(), tl.max_abs(), 1e-30});
      for (int k = 0; k < total; ++k) {
        Complex ratio = f.boundary.values[k] / f.boundary_deriv.values[k];
        Complex lhs = ratio * tk.values[k];
        Complex rhs = std::conj(ratio * tl.values[k]);
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
      }
    }
    records.push_back(make_check("boundary-double-matching", grid, worst, 1e-6));
  }
  return records;
}

std::vector<CheckRecord> proper_map_expansion(const KernelContext& ctx,
                                              Complex base,
                                              const std::vector<Complex>& probes) {
  ProperMapCombo combo = build_proper_map_combo(ctx, base);
  const AhlforsMap& f = ctx.ahlfors(base);

  double worst_fp = 0.0, worst_ffp = 0.0, scale_fp = 0.0, scale_ffp = 0.0;
  for (Complex z : probes) {
    Complex fp_direct = f.derivative(z);
    Complex ffp_direct = f.value(z) * fp_direct;

    Complex fp{0.0, 0.0}, ffp{0.0, 0.0};
    for (size_t k = 0; k < combo.zeros.size(); ++k) {
      Complex k0 = ctx.K(0)(z, combo.zeros[k]);
      Complex k1 = ctx.K(1)(z, combo.zeros[k]);
      fp += kPi * k0 * std::conj(combo.phi1[k]);
      ffp += 0.5 * kPi *
             (k1 * std::conj(combo.phi1[k] * combo.phi1[k]) +
              k0 * std::conj(combo.phi2[k]));
    }
    worst_fp = std::max(worst_fp, std::abs(fp - fp_direct));
    worst_ffp = std::max(worst_ffp, std::abs(ffp - ffp_direct));
    scale_fp = std::max(scale_fp, std::abs(fp_direct));
    scale_ffp = std::max(scale_ffp, std::abs(ffp_direct));
  }
  std::string grid = std::to_string(probes.size()) + " interior probes";
  return {make_check("proper-map-derivative-expansion", grid,
                     worst_fp / std::max(scale_fp, 1e-30), 1e-6),
          make_check("proper-map-product-expansion", grid,
                     worst_ffp / std::max(scale_ffp, 1e-30), 1e-6)};
}

CheckRecord green_factorization_check(const KernelContext& ctx, Complex base,
                                      const std::vector<Complex>& probes) {
  const AhlforsMap& f = ctx.ahlfors(base);
  const SzegoSolution& sol = ctx.solution_at(base);
  ZeroFindResult zr = ctx.szego().szego_zeros(sol);
  GreenFunction& green = ctx.green();

  double worst = 0.0;
  for (Complex z : probes) {
    double lhs = std::log(std::abs(f.value(z)));
    double sum = green(z, base);
    for (Complex ak : zr.zeros) sum += green(z, ak);
    worst = std::max(worst, std::abs(lhs + sum));
  }
  return make_check("green-factorization",
                    std::to_string(probes.size()) + " interior probes", worst,
                    1e-7);
}

ReconstructedBergman::ReconstructedBergman(const GeneratorSet& gen,
                                           const SzegoExpansion& sz,
                                           const BergmanExpansion& exp)
    : gen_(gen), sz_(sz), exp_(exp) {}

Complex ReconstructedBergman::proper_map_value(const ProperMapCombo& combo,
                                               Complex z) const {
  Complex fp{0.0, 0.0}, ffp{0.0, 0.0};
  for (size_t k = 0; k < combo.zeros.size(); ++k) {
    int idx = combo.point_index[k];
    Complex k0 = cauchy_interior(gen_.tables[idx][0], z);
    Complex k1 = cauchy_interior(gen_.tables[idx][1], z);
    fp += kPi * k0 * std::conj(combo.phi1[k]);
    ffp += 0.5 * kPi *
           (k1 * std::conj(combo.phi1[k] * combo.phi1[k]) +
            k0 * std::conj(combo.phi2[k]));
  }
  if (std::abs(fp) < 1e-12) {
    ++skipped_;
    throw GuardError("proper-map combination is degenerate at this probe");
  }
  return ffp / fp;
}

Complex ReconstructedBergman::lambda_from_table(int point, Complex z) const {
  // boundary trace of Lambda(alpha, .) from the conjugated kernel identity,
  // then the Cauchy integral of the pole-subtracted trace
  const BoundaryField& ktab = gen_.tables[point][0];
  const Domain& d = ktab.domain;
  const Complex alpha = gen_.points[point];
  CVector vals(d.total_samples());
  for (int k = 0; k < d.total_samples(); ++k) {
    Complex t = d.tangent(k);
    Complex zeta = d.point(k);
    Complex lam = -std::conj(ktab.values[k] * t) / t;
    vals[k] = lam - 1.0 / (kPi * (zeta - alpha) * (zeta - alpha));
  }
  Complex reg = cauchy_interior(BoundaryField(d, std::move(vals)), z);
  return reg + 1.0 / (kPi * (z - alpha) * (z - alpha));
}

ReconstructedBergman::OneVariable ReconstructedBergman::assemble(Complex z) const {
  const int m = static_cast<int>(gen_.zeros.size());
  OneVariable out;
  out.f_base = proper_map_value(gen_.combos[0], z);

  CVector b(m);
  CMatrix a(std::max(m, 1), std::max(m, 1));
  for (int k = 0; k < m; ++k) {
    Complex fk = proper_map_value(gen_.combos[k + 1], z);
    Complex fk2 = fk * fk;
    int idx_k = gen_.point_index(gen_.zeros[k]);
    b[k] = cauchy_interior(gen_.tables[idx_k][0], z) -
           fk2 * lambda_from_table(idx_k, z);
    for (int i = 0; i < m; ++i)
      a(i, k) = exp_.lambda(i, k) * std::conj(exp_.q[k]) -
                exp_.mu(i, k) * exp_.q[k] * fk2;
  }

  out.schiffer.resize(m);
  if (m == 1) {
    if (std::abs(a(0, 0)) < 1e-10 * (std::abs(exp_.lambda(0, 0) * exp_.q[0]) +
                                     std::abs(exp_.mu(0, 0) * exp_.q[0]))) {
      ++skipped_;
      throw GuardError("local generator system is near-singular at this probe");
    }
    out.schiffer[0] = b[0] / a(0, 0);
  } else if (m == 2) {
    Complex det = a(0, 0) * a(1, 1) - a(1, 0) * a(0, 1);
    double norm = a.cwiseAbs().maxCoeff();
    if (std::abs(det) < 1e-10 * norm * norm) {
      ++skipped_;
      throw GuardError("local generator system is near-singular at this probe");
    }
    out.schiffer[0] = (b[0] * a(1, 1) - a(1, 0) * b[1]) / det;
    out.schiffer[1] = (a(0, 0) * b[1] - b[0] * a(0, 1)) / det;
  } else if (m > 2) {
    CMatrix sys(m, m);
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i) sys(k, i) = a(i, k);
    out.schiffer = sys.partialPivLu().solve(b);
  }

  // L(z,a)^2 from the Lambda expansion at the base point
  Complex lam_a = lambda_from_table(gen_.point_index(gen_.base), z);
  Complex sum{0.0, 0.0};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      sum += exp_.mu(i, j) * out.schiffer[i] * exp_.l_at_base[j];
  out.l2 = (lam_a - sum) / (4.0 * kPi);
  out.p = out.f_base * out.l2;

  out.q_funcs.resize(m);
  for (int i = 0; i < m; ++i) {
    Complex acc{0.0, 0.0};
    for (int k = 0; k < m; ++k) acc += exp_.beta(i, k) * out.schiffer[k];
    out.q_funcs[i] = acc;
  }
  return out;
}

Complex ReconstructedBergman::value(Complex z, Complex w) const {
  OneVariable zz = assemble(z);
  OneVariable ww = assemble(w);
  const int m = static_cast<int>(gen_.zeros.size());

  Complex denom = 1.0 - zz.f_base * std::conj(ww.f_base);
  if (std::abs(denom) < 1e-8)
    throw GuardError("Szego expansion denominator is near-singular");

  Complex x = sz_.c0 * zz.p * std::conj(ww.p);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      x += sz_.c(i, j) * zz.q_funcs[i] * std::conj(ww.q_funcs[j]);
  x /= denom;

  Complex k = 4.0 * kPi * x * x / (zz.l2 * std::conj(ww.l2));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      k += exp_.lambda(i, j) * zz.schiffer[i] * std::conj(ww.schiffer[j]);
  return k;
}

std::vector<CheckRecord> biholo_transport_check(
    const KernelContext& src, const KernelContext& dst, const ExplicitMap& map,
    const std::vector<Complex>& probes) {
  // continuous branch of sqrt(map derivative) along a nearest-neighbor chain
  std::vector<Complex> pts = probes;
  std::vector<Complex> sigma(pts.size());
  std::vector<bool> used(pts.size(), false);
  int current = 0;
  used[0] = true;
  sigma[0] = std::sqrt(map.derivative(pts[0]));
  for (size_t step = 1; step < pts.size(); ++step) {
    int next = -1;
    double best = 1e300;
    for (size_t j = 0; j < pts.size(); ++j) {
      if (used[j]) continue;
      double dist = std::abs(pts[j] - pts[current]);
      if (dist < best) {
        best = dist;
        next = static_cast<int>(j);
      }
    }
    Complex s = std::sqrt(map.derivative(pts[next]));
    if (std::abs(s - sigma[current]) > std::abs(s + sigma[current])) s = -s;
    sigma[next] = s;
    used[next] = true;
    current = next;
  }

  const int g = static_cast<int>(pts.size());
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < g && static_cast<int>(pairs.size()) < 50; ++i)
    for (int j = 0; j < g && static_cast<int>(pairs.size()) < 50; ++j) {
      if (std::abs(pts[i] - pts[j]) < 5e-2) continue;
      Complex mi = map.value(pts[i]), mj = map.value(pts[j]);
      if (std::abs(mi - mj) < 5e-2) continue;
      if (dst.domain().boundary_distance(mi) <
          std::max(0.05, 2.5 * dst.domain().guard_distance(mi)))
        continue;
      if (dst.domain().boundary_distance(mj) <
          std::max(0.05, 2.5 * dst.domain().guard_distance(mj)))
        continue;
      pairs.emplace_back(i, j);
    }

  double worst_k = 0, worst_lam = 0, worst_g = 0;
  double scale_k = 1e-30, scale_lam = 1e-30, scale_g = 1e-30;
  // S and L keep a global sign freedom in the square root
  double worst_s_plus = 0, worst_s_minus = 0, scale_s = 1e-30;
  double worst_l_plus = 0, worst_l_minus = 0, scale_l = 1e-30;

  for (auto [i, j] : pairs) {
    Complex z = pts[i], w = pts[j];
    Complex fz = map.value(z), fw = map.value(w);
    Complex dz = map.derivative(z), dw = map.derivative(w);

    Complex k1 = src.K(0)(z, w);
    Complex k2 = dz * dst.K(0)(fz, fw) * std::conj(dw);
    worst_k = std::max(worst_k, std::abs(k1 - k2));
    scale_k = std::max(scale_k, std::abs(k1));

    Complex lam1 = src.Lam(0)(z, w);
    Complex lam2 = dz * dst.Lam(0)(fz, fw) * dw;
    worst_lam = std::max(worst_lam, std::abs(lam1 - lam2));
    scale_lam = std::max(scale_lam, std::abs(lam1));

    Complex s1 = src.S(z, w);
    Complex s2 = dst.S(fz, fw) * std::conj(sigma[j]);
    worst_s_plus = std::max(worst_s_plus, std::abs(s1 - sigma[i] * s2));
    worst_s_minus = std::max(worst_s_minus, std::abs(s1 + sigma[i] * s2));
    scale_s = std::max(scale_s, std::abs(s1));

    Complex l1 = src.L(z, w);
    Complex l2 = dst.L(fz, fw) * sigma[j];
    worst_l_plus = std::max(worst_l_plus, std::abs(l1 - sigma[i] * l2));
    worst_l_minus = std::max(worst_l_minus, std::abs(l1 + sigma[i] * l2));
    scale_l = std::max(scale_l, std::abs(l1));

    double g1 = src.green()(z, w);
    double g2 = dst.green()(fz, fw);
    worst_g = std::max(worst_g, std::abs(g1 - g2));
    scale_g = std::max(scale_g, std::abs(g1));
  }

  std::string grid = std::to_string(pairs.size()) + " probe pairs, map " + map.name;
  std::vector<CheckRecord> out;
  out.push_back(make_check("transport-bergman-" + map.name, grid,
                           worst_k / scale_k, 1e-6));
  out.push_back(make_check("transport-lambda-" + map.name, grid,
                           worst_lam / scale_lam, 1e-6));
  out.push_back(make_check("transport-szego-" + map.name, grid,
                           std::min(worst_s_plus, worst_s_minus) / scale_s, 1e-6));
  out.push_back(make_check("transport-garabedian-" + map.name, grid,
                           std::min(worst_l_plus, worst_l_minus) / scale_l, 1e-6));
  out.push_back(
      make_check("transport-green-" + map.name, grid, worst_g / scale_g, 1e-6));
  return out;
}

}  // namespace kernelsmith
