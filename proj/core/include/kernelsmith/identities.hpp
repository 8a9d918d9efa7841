#ifndef KERNELSMITH_IDENTITIES_HPP
#define KERNELSMITH_IDENTITIES_HPP

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "kernelsmith/potential.hpp"
#include "kernelsmith/report.hpp"
#include "kernelsmith/szego.hpp"

namespace kernelsmith {

// Shared solvers and kernel oracles for one domain.  The Szego side (S, L,
// Ahlfors maps) and the Dirichlet side (K_m, Lambda_m, G, omega_j) are built
// independently, so identities between them are non-circular checks.
class KernelContext {
 public:
  explicit KernelContext(Domain domain);

  const Domain& domain() const { return domain_; }
  const SzegoSolver& szego() const { return *szego_; }
  std::shared_ptr<const DirichletSolver> dirichlet() const { return dirichlet_; }

  const SzegoSolution& solution_at(Complex base) const;  // cached per base
  Complex S(Complex z, Complex w) const;  // Szego kernel
  Complex L(Complex z, Complex w) const;  // Garabedian kernel, z != w
  const AhlforsMap& ahlfors(Complex base) const;  // cached per base

  BergmanKernel& K(int order) const;
  LambdaKernel& Lam(int order) const;
  GreenFunction& green() const;
  FPrimeEvaluator& f_prime(int j) const;  // j = 1..n-1

 private:
  Domain domain_;
  std::shared_ptr<SzegoSolver> szego_;
  std::shared_ptr<const DirichletSolver> dirichlet_;
  mutable std::map<std::pair<double, double>, SzegoSolution> solutions_;
  mutable std::map<std::pair<double, double>, AhlforsMap> ahlfors_;
  mutable std::array<std::shared_ptr<BergmanKernel>, 3> bergman_;
  mutable std::array<std::shared_ptr<LambdaKernel>, 3> lambda_;
  mutable std::shared_ptr<GreenFunction> green_;
  mutable std::map<int, std::shared_ptr<FPrimeEvaluator>> fprime_;
  mutable std::mutex mutex_;
};

// Scalar data of one proper map f_b reconstructed from kernel generators:
// f_b' is a linear combination of K(., zero_k) and f_b f_b' adds the
// first-derivative table, with coefficients from the local inverses of f_b
// at its zeros.
struct ProperMapCombo {
  Complex base;
  std::vector<Complex> zeros;        // all zeros of f_base (base included)
  std::vector<Complex> phi1;         // 1 / f'(zero_k)
  std::vector<Complex> phi2;         // -f''(zero_k) / f'(zero_k)^3
  std::vector<int> point_index;      // row of each zero in GeneratorSet::points
};

// Base point a, the zeros a_1..a_{n-1} of S(.,a), the generator point set,
// and tabulated boundary traces of K_m(., alpha) for m <= 2.
struct GeneratorSet {
  Complex base;
  std::vector<Complex> zeros;
  std::vector<Complex> points;
  std::vector<std::array<BoundaryField, 3>> tables;  // per point, per order
  std::vector<ProperMapCombo> combos;  // combos[0] for base, then one per zero

  int point_index(Complex alpha) const;
  // K_m(z, points[i]) at an interior z from the tabulated trace.
  Complex table_value(int point, int order, Complex z) const;
};

GeneratorSet build_generator_set(const KernelContext& ctx, Complex a);

// c0 = 1/S(a,a) and the inverse of [S(a_j, a_k)].
struct SzegoExpansion {
  double c0;
  CMatrix c;
};
SzegoExpansion build_szego_expansion(const KernelContext& ctx,
                                     const GeneratorSet& gen);

// Coefficient matrices of the kernel expansions over the harmonic-measure
// derivatives F_j' and over the Schiffer basis L_i(z) = L(z,a_i) S(z,a),
// fitted by least squares against the Dirichlet-side oracles.
struct BergmanExpansion {
  CMatrix A;       // K = 4 pi S^2 + sum A_ij F_i'(z) conj(F_j'(w))
  CMatrix lambda;  // K = 4 pi S^2 + sum lambda_ij L_i(z) conj(L_j(w))
  CMatrix mu;      // Lambda(w,z) = 4 pi L(w,z)^2 + sum mu_ij L_i(z) L_j(w)
  CVector q;          // L_k(a_k), nonzero for simple zeros
  CVector l_at_base;  // L_j(a)
  CMatrix beta;       // S(z,a_i) L(z,a) = sum_j beta_ij L_j(z)
  double residual_A = 0.0;
  double residual_lambda = 0.0;
  double residual_mu = 0.0;
  double scale = 1.0;  // max |K| over the fit grid
};

BergmanExpansion fit_expansions(const KernelContext& ctx,
                                const GeneratorSet& gen,
                                const std::vector<Complex>& probes);

// Direct evaluations of the Szego/Garabedian expansion identities.
Complex szego_from_generators(const KernelContext& ctx, const GeneratorSet& gen,
                              const SzegoExpansion& exp, Complex z, Complex w);
Complex garabedian_from_generators(const KernelContext& ctx,
                                   const GeneratorSet& gen,
                                   const SzegoExpansion& exp, Complex z,
                                   Complex w);

// Boundary residuals of the kernel identities on the full grid:
// K_m(z,w) T(z) = -conj(Lambda_m(z,w)) conj(T(z)) for m = 0,1,2, the
// log-derivative identity for f_a, and the matching of f K/f' with the
// conjugated Lambda trace.
std::vector<CheckRecord> check_boundary_identities(const KernelContext& ctx,
                                                   const GeneratorSet& gen,
                                                   const std::vector<Complex>& w_probes);

ProperMapCombo build_proper_map_combo(const KernelContext& ctx, Complex base);

// Verifies the derivative and product expansions of an Ahlfors map against
// the kernel-table combinations on an interior grid.
std::vector<CheckRecord> proper_map_expansion(const KernelContext& ctx,
                                              Complex base,
                                              const std::vector<Complex>& probes);

// Residual of ln|f_a| + G(z,a) + sum_i G(z,a_i) over interior probes.
CheckRecord green_factorization_check(const KernelContext& ctx, Complex base,
                                      const std::vector<Complex>& probes);

// Bergman kernel rebuilt from the generator tables and fitted matrices only.
class ReconstructedBergman {
 public:
  ReconstructedBergman(const GeneratorSet& gen, const SzegoExpansion& sz,
                       const BergmanExpansion& exp);

  // Throws GuardError at probes where the local solve is near-singular.
  Complex value(Complex z, Complex w) const;

  int skipped_probes() const { return skipped_; }

 private:
  struct OneVariable {
    Complex f_base;           // f_a(z)
    CVector schiffer;         // L_i(z)
    Complex l2;               // L(z,a)^2
    Complex p;                // S(z,a) L(z,a) = f_a(z) L(z,a)^2
    CVector q_funcs;          // S(z,a_i) L(z,a)
  };
  OneVariable assemble(Complex z) const;
  Complex proper_map_value(const ProperMapCombo& combo, Complex z) const;
  Complex lambda_from_table(int point, Complex z) const;

  GeneratorSet gen_;
  SzegoExpansion sz_;
  BergmanExpansion exp_;
  mutable int skipped_ = 0;
};

// One explicitly given biholomorphism with derivative, for the kernel
// transformation checks.
struct ExplicitMap {
  std::string name;
  std::function<Complex(Complex)> value;
  std::function<Complex(Complex)> derivative;
};

std::vector<CheckRecord> biholo_transport_check(const KernelContext& src,
                                                const KernelContext& dst,
                                                const ExplicitMap& map,
                                                const std::vector<Complex>& probes);

}  // namespace kernelsmith

#endif
