#ifndef KERNELSMITH_ALGEBRA_HPP
#define KERNELSMITH_ALGEBRA_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kernelsmith/potential.hpp"

namespace kernelsmith {

// A holomorphic map with derivative, as needed for the relation machinery;
// critical_points are avoided during sampling when known in closed form.
// deck, when present, is the involution exchanging the sheets of the map
// (1/z for the two-to-one cover of A(r)); sampling then places whole orbits
// so that fits see every branch of the kernel over each map value.
struct MapEvaluator {
  std::function<Complex(Complex)> value;
  std::function<Complex(Complex)> derivative;
  std::vector<Complex> critical_points;
  std::function<Complex(Complex)> deck;
};

// A polynomial relation P(u, v) = sum c_pq u^p v^q (pairs), or
// P(K, u, vbar) = sum c_pqr K^p u^q vbar^r (trivariate), with unit-norm
// coefficients, the smallest singular value of the row-normalized design
// matrix as fit residual, and a held-out validation residual.
struct PolynomialRelation {
  int du = 0;
  int dv = 0;
  int dk = 0;  // 0 for two-variable relations
  CMatrix coeffs;                // (du+1) x (dv+1)
  std::vector<CMatrix> coeffs3;  // trivariate: coeffs3[p](q, r)
  double k_scale = 1.0;          // coefficients refer to K/k_scale
  double fit_residual = 0.0;
  double validation_residual = 0.0;
  bool lower_degree_note = false;

  bool trivariate() const { return dk > 0; }
  Complex eval(Complex u, Complex v) const;
  Complex eval3(Complex kval, Complex u, Complex vbar) const;
  // |P| at the point divided by the norm of its monomial vector, comparable
  // with the fit and validation residuals
  double normalized_residual(Complex kval, Complex u, Complex vbar) const;
  // coefficients (ascending powers of the raw K) of P(., u, vbar)
  CVector k_polynomial(Complex u, Complex vbar) const;
  std::string to_json() const;
};

struct SamplePair {
  std::vector<Complex> points;
  std::vector<Complex> u;  // f(z_i)
  std::vector<Complex> v;  // K(z_i, b) / f'(z_i)
};

struct SampleTriple {
  std::vector<Complex> z, w;
  std::vector<Complex> kvals;  // K(z_i, w_i)
  std::vector<Complex> u;      // f(z_i)
  std::vector<Complex> vbar;   // conj f(w_i)
};

SamplePair sample_pair(const Domain& domain, const MapEvaluator& f,
                       BergmanKernel& kernel, Complex b, int count,
                       double margin = 0.15);

// Pair samples for the trivariate fit.  When the map carries a deck
// involution, points are symmetrized into full sheet orbits and kept where
// |f| <= hull_bound, away from the pole locus of the continued kernel.
SampleTriple sample_triple(const Domain& domain, const MapEvaluator& f,
                           BergmanKernel& kernel, int z_count, int w_count,
                           double margin = 0.15, double hull_bound = 0.72);

PolynomialRelation fit_relation(const SamplePair& samples, int du, int dv);

struct BidegreeScanRow {
  int du, dv;
  double fit_residual;
  double validation_residual;
};

struct MinimalRelationResult {
  PolynomialRelation relation;
  std::vector<BidegreeScanRow> table;
  double best_residual_below = 1.0;   // best validation residual at dv-1
  double best_at_accepted = 1.0;      // best validation residual at the found dv
  // residual drop from dv-1 to dv, compared across the full du scan
  double gap() const { return best_residual_below / std::max(best_at_accepted, 1e-300); }
};

// Smallest (dv, then du) relation with validation residual <= tol; reports
// the whole residual table and the gap to the next-lower v-degree.
MinimalRelationResult minimal_relation(const SamplePair& samples,
                                       int max_degree, double tol = 1e-6);

// True when K(a_i, b)/f'(a_i) separates the zeros a_i of f.
bool separation_test(const MapEvaluator& f, const std::vector<Complex>& zeros,
                     BergmanKernel& kernel, Complex b);

PolynomialRelation fit_three_var_relation(const SampleTriple& samples, int dk,
                                          int du, int dv);

struct TrivariateScanResult {
  PolynomialRelation relation;
  std::vector<std::string> table;  // "dk,du,dv,fit,validation" rows
};

TrivariateScanResult minimal_three_var_relation(const SampleTriple& samples,
                                                int max_degree,
                                                double tol = 1e-6);

// I(z,w) = K(z,w) / (f'(z) conj(f'(w))): invariant under biholomorphisms
// that transport f.
Complex invariant_I(const MapEvaluator& f, BergmanKernel& kernel, Complex z,
                    Complex w);

struct ContinuationResult {
  std::vector<Complex> path;
  std::vector<Complex> tracked;       // tracked branch along the path
  std::vector<Complex> endpoint_roots;  // full multiset at the last point
  bool branch_point_hit = false;
  Complex branch_location{0.0, 0.0};
};

// Tracks the root of P(., f(z), vbar) nearest to the running value along the
// path, refining steps when branches approach each other.  The path may
// leave the domain as long as f stays evaluable in closed form.
ContinuationResult continue_kernel(const PolynomialRelation& relation,
                                   const std::function<Complex(Complex)>& f,
                                   const std::vector<Complex>& path,
                                   Complex vbar, Complex seed);

}  // namespace kernelsmith

#endif
