#include "kernelsmith/algebra.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "kernelsmith/geometry.hpp"

namespace kernelsmith {

namespace {

std::vector<Complex> poly_roots(const CVector& coeffs_ascending) {
  // trim the leading coefficient
  int deg = static_cast<int>(coeffs_ascending.size()) - 1;
  double top = coeffs_ascending.cwiseAbs().maxCoeff();
  while (deg > 0 && std::abs(coeffs_ascending[deg]) < 1e-12 * top) --deg;
  if (deg <= 0) return {};
  CMatrix comp = CMatrix::Zero(deg, deg);
  for (int k = 0; k < deg; ++k)
    comp(k, deg - 1) = -coeffs_ascending[k] / coeffs_ascending[deg];
  for (int k = 1; k < deg; ++k) comp(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMatrix> eig(comp);
  std::vector<Complex> roots(eig.eigenvalues().data(),
                             eig.eigenvalues().data() + deg);
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return roots;
}

struct SplitDesign {
  CMatrix fit;        // row-normalized fit rows
  CMatrix validate;   // row-normalized validation rows
};

// deterministic 70/30 split by sample index
SplitDesign split_rows(const CMatrix& design) {
  std::vector<int> fit_rows, val_rows;
  for (int i = 0; i < design.rows(); ++i)
    ((i % 10) < 7 ? fit_rows : val_rows).push_back(i);
  SplitDesign out;
  out.fit.resize(fit_rows.size(), design.cols());
  out.validate.resize(val_rows.size(), design.cols());
  for (size_t i = 0; i < fit_rows.size(); ++i)
    out.fit.row(i) = design.row(fit_rows[i]);
  for (size_t i = 0; i < val_rows.size(); ++i)
    out.validate.row(i) = design.row(val_rows[i]);
  return out;
}

void normalize_rows(CMatrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    double norm = m.row(i).norm();
    if (norm > 0) m.row(i) /= norm;
  }
}

struct NullFit {
  CVector coeffs;
  double fit_residual;
  double validation_residual;
  int nullity;
};

NullFit null_vector_fit(CMatrix design) {
  normalize_rows(design);
  SplitDesign split = split_rows(design);
  Eigen::BDCSVD<CMatrix> svd(split.fit, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const int cols = static_cast<int>(design.cols());
  NullFit out;
  out.coeffs = svd.matrixV().col(cols - 1);
  out.fit_residual = sv[cols - 1] / std::sqrt(static_cast<double>(split.fit.rows()));
  out.nullity = 0;
  for (int k = 0; k < cols; ++k)
    if (sv[k] < 1e-10 * std::max(sv[0], 1e-300)) ++out.nullity;
  out.validation_residual =
      split.validate.rows() > 0
          ? (split.validate * out.coeffs).cwiseAbs().maxCoeff()
          : out.fit_residual;
  return out;
}

}  // namespace

Complex PolynomialRelation::eval(Complex u, Complex v) const {
  Complex acc{0.0, 0.0};
  Complex up{1.0, 0.0};
  for (int p = 0; p <= du; ++p) {
    Complex vq{1.0, 0.0};
    for (int q = 0; q <= dv; ++q) {
      acc += coeffs(p, q) * up * vq;
      vq *= v;
    }
    up *= u;
  }
  return acc;
}

Complex PolynomialRelation::eval3(Complex kval, Complex u, Complex vbar) const {
  CVector cp = k_polynomial(u, vbar);
  Complex acc{0.0, 0.0};
  Complex kp{1.0, 0.0};
  for (int p = 0; p <= dk; ++p) {
    acc += cp[p] * kp;
    kp *= kval;
  }
  return acc;
}

double PolynomialRelation::normalized_residual(Complex kval, Complex u,
                                               Complex vbar) const {
  Complex khat = kval / k_scale;
  double norm2 = 0.0;
  Complex val{0.0, 0.0};
  Complex kp{1.0, 0.0};
  for (int p = 0; p <= dk; ++p) {
    Complex uq{1.0, 0.0};
    for (int q = 0; q <= du; ++q) {
      Complex vr{1.0, 0.0};
      for (int r = 0; r <= dv; ++r) {
        Complex mono = kp * uq * vr;
        norm2 += std::norm(mono);
        val += (trivariate() ? coeffs3[p](q, r) : coeffs(q, r)) * mono;
        vr *= vbar;
      }
      uq *= u;
    }
    kp *= khat;
    if (!trivariate()) break;
  }
  return std::abs(val) / std::sqrt(norm2);
}

CVector PolynomialRelation::k_polynomial(Complex u, Complex vbar) const {
  CVector cp = CVector::Zero(dk + 1);
  double scale_power = 1.0;
  for (int p = 0; p <= dk; ++p) {
    Complex acc{0.0, 0.0};
    Complex uq{1.0, 0.0};
    for (int q = 0; q <= du; ++q) {
      Complex vr{1.0, 0.0};
      for (int r = 0; r <= dv; ++r) {
        acc += coeffs3[p](q, r) * uq * vr;
        vr *= vbar;
      }
      uq *= u;
    }
    cp[p] = acc / scale_power;  // coefficients of the raw K
    scale_power *= k_scale;
  }
  return cp;
}

std::string PolynomialRelation::to_json() const {
  nlohmann::json j;
  j["du"] = du;
  j["dv"] = dv;
  if (trivariate()) j["dk"] = dk;
  if (trivariate()) j["k_scale"] = k_scale;
  j["fit_residual"] = fit_residual;
  j["validation_residual"] = validation_residual;
  if (lower_degree_note) j["note"] = "exact relation found at a lower bidegree";
  auto matrix_json = [](const CMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int p = 0; p < m.rows(); ++p) {
      nlohmann::json row = nlohmann::json::array();
      for (int q = 0; q < m.cols(); ++q)
        row.push_back({m(p, q).real(), m(p, q).imag()});
      rows.push_back(row);
    }
    return rows;
  };
  if (trivariate()) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& block : coeffs3) blocks.push_back(matrix_json(block));
    j["coeffs"] = blocks;
  } else {
    j["coeffs"] = matrix_json(coeffs);
  }
  return j.dump(2);
}

SamplePair sample_pair(const Domain& domain, const MapEvaluator& f,
                       BergmanKernel& kernel, Complex b, int count,
                       double margin) {
  std::vector<Complex> avoid = f.critical_points;
  avoid.push_back(b);
  std::vector<Complex> pts =
      interior_points(domain, count + count / 2, margin, avoid, 1e-2);

  SamplePair out;
  for (Complex z : pts) {
    if (static_cast<int>(out.points.size()) == count) break;
    Complex fp = f.derivative(z);
    if (std::abs(fp) < 1e-6) continue;  // too near a critical point
    Complex kv = kernel(z, b);
    if (!std::isfinite(kv.real()) || !std::isfinite(kv.imag())) continue;
    out.points.push_back(z);
    out.u.push_back(f.value(z));
    out.v.push_back(kv / fp);
  }
  if (static_cast<int>(out.points.size()) < count)
    throw Error("too few admissible sample points for the relation fit");
  return out;
}

SampleTriple sample_triple(const Domain& domain, const MapEvaluator& f,
                           BergmanKernel& kernel, int z_count, int w_count,
                           double margin, double hull_bound) {
  std::vector<Complex> raw = interior_points(
      domain, 2 * (z_count + w_count), margin, f.critical_points, 0.1);

  std::vector<Complex> zs, ws;
  auto push = [&](Complex p) {
    auto& side = (static_cast<int>(zs.size()) <= static_cast<int>(ws.size()) &&
                  static_cast<int>(zs.size()) < z_count)
                     ? zs
                     : ws;
    side.push_back(p);
    if (f.deck) {
      Complex q = f.deck(p);
      if (domain.boundary_distance(q) > 2.0 * domain.guard_distance(q))
        side.push_back(q);
    }
  };
  for (Complex p : raw) {
    if (static_cast<int>(zs.size()) >= z_count &&
        static_cast<int>(ws.size()) >= w_count)
      break;
    if (std::abs(f.value(p)) > hull_bound) continue;
    push(p);
  }
  if (zs.empty() || ws.empty())
    throw Error("too few admissible sample points for the relation fit");

  SampleTriple out;
  for (Complex w : ws) {
    Complex fw = std::conj(f.value(w));
    for (Complex z : zs) {
      out.z.push_back(z);
      out.w.push_back(w);
      out.kvals.push_back(kernel(z, w));
      out.u.push_back(f.value(z));
      out.vbar.push_back(fw);
    }
  }
  return out;
}

PolynomialRelation fit_relation(const SamplePair& samples, int du, int dv) {
  const int rows = static_cast<int>(samples.points.size());
  const int cols = (du + 1) * (dv + 1);
  if (rows < 3 * cols)
    throw Error("relation fit needs at least 3x as many samples as monomials");

  CMatrix design(rows, cols);
  for (int i = 0; i < rows; ++i) {
    Complex up{1.0, 0.0};
    for (int p = 0; p <= du; ++p) {
      Complex vq{1.0, 0.0};
      for (int q = 0; q <= dv; ++q) {
        design(i, p * (dv + 1) + q) = up * vq;
        vq *= samples.v[i];
      }
      up *= samples.u[i];
    }
  }

  NullFit fit = null_vector_fit(design);
  PolynomialRelation rel;
  rel.du = du;
  rel.dv = dv;
  rel.fit_residual = fit.fit_residual;
  rel.validation_residual = fit.validation_residual;
  rel.coeffs.resize(du + 1, dv + 1);
  for (int p = 0; p <= du; ++p)
    for (int q = 0; q <= dv; ++q) rel.coeffs(p, q) = fit.coeffs[p * (dv + 1) + q];

  if (fit.nullity > 1) {
    // several independent null vectors: an exact relation lives at a lower
    // bidegree; return that one with a note
    for (int dvv = 1; dvv <= dv; ++dvv)
      for (int duu = 0; duu <= du; ++duu) {
        if (duu == du && dvv == dv) continue;
        if (rows < 3 * (duu + 1) * (dvv + 1)) continue;
        try {
          PolynomialRelation lower = fit_relation(samples, duu, dvv);
          if (lower.validation_residual <= rel.validation_residual * 10.0 &&
              lower.validation_residual < 1e-8) {
            lower.lower_degree_note = true;
            return lower;
          }
        } catch (const Error&) {
        }
      }
  }
  return rel;
}

MinimalRelationResult minimal_relation(const SamplePair& samples,
                                       int max_degree, double tol) {
  // An exact relation shows up as a cliff: the level optimum drops to the
  // data noise floor.  Smoothly decaying approximants at a too-small dv can
  // slip under a loose tolerance, so the v-degree is accepted only when its
  // level bottoms out near that floor.
  const double exact_floor = 1e-11;

  MinimalRelationResult result;
  double best_below = 1.0;

  for (int dv = 0; dv <= max_degree; ++dv) {
    double best_here = 1.0;
    std::optional<PolynomialRelation> first_admissible;
    for (int du = 0; du <= max_degree; ++du) {
      if (du == 0 && dv == 0) continue;
      const int cols = (du + 1) * (dv + 1);
      if (static_cast<int>(samples.points.size()) < 3 * cols) continue;
      PolynomialRelation rel = fit_relation(samples, du, dv);
      result.table.push_back(
          {du, dv, rel.fit_residual, rel.validation_residual});
      best_here = std::min(best_here, rel.validation_residual);

      if (dv >= 1 && !first_admissible && rel.validation_residual <= tol) {
        double lead = 0.0;
        for (int p = 0; p <= du; ++p)
          lead = std::max(lead, std::abs(rel.coeffs(p, dv)));
        if (lead > 1e-10) first_admissible = rel;
      }
    }
    if (dv >= 1 && first_admissible && best_here <= exact_floor) {
      result.relation = *first_admissible;
      result.best_residual_below = best_below;
      result.best_at_accepted = best_here;
      return result;
    }
    best_below = best_here;
  }
  throw NoRelationError("no relation found below the bidegree cap");
}

bool separation_test(const MapEvaluator& f, const std::vector<Complex>& zeros,
                     BergmanKernel& kernel, Complex b) {
  std::vector<Complex> vals;
  double scale = 1e-300;
  for (Complex a : zeros) {
    Complex fp = f.derivative(a);
    if (std::abs(fp) < 1e-10) return false;
    Complex v = kernel(a, b) / fp;
    vals.push_back(v);
    scale = std::max(scale, std::abs(v));
  }
  for (size_t i = 0; i < vals.size(); ++i)
    for (size_t j = i + 1; j < vals.size(); ++j)
      if (std::abs(vals[i] - vals[j]) < 1e-6 * scale) return false;
  return true;
}

PolynomialRelation fit_three_var_relation(const SampleTriple& samples, int dk,
                                          int du, int dv) {
  const int total = static_cast<int>(samples.z.size());
  const int cols = (dk + 1) * (du + 1) * (dv + 1);
  if (total < 3 * cols)
    throw Error("relation fit needs at least 3x as many samples as monomials");

  // deterministic row cap keeps the decomposition affordable at high degree;
  // odd stride so sheet-orbit partners (stored adjacently) both survive
  const int row_cap = std::max(3 * cols, 6000);
  int stride = std::max(1, total / row_cap);
  if (stride % 2 == 0) ++stride;
  std::vector<int> rows_used;
  for (int i = 0; i < total; i += stride) rows_used.push_back(i);
  const int rows = static_cast<int>(rows_used.size());

  double log_scale = 0.0;
  for (int i : rows_used) log_scale += std::log(std::abs(samples.kvals[i]));
  const double k_scale = std::exp(log_scale / rows);

  CMatrix design(rows, cols);
  for (int r0 = 0; r0 < rows; ++r0) {
    const int i = rows_used[r0];
    Complex kp{1.0, 0.0};
    Complex khat = samples.kvals[i] / k_scale;
    for (int p = 0; p <= dk; ++p) {
      Complex uq{1.0, 0.0};
      for (int q = 0; q <= du; ++q) {
        Complex vr{1.0, 0.0};
        for (int r = 0; r <= dv; ++r) {
          design(r0, (p * (du + 1) + q) * (dv + 1) + r) = kp * uq * vr;
          vr *= samples.vbar[i];
        }
        uq *= samples.u[i];
      }
      kp *= khat;
    }
  }

  NullFit fit = null_vector_fit(design);
  PolynomialRelation rel;
  rel.du = du;
  rel.dv = dv;
  rel.dk = dk;
  rel.k_scale = k_scale;
  rel.fit_residual = fit.fit_residual;
  rel.validation_residual = fit.validation_residual;
  rel.coeffs3.assign(dk + 1, CMatrix::Zero(du + 1, dv + 1));
  for (int p = 0; p <= dk; ++p)
    for (int q = 0; q <= du; ++q)
      for (int r = 0; r <= dv; ++r)
        rel.coeffs3[p](q, r) = fit.coeffs[(p * (du + 1) + q) * (dv + 1) + r];
  return rel;
}

TrivariateScanResult minimal_three_var_relation(const SampleTriple& samples,
                                                int max_degree, double tol) {
  TrivariateScanResult out;
  for (int dk = 1; dk <= std::min(max_degree, 4); ++dk) {
    double prev = 1e300;
    int stagnant = 0;
    for (int d = dk; d <= max_degree; ++d) {
      const int cols = (dk + 1) * (d + 1) * (d + 1);
      if (static_cast<int>(samples.z.size()) < 3 * cols) break;
      PolynomialRelation rel = fit_three_var_relation(samples, dk, d, d);
      out.table.push_back(std::to_string(dk) + "," + std::to_string(d) + "," +
                          std::to_string(d) + "," +
                          std::to_string(rel.fit_residual) + "," +
                          std::to_string(rel.validation_residual));
      if (rel.validation_residual <= tol) {
        double lead = 0.0;
        for (int q = 0; q <= d; ++q)
          for (int r = 0; r <= d; ++r)
            lead = std::max(lead, std::abs(rel.coeffs3[dk](q, r)));
        if (lead > 1e-10) {
          out.relation = rel;
          return out;
        }
      }
      // move to the next K-degree once improvement stalls
      if (rel.validation_residual > 0.5 * prev) {
        if (++stagnant >= 2) break;
      } else {
        stagnant = 0;
      }
      prev = rel.validation_residual;
    }
  }
  throw NoRelationError("no trivariate relation found below the degree cap");
}

Complex invariant_I(const MapEvaluator& f, BergmanKernel& kernel, Complex z,
                    Complex w) {
  Complex fpz = f.derivative(z);
  Complex fpw = f.derivative(w);
  if (std::abs(fpz) < 1e-3 || std::abs(fpw) < 1e-3)
    throw GuardError("invariant evaluated too close to a critical point");
  return kernel(z, w) / (fpz * std::conj(fpw));
}

ContinuationResult continue_kernel(const PolynomialRelation& relation,
                                   const std::function<Complex(Complex)>& f,
                                   const std::vector<Complex>& path,
                                   Complex vbar, Complex seed) {
  if (!relation.trivariate())
    throw Error("continuation needs a trivariate relation");
  ContinuationResult out;
  Complex current = seed;

  auto roots_at = [&](Complex z) {
    return poly_roots(relation.k_polynomial(f(z), vbar));
  };

  // nearest-root continuation with step halving between path nodes
  std::function<bool(Complex, Complex, int)> advance = [&](Complex from,
                                                           Complex to,
                                                           int depth) -> bool {
    std::vector<Complex> roots = roots_at(to);
    if (roots.empty()) return false;
    double best = 1e300, second = 1e300;
    Complex pick{0.0, 0.0};
    for (Complex r : roots) {
      double dist = std::abs(r - current);
      if (dist < best) {
        second = best;
        best = dist;
        pick = r;
      } else {
        second = std::min(second, dist);
      }
    }
    bool ambiguous = roots.size() > 1 && second < 2.0 * best && best > 1e-10;
    if (ambiguous && depth < 14) {
      Complex mid = 0.5 * (from + to);
      return advance(from, mid, depth + 1) && advance(mid, to, depth + 1);
    }
    if (ambiguous && best > 1e-6) {
      out.branch_point_hit = true;
      out.branch_location = to;
      return false;
    }
    current = pick;
    return true;
  };

  out.path = path;
  out.tracked.push_back(seed);
  for (size_t i = 1; i < path.size(); ++i) {
    if (!advance(path[i - 1], path[i], 0)) {
      if (!out.branch_point_hit) {
        out.branch_point_hit = true;
        out.branch_location = path[i];
      }
      break;
    }
    out.tracked.push_back(current);
  }
  out.endpoint_roots = roots_at(path[std::min(out.tracked.size(), path.size()) - 1]);
  return out;
}

}  // namespace kernelsmith
