#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kernelsmith/algebra.hpp"
#include "kernelsmith/identities.hpp"
#include "kernelsmith/report.hpp"

using namespace kernelsmith;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitBadSpec = 2;
constexpr int kExitGuard = 3;
constexpr int kExitNoRelation = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

struct LoadedDomain {
  Domain domain;
  std::string canonical;
  nlohmann::json spec;
};

LoadedDomain load_domain(const std::string& spec_path) {
  std::string text = read_file(spec_path);
  nlohmann::json spec = nlohmann::json::parse(text);
  return LoadedDomain{domain_from_json(text), spec.dump(), spec};
}

Complex parse_complex_pair(const std::string& text, size_t offset) {
  std::stringstream ss(text);
  std::vector<double> nums;
  std::string tok;
  while (std::getline(ss, tok, ',')) nums.push_back(std::stod(tok));
  if (nums.size() < offset + 2) throw Error("expected re,im components in --at");
  return Complex{nums[offset], nums[offset + 1]};
}

int cmd_domain(const std::string& spec_path) {
  LoadedDomain ld = load_domain(spec_path);
  const Domain& d = ld.domain;
  nlohmann::json out;
  out["connectivity"] = d.connectivity();
  out["outer_index"] = d.outer_index();
  out["total_samples"] = d.total_samples();
  out["domain_hash"] = spec_hash(ld.canonical);
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& c : d.curves()) {
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (int k = 0; k < c.size(); ++k) {
      xlo = std::min(xlo, c.pos[k].real());
      xhi = std::max(xhi, c.pos[k].real());
      ylo = std::min(ylo, c.pos[k].imag());
      yhi = std::max(yhi, c.pos[k].imag());
    }
    boxes.push_back({{"M", c.size()},
                     {"xmin", xlo},
                     {"xmax", xhi},
                     {"ymin", ylo},
                     {"ymax", yhi}});
  }
  out["curves"] = boxes;
  out["invariants_pass"] = true;  // construction validates them
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_kernel(const std::string& spec_path, const std::string& kind,
               const std::string& at, bool grid, const std::string& out_dir) {
  LoadedDomain ld = load_domain(spec_path);
  KernelContext ctx(ld.domain);
  const Domain& d = ld.domain;

  auto eval_kind = [&](Complex z, Complex w) -> Complex {
    if (kind == "K") return ctx.K(0)(z, w);
    if (kind == "S") return ctx.S(z, w);
    if (kind == "L") return ctx.L(z, w);
    if (kind == "Lambda") return ctx.Lam(0)(z, w);
    if (kind == "G") return Complex{ctx.green()(z, w), 0.0};
    if (kind == "ahlfors") return ctx.ahlfors(w).value(z);
    throw Error("unknown kernel kind: " + kind);
  };

  if (grid) {
    std::ostringstream csv;
    csv << "re_z,im_z,re_w,im_w,re_val,im_val\n";
    if (kind == "ahlfors") {
      // boundary trace of the Ahlfors map based at a default interior point
      Complex a = ctx.szego().select_base_point({1.0, 0.7});
      const AhlforsMap& f = ctx.ahlfors(a);
      for (int k = 0; k < d.total_samples(); ++k) {
        Complex z = d.point(k);
        Complex v = f.boundary.values[k];
        csv << fmt(z.real()) << "," << fmt(z.imag()) << "," << fmt(a.real())
            << "," << fmt(a.imag()) << "," << fmt(v.real()) << ","
            << fmt(v.imag()) << "\n";
      }
    } else {
      std::vector<Complex> probes = interior_points(d, 12, probe_margin(d));
      for (Complex z : probes)
        for (Complex w : probes) {
          if ((kind == "Lambda" || kind == "L" || kind == "G") &&
              std::abs(z - w) < 1e-3)
            continue;
          Complex v = eval_kind(z, w);
          csv << fmt(z.real()) << "," << fmt(z.imag()) << "," << fmt(w.real())
              << "," << fmt(w.imag()) << "," << fmt(v.real()) << ","
              << fmt(v.imag()) << "\n";
        }
    }
    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / (kind + "_grid.csv"), csv.str());
    std::cout << csv.str();
    return 0;
  }

  Complex z = parse_complex_pair(at, 0);
  Complex w = parse_complex_pair(at, 2);
  Complex v = eval_kind(z, w);
  nlohmann::json out;
  out["kind"] = kind;
  out["z"] = {z.real(), z.imag()};
  out["w"] = {w.real(), w.imag()};
  out["value"] = {v.real(), v.imag()};
  std::cout << out.dump(2) << "\n";
  return 0;
}

void run_szego_suite(const KernelContext& ctx, const GeneratorSet& gen,
                     const SzegoExpansion& sz, RunReport& report) {
  const Domain& d = ctx.domain();
  const int total = d.total_samples();
  const SzegoSolution& sol = ctx.solution_at(gen.base);

  {  // Garabedian link on the boundary
    double worst = 0.0;
    double scale = sol.s_boundary.max_abs();
    for (int k = 0; k < total; ++k) {
      Complex lhs = sol.l_boundary.values[k] * d.tangent(k) / kImagUnit;
      worst = std::max(worst,
                       std::abs(lhs - std::conj(sol.s_boundary.values[k])));
    }
    report.add(make_check("szego-garabedian-link", "full boundary grid",
                          worst / scale, 1e-7));
  }
  {  // Ahlfors structure
    const AhlforsMap& f = ctx.ahlfors(gen.base);
    double worst = 0.0;
    for (int k = 0; k < total; ++k)
      worst = std::max(worst, std::abs(std::abs(f.boundary.values[k]) - 1.0));
    report.add(make_check("ahlfors-unimodular", "full boundary grid", worst, 1e-7));
    double saa = ctx.S(gen.base, gen.base).real();
    report.add(make_check("ahlfors-derivative",
                          "base point",
                          std::abs(f.derivative_at_base - kTwoPi * saa) /
                              (kTwoPi * saa),
                          1e-7));
    int degree = 0;
    for (int c = 0; c < d.connectivity(); ++c) degree += f.boundary_winding(c);
    report.add(make_check("ahlfors-degree", "boundary winding",
                          std::abs(degree - d.connectivity()), 0.5));
  }
  {  // generator expansions
    std::vector<Complex> probes =
        interior_points(d, 10, probe_margin(d), gen.points, 0.1);
    double worst24 = 0.0, worst25 = 0.0;
    for (Complex z : probes)
      for (Complex w : probes) {
        Complex direct = ctx.S(z, w);
        worst24 = std::max(worst24,
                           std::abs(direct - szego_from_generators(ctx, gen, sz, z, w)) /
                               std::abs(direct));
        if (std::abs(z - w) > 5e-2) {
          Complex dl = ctx.L(z, w);
          worst25 = std::max(worst25,
                             std::abs(dl - garabedian_from_generators(ctx, gen, sz, z, w)) /
                                 std::abs(dl));
        }
      }
    std::string g = std::to_string(probes.size()) + "^2 interior pairs";
    report.add(make_check("szego-generator-expansion", g, worst24, 1e-6));
    report.add(make_check("garabedian-generator-expansion", g, worst25, 1e-6));
  }
}

void run_bergman_suite(const KernelContext& ctx, const GeneratorSet& gen,
                       RunReport& report) {
  const Domain& d = ctx.domain();
  std::vector<Complex> probes =
      interior_points(d, 10, probe_margin(d), gen.points, 0.1);
  BergmanExpansion exp = fit_expansions(ctx, gen, probes);
  std::string g = std::to_string(probes.size()) + "^2 interior pairs";
  report.add(make_check("bergman-fprime-expansion", g,
                        exp.residual_A / exp.scale, 1e-6));
  report.add(make_check("bergman-schiffer-expansion", g,
                        exp.residual_lambda / exp.scale, 1e-6));
  report.add(make_check("lambda-schiffer-expansion", g,
                        exp.residual_mu / exp.scale, 1e-6));
  if (gen.zeros.size() > 0) {
    Eigen::JacobiSVD<CMatrix> svd(exp.lambda);
    double ratio = svd.singularValues().minCoeff() /
                   std::max(svd.singularValues().maxCoeff(), 1e-300);
    report.add(CheckRecord{"lambda-nonsingular", "coefficient matrix", ratio,
                           1e-8, ratio > 1e-8});
  }
  for (auto rec : check_boundary_identities(ctx, gen, {probes[0], probes[1]}))
    report.add(rec);
  for (auto rec : proper_map_expansion(ctx, gen.base, probes)) report.add(rec);
  report.add(green_factorization_check(ctx, gen.base, probes));
}

void run_reconstruct_suite(const KernelContext& ctx, const GeneratorSet& gen,
                           const SzegoExpansion& sz, RunReport& report) {
  const Domain& d = ctx.domain();
  std::vector<Complex> fit_probes =
      interior_points(d, 10, probe_margin(d), gen.points, 0.1);
  BergmanExpansion exp = fit_expansions(ctx, gen, fit_probes);
  ReconstructedBergman rec(gen, sz, exp);
  std::vector<Complex> probes =
      interior_points(d, 12, probe_margin(d), gen.points, 0.1);
  double worst = 0.0;
  int skipped = 0;
  for (Complex z : probes)
    for (Complex w : probes) {
      try {
        Complex direct = ctx.K(0)(z, w);
        worst = std::max(worst,
                         std::abs(direct - rec.value(z, w)) / std::abs(direct));
      } catch (const GuardError&) {
        ++skipped;
      }
    }
  int n = d.connectivity();
  report.add(make_check("bergman-reconstruction",
                        std::to_string(probes.size()) + "^2 pairs, " +
                            std::to_string(skipped) + " skipped",
                        worst, 1e-5));
  report.add(CheckRecord{"generator-set-size", "point count",
                         static_cast<double>(gen.points.size()),
                         static_cast<double>(n * n - 2 * n + 2),
                         static_cast<int>(gen.points.size()) <= n * n - 2 * n + 2});
}

void run_biholo_suite(const KernelContext& ctx, const nlohmann::json& spec,
                      RunReport& report) {
  const Domain& d = ctx.domain();
  std::vector<Complex> probes = interior_points(d, 14, probe_margin(d));
  std::vector<ExplicitMap> maps;
  std::string type = spec.at("type").get<std::string>();
  if (type == "ar") {
    maps.push_back({"inv", [](Complex z) { return 1.0 / z; },
                    [](Complex z) { return -1.0 / (z * z); }});
    maps.push_back({"neg", [](Complex z) { return -z; },
                    [](Complex) { return Complex{-1.0, 0.0}; }});
  } else if (d.connectivity() == 2) {
    // annulus rho < |z| < 1 after rescaling: rho/z composed with scaling
    double r_out = spec.at("radii")[0].get<double>();
    double r_in = spec.at("radii")[1].get<double>();
    double rho = r_in / r_out;
    Complex c0{spec.at("centers")[0][0].get<double>(),
               spec.at("centers")[0][1].get<double>()};
    maps.push_back({"rho-over-z",
                    [=](Complex z) { return c0 + rho * r_out * r_out / (z - c0); },
                    [=](Complex z) {
                      Complex t = z - c0;
                      return -rho * r_out * r_out / (t * t);
                    }});
  } else if (d.connectivity() == 1) {
    double r_out = spec.at("radii")[0].get<double>();
    Complex c0{spec.at("centers")[0][0].get<double>(),
               spec.at("centers")[0][1].get<double>()};
    maps.push_back({"mobius",
                    [=](Complex z) {
                      Complex t = (z - c0) / r_out;
                      return c0 + r_out * (t - 0.3) / (1.0 - 0.3 * t);
                    },
                    [=](Complex z) {
                      Complex t = (z - c0) / r_out;
                      Complex den = 1.0 - 0.3 * t;
                      return (1.0 - 0.09) / (den * den);
                    }});
  }
  for (const auto& map : maps)
    for (auto rec : biholo_transport_check(ctx, ctx, map, probes))
      report.add(rec);
}

int cmd_verify(const std::string& spec_path, const std::string& suite,
               const std::string& out_dir, bool timing) {
  auto t0 = std::chrono::steady_clock::now();
  LoadedDomain ld = load_domain(spec_path);
  KernelContext ctx(ld.domain);

  RunReport report;
  report.domain_hash = spec_hash(ld.canonical);

  Complex a = ctx.szego().select_base_point({1.0, 0.7});
  GeneratorSet gen = build_generator_set(ctx, a);
  SzegoExpansion sz = build_szego_expansion(ctx, gen);

  if (suite == "all" || suite == "szego") run_szego_suite(ctx, gen, sz, report);
  if (suite == "all" || suite == "bergman") run_bergman_suite(ctx, gen, report);
  if (suite == "all" || suite == "reconstruct")
    run_reconstruct_suite(ctx, gen, sz, report);
  if (suite == "all" || suite == "biholo")
    run_biholo_suite(ctx, ld.spec, report);
  if (report.checks.empty()) throw Error("unknown suite: " + suite);

  if (timing) {
    auto t1 = std::chrono::steady_clock::now();
    report.timing_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  }
  std::filesystem::create_directories(out_dir);
  write_file(std::filesystem::path(out_dir) / "report.json", report.to_json());
  std::cout << report.to_json() << "\n";
  return report.overall() ? 0 : kExitCheckFailed;
}

int cmd_discover(const std::string& spec_path, bool pair_mode, bool trivariate,
                 int max_degree, const std::string& out_dir) {
  LoadedDomain ld = load_domain(spec_path);
  const Domain& d = ld.domain;
  std::string type = ld.spec.at("type").get<std::string>();
  std::filesystem::create_directories(out_dir);

  if (trivariate) {
    if (type != "ar")
      throw Error("trivariate discovery needs an ar-type domain spec");
    double r = ld.spec.at("r").get<double>();
    KernelContext ctx(d);
    MapEvaluator f{[r](Complex z) { return (z + 1.0 / z) / r; },
                   [r](Complex z) { return (1.0 - 1.0 / (z * z)) / r; },
                   {{1.0, 0.0}, {-1.0, 0.0}}};
    SampleTriple st = sample_triple(d, f, ctx.K(0), 26, 26, probe_margin(d));
    TrivariateScanResult res = minimal_three_var_relation(st, max_degree);
    write_file(std::filesystem::path(out_dir) / "relation.json",
               res.relation.to_json());
    std::ostringstream csv;
    csv << "dk,du,dv,fit_residual,validation_residual\n";
    for (const auto& row : res.table) csv << row << "\n";
    write_file(std::filesystem::path(out_dir) / "scan.csv", csv.str());
    std::cout << res.relation.to_json() << "\n";
    return 0;
  }

  if (!pair_mode) throw Error("choose --pair or --trivariate");
  KernelContext ctx(d);
  MapEvaluator f;
  if (type == "ar") {
    double r = ld.spec.at("r").get<double>();
    f = MapEvaluator{[r](Complex z) { return (z + 1.0 / z) / r; },
                     [r](Complex z) { return (1.0 - 1.0 / (z * z)) / r; },
                     {{1.0, 0.0}, {-1.0, 0.0}}};
  } else {
    Complex a = ctx.szego().select_base_point({1.0, 0.7});
    const AhlforsMap& fa = ctx.ahlfors(a);
    f = MapEvaluator{[&ctx, a](Complex z) { return ctx.ahlfors(a).value(z); },
                     [&ctx, a](Complex z) { return ctx.ahlfors(a).derivative(z); },
                     {}};
  }
  std::vector<Complex> bpool = interior_points(d, 8, probe_margin(d));
  Complex b = bpool[3];
  SamplePair sp = sample_pair(d, f, ctx.K(0), b, 400, probe_margin(d));
  MinimalRelationResult res = minimal_relation(sp, max_degree);
  write_file(std::filesystem::path(out_dir) / "relation.json",
             res.relation.to_json());
  std::ostringstream csv;
  csv << "du,dv,fit_residual,validation_residual\n";
  for (const auto& row : res.table)
    csv << row.du << "," << row.dv << "," << fmt(row.fit_residual) << ","
        << fmt(row.validation_residual) << "\n";
  write_file(std::filesystem::path(out_dir) / "scan.csv", csv.str());
  std::cout << res.relation.to_json() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel functions and algebraic relations of multiply "
               "connected planar domains"};
  app.require_subcommand(1);

  std::string spec_path, at, out_dir = ".", suite = "all", kind = "K";
  bool grid = false, timing = false, pair_mode = false, trivariate = false;
  int max_degree = 8;

  auto* dom = app.add_subcommand("domain", "validate and summarize a domain spec");
  dom->add_option("spec", spec_path)->required();

  auto* ker = app.add_subcommand("kernel", "evaluate a kernel");
  ker->add_option("spec", spec_path)->required();
  ker->add_option("--kind", kind, "K|S|L|Lambda|G|ahlfors");
  ker->add_option("--at", at, "re_z,im_z,re_w,im_w");
  ker->add_flag("--grid", grid, "emit CSV over a deterministic grid");
  ker->add_option("--out", out_dir);

  auto* ver = app.add_subcommand("verify", "run identity suites");
  ver->add_option("spec", spec_path)->required();
  ver->add_option("--suite", suite, "all|szego|bergman|reconstruct|biholo");
  ver->add_option("--out", out_dir);
  ver->add_flag("--timing", timing, "include timing in the report");

  auto* dis = app.add_subcommand("discover", "fit polynomial relations");
  dis->add_option("spec", spec_path)->required();
  dis->add_flag("--pair", pair_mode);
  dis->add_flag("--trivariate", trivariate);
  dis->add_option("--max-degree", max_degree);
  dis->add_option("--out", out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(dom)) return cmd_domain(spec_path);
    if (app.got_subcommand(ker))
      return cmd_kernel(spec_path, kind, at, grid, out_dir);
    if (app.got_subcommand(ver)) return cmd_verify(spec_path, suite, out_dir, timing);
    if (app.got_subcommand(dis))
      return cmd_discover(spec_path, pair_mode, trivariate, max_degree, out_dir);
  } catch (const GuardError& e) {
    std::cerr << "guard violation: " << e.what() << "\n";
    return kExitGuard;
  } catch (const NoRelationError& e) {
    std::cerr << "no relation found: " << e.what() << "\n";
    return kExitNoRelation;
  } catch (const GeometryError& e) {
    std::cerr << "invalid domain spec: " << e.what() << "\n";
    return kExitBadSpec;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid domain spec: " << e.what() << "\n";
    return kExitBadSpec;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return 0;
}
