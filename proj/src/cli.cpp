#include "mbpt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "mbpt/amplitudes.hpp"
#include "mbpt/methods.hpp"
#include "mbpt/oracle.hpp"
#include "mbpt/series.hpp"

namespace mbpt::cli {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int env_threads() {
  const char* s = std::getenv("MBPT_THREADS");
  if (!s) return 1;
  const int t = std::atoi(s);
  return t > 0 ? t : 1;
}

// Sink that writes to a file when --out is given, stdout otherwise.
struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw Error("cannot open output file: " + path);
      os = &file;
    }
  }
  std::ostream& stream() { return *os; }
};

GibbsProblem load_problem_checked(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw CLI::FileError::Missing(path);  // usage error: exit code 2
  return load_problem(path);
}

FamilyKind parse_kind(const std::string& s) {
  if (s == "closed") return FamilyKind::Closed;
  if (s == "connected") return FamilyKind::ConnectedClosed;
  if (s == "greens") return FamilyKind::GreensFunction;
  if (s == "1pi") return FamilyKind::SelfEnergy1PI;
  if (s == "2pi") return FamilyKind::Skeleton2PI;
  throw Error("unknown family kind: " + s);
}

SigmaKind parse_method(const std::string& s) {
  if (s == "hf") return SigmaKind::HartreeFock;
  if (s == "gf2") return SigmaKind::GF2;
  if (s == "gw") return SigmaKind::GW;
  throw Error("unknown method: " + s);
}

std::vector<double> parse_lambda_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.size() != 4 || (parts[0] != "log" && parts[0] != "lin"))
    throw Error("lambda grid must be log:<lo>:<hi>:<count> or lin:<lo>:<hi>:<count>");
  const double lo = std::stod(parts[1]), hi = std::stod(parts[2]);
  const int count = std::stoi(parts[3]);
  if (count < 2 || lo <= 0.0 || hi <= lo) throw Error("invalid lambda grid bounds");
  std::vector<double> grid(count);
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    grid[k] = parts[0] == "log" ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                : lo + t * (hi - lo);
  }
  return grid;
}

// The dimension-4 benchmark problem: tridiagonal A, v = 0.1 I.
GibbsProblem benchmark_problem() {
  Matrix A = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    A(i, i) = 2.0;
    if (i > 0) {
      A(i, i - 1) = -1.0;
      A(i - 1, i) = -1.0;
    }
  }
  return build_problem(A, Matrix::Identity(4, 4), 0.1);
}

void cmd_enumerate(const std::string& kind, int order, const std::string& out_path) {
  Output out(out_path);
  const auto fam = enumerate_family(parse_kind(kind), order);
  for (const auto& c : fam.classes)
    out.stream() << to_string(c.representative) << "; S=" << c.symmetry_factor << "\n";
}

void cmd_series(const std::string& quantity, int order, const std::string& problem_path,
                const std::string& out_path) {
  const GibbsProblem p = load_problem_checked(problem_path);
  BareQuantity q;
  if (quantity == "z")
    q = BareQuantity::ZOverZ0;
  else if (quantity == "omega")
    q = BareQuantity::OmegaMinusOmega0;
  else if (quantity == "g")
    q = BareQuantity::G;
  else if (quantity == "sigma")
    q = BareQuantity::Sigma;
  else
    throw Error("unknown series quantity: " + quantity);

  const PowerSeries s = bare_series(q, p, order);
  Output out(out_path);
  out.stream() << "order";
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < s.cols(); ++j)
      out.stream() << ",c" << i << "_" << j;
  out.stream() << "\n";
  for (int k = 0; k <= s.max_order(); ++k) {
    out.stream() << k;
    for (int i = 0; i < s.rows(); ++i)
      for (int j = 0; j < s.cols(); ++j) out.stream() << "," << fmt(s.coeffs[k](i, j));
    out.stream() << "\n";
  }
}

void cmd_scf(const std::string& problem_path, const std::string& method, double damping,
             double tol, int max_iter, const std::string& out_path) {
  const GibbsProblem p = load_problem_checked(problem_path);
  ScfOptions opts;
  opts.damping = damping;
  opts.tol = tol;
  opts.max_iter = max_iter;
  const SigmaKind kind = parse_method(method);
  const ScfResult r = solve_dyson(p, kind, opts);
  const double phi = lw_functional(kind, r.G, p.v);
  const double omega = free_energy_lw(p, r.G, phi);
  const double energy = galitskii_migdal_energy(p, r.G);

  Output out(out_path);
  out.stream() << "key,value\n";
  out.stream() << "method," << method << "\n";
  out.stream() << "omega," << fmt(omega) << "\n";
  out.stream() << "energy," << fmt(energy) << "\n";
  out.stream() << "iterations," << r.iterations << "\n";
  out.stream() << "residual," << fmt(r.residual_history.empty() ? 0.0 : r.residual_history.back())
               << "\n";
  out.stream() << "converged," << (r.converged ? 1 : 0) << "\n";
}

void cmd_oracle(const std::string& problem_path, int nodes, const std::vector<std::string>& mc,
                const std::string& out_path) {
  const GibbsProblem p = load_problem_checked(problem_path);
  QuadratureSpec spec;
  spec.nodes_per_dim = nodes;
  spec.max_dim = std::max(spec.max_dim, p.N);
  const ExactQuantities ex = exact_quantities(p, spec);

  Output out(out_path);
  out.stream() << "key,value\n";
  out.stream() << "Z," << fmt(ex.Z) << "\n";
  out.stream() << "Z_over_Z0," << fmt(ex.Z_over_Z0) << "\n";
  out.stream() << "Omega," << fmt(ex.Omega) << "\n";
  out.stream() << "E," << fmt(ex.E) << "\n";
  for (int i = 0; i < p.N; ++i)
    for (int j = 0; j < p.N; ++j)
      out.stream() << "G_" << i << "_" << j << "," << fmt(ex.G(i, j)) << "\n";

  if (!mc.empty()) {
    const long samples = std::stol(mc.at(0));
    const std::uint64_t seed = std::stoull(mc.at(1));
    const MonteCarloResult m = monte_carlo(p, samples, seed, env_threads());
    out.stream() << "mc_samples," << m.samples << "\n";
    out.stream() << "mc_seed," << m.seed << "\n";
    out.stream() << "mc_z_over_z0," << fmt(m.z_over_z0) << "\n";
    out.stream() << "mc_z_over_z0_stderr," << fmt(m.z_over_z0_stderr) << "\n";
    for (int i = 0; i < p.N; ++i)
      for (int j = 0; j < p.N; ++j)
        out.stream() << "mc_G_" << i << "_" << j << "," << fmt(m.G(i, j)) << "\n";
    for (int i = 0; i < p.N; ++i)
      for (int j = 0; j < p.N; ++j)
        out.stream() << "mc_G_stderr_" << i << "_" << j << "," << fmt(m.G_stderr(i, j)) << "\n";
  }
}

void cmd_sweep(const std::string& problem_path, const std::string& grid_spec,
               const std::string& methods_csv, int nodes, const std::string& out_path) {
  const GibbsProblem base = load_problem_checked(problem_path);
  const Matrix vu = base.v_unit();
  const std::vector<double> grid = parse_lambda_grid(grid_spec);

  std::vector<std::string> methods;
  std::stringstream ss(methods_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) methods.push_back(tok);

  // lambda-free coefficients: one enumeration serves the whole sweep
  const PowerSeries omega_series = bare_series(BareQuantity::OmegaMinusOmega0, base, 2);

  QuadratureSpec spec;
  spec.nodes_per_dim = nodes;
  spec.max_dim = std::max(spec.max_dim, base.N);

  Output out(out_path);
  out.stream() << "lambda,method,omega,relerr\n";
  for (double lambda : grid) {
    const GibbsProblem p = build_problem(base.A, vu, lambda);
    const double omega0 = gaussian_reference(p).Omega0;
    const double omega_exact = exact_quantities(p, spec).Omega;
    const double denom = std::abs(omega_exact - omega0);
    for (const auto& method : methods) {
      double omega = std::numeric_limits<double>::quiet_NaN();
      if (method == "bare1" || method == "bare2") {
        const int k = method == "bare2" ? 2 : 1;
        omega = omega0;
        for (int j = 1; j <= k; ++j)
          omega += std::pow(lambda, j) * omega_series.coeffs[j](0, 0);
      } else {
        const SigmaKind kind = parse_method(method);
        try {
          const ScfResult r = solve_dyson(p, kind);
          omega = free_energy_lw(p, r.G, lw_functional(kind, r.G, p.v));
        } catch (const Error& e) {
          // a breakdown at one grid point (lost positivity, divergence)
          // should not abort the survey
          std::cerr << "sweep: " << method << " at lambda=" << fmt(lambda) << ": " << e.what()
                    << "\n";
        }
      }
      out.stream() << fmt(lambda) << "," << method << "," << fmt(omega) << ","
                   << fmt(std::abs(omega - omega_exact) / denom) << "\n";
    }
  }
}

int cmd_verify(const std::string& suite) {
  if (suite != "paper") throw Error("unknown verification suite: " + suite);
  const GibbsProblem p = benchmark_problem();

  const ScfResult hf = solve_dyson(p, SigmaKind::HartreeFock);
  const double omega_hf = free_energy_lw(p, hf.G, lw_functional(SigmaKind::HartreeFock, hf.G, p.v));
  const ScfResult gf2 = solve_dyson(p, SigmaKind::GF2);
  const double omega_gf2 = free_energy_lw(p, gf2.G, lw_functional(SigmaKind::GF2, gf2.G, p.v));
  const double omega_exact = exact_quantities(p).Omega;

  char line[96];
  std::snprintf(line, sizeof(line), "Free energy 1st order = %.5f", omega_hf);
  std::string l1 = line;
  std::snprintf(line, sizeof(line), "Free energy 2nd order = %.5f", omega_gf2);
  std::string l2 = line;
  std::snprintf(line, sizeof(line), "Free energy exact     = %.5f", omega_exact);
  std::string l3 = line;
  std::cout << l1 << "\n" << l2 << "\n" << l3 << "\n";

  const bool ok = l1 == "Free energy 1st order = -2.74745" &&
                  l2 == "Free energy 2nd order = -2.75209" &&
                  l3 == "Free energy exact     = -2.75107";
  if (!ok) std::cerr << "verify: benchmark values do not match the expected output\n";
  return ok ? 0 : 1;
}

void cmd_gallery(int order_max, const std::string& out_path) {
  Output out(out_path);
  const FamilyKind kinds[] = {FamilyKind::Closed, FamilyKind::ConnectedClosed,
                              FamilyKind::GreensFunction, FamilyKind::SelfEnergy1PI,
                              FamilyKind::Skeleton2PI};
  for (FamilyKind kind : kinds) {
    const int min_order =
        (kind == FamilyKind::Closed || kind == FamilyKind::GreensFunction) ? 0 : 1;
    for (int n = min_order; n <= order_max; ++n) {
      const auto fam = enumerate_family(kind, n);
      std::vector<std::uint64_t> s_multiset;
      for (const auto& c : fam.classes) s_multiset.push_back(c.symmetry_factor);
      std::sort(s_multiset.begin(), s_multiset.end());
      out.stream() << "family=" << family_name(kind) << " order=" << n
                   << " classes=" << fam.classes.size() << " S_multiset={";
      for (std::size_t k = 0; k < s_multiset.size(); ++k)
        out.stream() << (k ? "," : "") << s_multiset[k];
      out.stream() << "}\n";
      for (const auto& c : fam.classes)
        out.stream() << to_string(c.representative) << "; S=" << c.symmetry_factor << "\n";
    }
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"many-body perturbation theory for finite-dimensional Gibbs measures"};
  app.require_subcommand(1);

  std::string kind = "closed", quantity = "g", problem_path, out_path, method = "hf";
  std::string grid_spec = "log:1e-3:1:25", methods_csv = "hf,gf2,gw,bare1,bare2";
  std::string suite = "paper";
  int order = 1, order_max = 3, nodes = 60, max_iter = 100;
  double damping = 1.0, tol = 1e-10;
  std::vector<std::string> mc;

  auto* c_enum = app.add_subcommand("enumerate", "enumerate diagram classes of a family");
  c_enum->add_option("--kind", kind, "closed|connected|greens|1pi|2pi")->required();
  c_enum->add_option("--order", order, "diagram order")->required();
  c_enum->add_option("--out", out_path, "output path (default stdout)");

  auto* c_series = app.add_subcommand("series", "bare power-series coefficients");
  c_series->add_option("--quantity", quantity, "z|omega|g|sigma")->required();
  c_series->add_option("--order", order, "truncation order")->required();
  c_series->add_option("--problem", problem_path, "problem JSON file")->required();
  c_series->add_option("--out", out_path, "output path (default stdout)");

  auto* c_scf = app.add_subcommand("scf", "self-consistent Green's function solve");
  c_scf->add_option("--problem", problem_path, "problem JSON file")->required();
  c_scf->add_option("--method", method, "hf|gf2|gw")->required();
  c_scf->add_option("--damping", damping, "mixing parameter in (0,1]");
  c_scf->add_option("--tol", tol, "relative-change stopping tolerance");
  c_scf->add_option("--max-iter", max_iter, "iteration cap");
  c_scf->add_option("--out", out_path, "output path (default stdout)");

  auto* c_sweep = app.add_subcommand("sweep", "free-energy error sweep over the coupling");
  c_sweep->add_option("--problem", problem_path, "problem JSON file")->required();
  c_sweep->add_option("--lambda-grid", grid_spec, "log:<lo>:<hi>:<count> or lin:...");
  c_sweep->add_option("--methods", methods_csv, "comma list of hf,gf2,gw,bare1,bare2");
  c_sweep->add_option("--nodes", nodes, "quadrature nodes per dimension");
  c_sweep->add_option("--out", out_path, "output path (default stdout)");

  auto* c_oracle = app.add_subcommand("oracle", "quadrature reference values");
  c_oracle->add_option("--problem", problem_path, "problem JSON file")->required();
  c_oracle->add_option("--nodes", nodes, "quadrature nodes per dimension");
  c_oracle->add_option("--mc", mc, "Monte Carlo cross-check: SAMPLES SEED")->expected(2);
  c_oracle->add_option("--out", out_path, "output path (default stdout)");

  auto* c_verify = app.add_subcommand("verify", "reproduce the benchmark free energies");
  c_verify->add_option("--suite", suite, "verification suite (paper)");

  auto* c_gallery = app.add_subcommand("gallery", "class counts and representatives");
  c_gallery->add_option("--order-max", order_max, "largest order (<= 4)");
  c_gallery->add_option("--out", out_path, "output path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_enum->parsed()) cmd_enumerate(kind, order, out_path);
    if (c_series->parsed()) cmd_series(quantity, order, problem_path, out_path);
    if (c_scf->parsed()) cmd_scf(problem_path, method, damping, tol, max_iter, out_path);
    if (c_oracle->parsed()) cmd_oracle(problem_path, nodes, mc, out_path);
    if (c_sweep->parsed()) cmd_sweep(problem_path, grid_spec, methods_csv, nodes, out_path);
    if (c_verify->parsed()) return cmd_verify(suite);
    if (c_gallery->parsed()) {
      if (order_max > 4) throw OrderTooLarge("gallery supports orders up to 4");
      cmd_gallery(order_max, out_path);
    }
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace mbpt::cli
