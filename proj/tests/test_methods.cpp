#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "mbpt/amplitudes.hpp"
#include "mbpt/methods.hpp"
#include "mbpt/oracle.hpp"

using namespace mbpt;
using namespace fixtures;

namespace {

Matrix random_spd_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
  Matrix G = B * B.transpose() / n + 0.5 * Matrix::Identity(n, n);
  return G / G.norm() * std::sqrt(static_cast<double>(n));  // unit-scale entries
}

Matrix random_symmetric(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
  return scale * 0.5 * (B + B.transpose());
}

}  // namespace

TEST_CASE("self-energy ansatz closed forms") {
  const GibbsProblem p = benchmark_problem();
  const Matrix G0 = gaussian_reference(p).G0;

  SUBCASE("first order matches the reference iteration formula") {
    const Vector rho = G0.diagonal();
    const Matrix expected =
        Matrix((-0.5 * (p.v * rho)).asDiagonal()) - p.v.cwiseProduct(G0);
    CHECK((sigma_ansatz(SigmaKind::HartreeFock, G0, p.v) - expected).norm() < 1e-14);
  }
  SUBCASE("second order matches the explicit double sum") {
    const Matrix got = sigma_order2(G0, p.v);
    for (int i = 0; i < p.N; ++i)
      for (int j = 0; j < p.N; ++j) {
        double expected = 0.0;
        for (int k = 0; k < p.N; ++k)
          for (int l = 0; l < p.N; ++l) {
            expected += 0.5 * G0(i, j) * p.v(i, k) * G0(k, l) * G0(k, l) * p.v(l, j);
            expected += p.v(i, k) * G0(k, j) * G0(k, l) * G0(l, i) * p.v(j, l);
          }
        CHECK(got(i, j) == doctest::Approx(expected).epsilon(1e-12));
      }
  }
  SUBCASE("zero interaction gives zero self-energy") {
    const Matrix z = Matrix::Zero(4, 4);
    for (SigmaKind kind : {SigmaKind::HartreeFock, SigmaKind::GF2, SigmaKind::GW})
      CHECK(sigma_ansatz(kind, G0, z).norm() == 0.0);
  }
  SUBCASE("screened exchange reduces to bare exchange as the coupling vanishes") {
    // || Sigma_GW - Sigma_1 || = O(lambda^2) while the terms are O(lambda)
    double prev = 0.0;
    for (double lambda : {1e-3, 1e-4}) {
      const GibbsProblem q = build_problem(tridiag4(), Matrix::Identity(4, 4), lambda);
      const double dev =
          (sigma_ansatz(SigmaKind::GW, G0, q.v) - sigma_order1(G0, q.v)).norm();
      if (prev != 0.0) {
        const double ratio = prev / dev;  // should be ~(1e-3/1e-4)^2 = 100
        CHECK(ratio > 50.0);
        CHECK(ratio < 200.0);
      }
      prev = dev;
    }
  }
  SUBCASE("ansatz outputs stay symmetric") {
    std::mt19937_64 rng(88);
    const Matrix G = random_spd_unit(4, rng);
    const Matrix v = random_symmetric(4, rng, 0.3);
    for (SigmaKind kind : {SigmaKind::HartreeFock, SigmaKind::GF2, SigmaKind::GW}) {
      const Matrix s = sigma_ansatz(kind, G, v);
      CHECK((s - s.transpose()).norm() < 1e-12);
    }
  }
}

TEST_CASE("bold closed forms agree with the skeleton family sums") {
  std::mt19937_64 rng(17);
  const Matrix G = random_spd_unit(4, rng);
  const Matrix v = random_symmetric(4, rng, 0.4);
  const Matrix s1 = family_sum(enumerate_family(FamilyKind::Skeleton2PI, 1), G, v);
  CHECK((s1 - sigma_order1(G, v)).cwiseAbs().maxCoeff() < 1e-12);
  const Matrix s2 = family_sum(enumerate_family(FamilyKind::Skeleton2PI, 2), G, v);
  CHECK((s2 - sigma_order2(G, v)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Dyson iteration") {
  SUBCASE("free problem converges immediately") {
    const GibbsProblem p = build_problem(tridiag4(), Matrix::Zero(4, 4), 0.0);
    const ScfResult r = solve_dyson(p, SigmaKind::HartreeFock);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK((r.G - gaussian_reference(p).G0).norm() < 1e-14);
  }
  SUBCASE("benchmark problem self-consistency") {
    const GibbsProblem p = benchmark_problem();
    const ScfResult r = solve_dyson(p, SigmaKind::HartreeFock);
    CHECK(r.converged);
    CHECK(r.residual_history.back() < 1e-10);
    const Matrix rhs = (p.A - sigma_ansatz(SigmaKind::HartreeFock, r.G, p.v))
                           .llt()
                           .solve(Matrix::Identity(4, 4));
    CHECK((r.G - rhs).norm() / r.G.norm() < 1e-9);
  }
  SUBCASE("iteration cap reports non-convergence") {
    ScfOptions opts;
    opts.max_iter = 2;
    const ScfResult r = solve_dyson(benchmark_problem(), SigmaKind::GF2, opts);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 2);
  }
  SUBCASE("damping still reaches the same fixed point") {
    ScfOptions opts;
    opts.damping = 0.5;
    opts.max_iter = 400;
    const ScfResult a = solve_dyson(benchmark_problem(), SigmaKind::HartreeFock, opts);
    const ScfResult b = solve_dyson(benchmark_problem(), SigmaKind::HartreeFock);
    CHECK(a.converged);
    CHECK((a.G - b.G).norm() < 1e-8);
  }
  SUBCASE("GW solve is self-consistent on the benchmark problem") {
    const GibbsProblem p = benchmark_problem();
    const ScfResult r = solve_dyson(p, SigmaKind::GW);
    CHECK(r.converged);
    const Matrix rhs =
        (p.A - sigma_ansatz(SigmaKind::GW, r.G, p.v)).llt().solve(Matrix::Identity(4, 4));
    CHECK((r.G - rhs).norm() / r.G.norm() < 1e-9);
    // the screened free energy lands between the Gaussian and exact values
    const double omega = free_energy_lw(p, r.G, lw_functional(SigmaKind::GW, r.G, p.v));
    CHECK(omega > -2.8);
    CHECK(omega < -2.7);
  }
  SUBCASE("attractive coupling can break positivity") {
    Matrix A(1, 1), v(1, 1);
    A << 1.0;
    v << -10.0;
    const GibbsProblem p = build_problem(A, v, 1.0);
    CHECK_THROWS_AS(solve_dyson(p, SigmaKind::HartreeFock), LostPositivity);
  }
  SUBCASE("option validation") {
    ScfOptions opts;
    opts.damping = 1.5;
    CHECK_THROWS_AS(solve_dyson(benchmark_problem(), SigmaKind::HartreeFock, opts), Error);
    opts.damping = 0.0;
    CHECK_THROWS_AS(solve_dyson(benchmark_problem(), SigmaKind::HartreeFock, opts), Error);
  }
}

TEST_CASE("benchmark free energies from the Luttinger-Ward evaluation") {
  const GibbsProblem p = benchmark_problem();
  const ScfResult hf = solve_dyson(p, SigmaKind::HartreeFock);
  const double omega_hf = free_energy_lw(p, hf.G, lw_functional(SigmaKind::HartreeFock, hf.G, p.v));
  CHECK(std::abs(omega_hf - (-2.74745)) < 5e-5);

  const ScfResult gf2 = solve_dyson(p, SigmaKind::GF2);
  const double omega_gf2 = free_energy_lw(p, gf2.G, lw_functional(SigmaKind::GF2, gf2.G, p.v));
  CHECK(std::abs(omega_gf2 - (-2.75209)) < 5e-5);
}

TEST_CASE("Luttinger-Ward functional identities") {
  std::mt19937_64 rng(23);
  const Matrix G = random_spd_unit(4, rng);
  const Matrix v = random_symmetric(4, rng, 0.5);

  SUBCASE("trace shortcut per order") {
    CHECK(phi_order1(G, v) ==
          doctest::Approx(0.5 * (G * sigma_order1(G, v)).trace()).epsilon(1e-12));
    CHECK(phi_order2(G, v) ==
          doctest::Approx(0.25 * (G * sigma_order2(G, v)).trace()).epsilon(1e-12));
  }
  SUBCASE("zero coupling gives zero functional") {
    const Matrix z = Matrix::Zero(4, 4);
    for (SigmaKind kind : {SigmaKind::HartreeFock, SigmaKind::GF2, SigmaKind::GW})
      CHECK(lw_functional(kind, G, z) == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("free-energy formula collapses to Omega0 in the free case") {
    const GibbsProblem p = build_problem(tridiag4(), Matrix::Zero(4, 4), 0.0);
    const GaussianReference ref = gaussian_reference(p);
    CHECK(free_energy_lw(p, ref.G0, 0.0) == doctest::Approx(ref.Omega0).epsilon(1e-12));
  }
  SUBCASE("free energy rejects non-SPD G") {
    const GibbsProblem p = benchmark_problem();
    CHECK_THROWS_AS(free_energy_lw(p, Matrix(-Matrix::Identity(4, 4)), 0.0), NotSPD);
  }
}

TEST_CASE("screened-interaction failure modes") {
  const Matrix G = Matrix::Identity(3, 3);
  // I + 1/2 v (G.*G) = 0 for v = -2 I
  CHECK_THROWS_AS(sigma_ansatz(SigmaKind::GW, G, Matrix(-2.0 * Matrix::Identity(3, 3))),
                  SingularScreening);
  // a negative eigenvalue puts the log off the principal branch
  CHECK_THROWS_AS(lw_functional(SigmaKind::GW, G, Matrix(-20.0 * Matrix::Identity(3, 3))),
                  LogBranchFailure);
}

TEST_CASE("internal energy formula") {
  const GibbsProblem p = build_problem(tridiag4(), Matrix::Zero(4, 4), 0.0);
  const Matrix G0 = gaussian_reference(p).G0;
  CHECK(galitskii_migdal_energy(p, G0) == doctest::Approx(2.0).epsilon(1e-13));  // N/2
  // linear in G
  std::mt19937_64 rng(3);
  const Matrix X = random_spd_unit(4, rng), Y = random_spd_unit(4, rng);
  CHECK(galitskii_migdal_energy(p, X) + galitskii_migdal_energy(p, Y) ==
        doctest::Approx(galitskii_migdal_energy(p, X + Y) + 1.0).epsilon(1e-12));
}

TEST_CASE("matrix derivative of the functional recovers the ansatz") {
  std::mt19937_64 rng(4);
  const Matrix G = random_spd_unit(4, rng);
  const Matrix v = random_symmetric(4, rng, 0.3);
  CHECK(phi_derivability_check(SigmaKind::HartreeFock, G, v) < 1e-8);
  CHECK(phi_derivability_check(SigmaKind::GF2, G, v) < 1e-7);
  CHECK(phi_derivability_check(SigmaKind::GW, G, v) < 1e-7);
}

TEST_CASE("ring sum") {
  std::mt19937_64 rng(9);
  const Matrix G = random_spd_unit(3, rng);
  const Matrix v = random_symmetric(3, rng, 0.1);

  SUBCASE("ring-1 equals the first second-order term") {
    const Matrix expected = 0.5 * G.cwiseProduct(v * G.cwiseProduct(G) * v);
    CHECK((ring_term(G, v, 1) / 2.0 - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("truncation error is bounded by the geometric tail of the next term") {
    const Matrix S = G.cwiseProduct(G);
    const Matrix Ls = cholesky_factor(S);
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * Ls.transpose() * v * Ls));
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    REQUIRE(rho < 1.0);
    for (int k = 0; k <= 4; ++k) {
      const double tail_bound =
          (ring_term(G, v, k + 1) / std::pow(2.0, k + 1)).cwiseAbs().maxCoeff() / (1.0 - rho);
      CHECK(ring_sum_check(G, v, k) <= tail_bound * (1.0 + 1e-12) + 1e-15);
    }
  }
  SUBCASE("partial sums converge geometrically to the screened form") {
    double prev = ring_sum_check(G, v, 0);
    for (int k = 1; k <= 12 && prev > 1e-13; ++k) {
      const double dev = ring_sum_check(G, v, k);
      CHECK(dev < 0.5 * prev);  // spectral radius is well below 1/2 here
      prev = dev;
    }
    CHECK(ring_sum_check(G, v, 12) < 1e-12);
  }
  SUBCASE("divergent coupling is detected") {
    CHECK_THROWS_AS(ring_sum_check(G, Matrix(50.0 * Matrix::Identity(3, 3)), 3), DivergentSeries);
  }
}
