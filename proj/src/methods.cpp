#include "mbpt/methods.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace mbpt {

Matrix sigma_hartree(const Matrix& G, const Matrix& v) {
  const Vector rho = G.diagonal();
  return Matrix((-0.5 * (v * rho)).asDiagonal());
}

Matrix sigma_fock(const Matrix& G, const Matrix& v) { return -v.cwiseProduct(G); }

Matrix sigma_order1(const Matrix& G, const Matrix& v) {
  return sigma_hartree(G, v) + sigma_fock(G, v);
}

Matrix sigma_order2(const Matrix& G, const Matrix& v) {
  const int n = static_cast<int>(G.rows());
  const Matrix G2 = G.cwiseProduct(G);
  Matrix s = 0.5 * G.cwiseProduct(v * G2 * v);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) acc += v(i, k) * G(k, j) * G(k, l) * G(l, i) * v(j, l);
      s(i, j) += acc;
    }
  return s;
}

Matrix screened_interaction(const Matrix& G, const Matrix& v) {
  const int n = static_cast<int>(G.rows());
  const Matrix M = Matrix::Identity(n, n) + 0.5 * v * G.cwiseProduct(G);
  Eigen::FullPivLU<Matrix> lu(M);
  if (!lu.isInvertible()) throw SingularScreening("I + 1/2 v (G.*G) is singular");
  return lu.solve(v);
}

Matrix sigma_ansatz(SigmaKind kind, const Matrix& G, const Matrix& v) {
  switch (kind) {
    case SigmaKind::HartreeFock:
      return sigma_order1(G, v);
    case SigmaKind::GF2:
      return sigma_order1(G, v) + sigma_order2(G, v);
    case SigmaKind::GW:
      return sigma_hartree(G, v) - G.cwiseProduct(screened_interaction(G, v));
  }
  throw Error("unknown self-energy ansatz");
}

double phi_order1(const Matrix& G, const Matrix& v) {
  const Vector rho = G.diagonal();
  return -0.25 * rho.dot(v * rho) - 0.5 * G.cwiseProduct(G).cwiseProduct(v).sum();
}

double phi_order2(const Matrix& G, const Matrix& v) {
  const int n = static_cast<int>(G.rows());
  const Matrix G2 = G.cwiseProduct(G);
  double phi = 0.125 * G2.cwiseProduct(v * G2 * v).sum();
  double ex = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          ex += v(i, k) * v(j, l) * G(i, j) * G(k, j) * G(k, l) * G(l, i);
  return phi + 0.25 * ex;
}

namespace {

// log det [I + 1/2 v (G.*G)] through the symmetric similarity transform
// I + 1/2 Ls^T v Ls with G.*G = Ls Ls^T; keeps the log on the real branch.
double log_det_screening(const Matrix& G, const Matrix& v) {
  Matrix S = G.cwiseProduct(G);
  Matrix Ls;
  try {
    Ls = cholesky_factor(S);
  } catch (const NotPositiveDefinite&) {
    throw LogBranchFailure("G .* G is not positive definite");
  }
  const int n = static_cast<int>(G.rows());
  const Matrix M = Matrix::Identity(n, n) + 0.5 * Ls.transpose() * v * Ls;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double mu = es.eigenvalues()(k);
    if (mu <= 0.0) throw LogBranchFailure("screening log has a nonpositive eigenvalue");
    acc += std::log(mu);
  }
  return acc;
}

}  // namespace

double lw_functional(SigmaKind kind, const Matrix& G, const Matrix& v) {
  switch (kind) {
    case SigmaKind::HartreeFock:
      return phi_order1(G, v);
    case SigmaKind::GF2:
      return phi_order1(G, v) + phi_order2(G, v);
    case SigmaKind::GW: {
      const Vector rho = G.diagonal();
      const double phi_h = -0.25 * rho.dot(v * rho);
      return phi_h - log_det_screening(G, v);
    }
  }
  throw Error("unknown self-energy ansatz");
}

double free_energy_lw(const GibbsProblem& p, const Matrix& G, double phi) {
  if (G.rows() != p.N || G.cols() != p.N) throw DimensionMismatch("G has wrong dimensions");
  const double logdet = log_det_spd(0.5 * (G + G.transpose()));
  const double phi0 = p.N * std::log(2.0 * M_PI * std::exp(1.0));
  return 0.5 * ((p.A * G).trace() - logdet - (phi + phi0));
}

double galitskii_migdal_energy(const GibbsProblem& p, const Matrix& G) {
  if (G.rows() != p.N || G.cols() != p.N) throw DimensionMismatch("G has wrong dimensions");
  return 0.25 * ((p.A * G).trace() + p.N);
}

ScfResult solve_dyson(const GibbsProblem& p, SigmaKind kind, const ScfOptions& opts) {
  if (opts.damping <= 0.0 || opts.damping > 1.0)
    throw Error("damping must lie in (0, 1]");
  if (opts.max_iter < 1 || opts.tol <= 0.0) throw Error("invalid solver options");
  ScfResult r;
  r.G = p.A.llt().solve(Matrix::Identity(p.N, p.N));
  for (int it = 1; it <= opts.max_iter; ++it) {
    r.Sigma = sigma_ansatz(kind, r.G, p.v);
    const Matrix denom = p.A - r.Sigma;
    Eigen::LLT<Matrix> llt(0.5 * (denom + denom.transpose()));
    if (llt.info() != Eigen::Success)
      throw LostPositivity("A - Sigma lost positive definiteness at iteration " +
                           std::to_string(it));
    const Matrix g_new = llt.solve(Matrix::Identity(p.N, p.N));
    const double res = (r.G - g_new).norm() / r.G.norm();
    r.residual_history.push_back(res);
    r.iterations = it;
    Matrix mixed = (1.0 - opts.damping) * r.G + opts.damping * g_new;
    r.G = 0.5 * (mixed + mixed.transpose());
    if (res < opts.tol) {
      r.converged = true;
      break;
    }
  }
  r.Sigma = sigma_ansatz(kind, r.G, p.v);
  return r;
}

double phi_derivability_check(SigmaKind kind, const Matrix& G, const Matrix& v, double eps) {
  const int n = static_cast<int>(G.rows());
  const Matrix sigma = sigma_ansatz(kind, G, v);
  double max_dev = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Matrix dir = Matrix::Zero(n, n);
      dir(i, j) += 1.0;
      dir(j, i) += 1.0;  // E^(ii) has a 2 on the diagonal
      const Matrix gp = G + eps * dir;
      const Matrix gm = G - eps * dir;
      try {
        cholesky_factor(gp);
        cholesky_factor(gm);
      } catch (const NotPositiveDefinite&) {
        throw PerturbationBreaksSPD("G +/- eps E is no longer positive definite");
      }
      const double fd = 0.5 * (lw_functional(kind, gp, v) - lw_functional(kind, gm, v)) / (2.0 * eps);
      max_dev = std::max(max_dev, std::abs(fd - sigma(i, j)));
    }
  return max_dev;
}

Matrix ring_term(const Matrix& G, const Matrix& v, int k) {
  const int n = static_cast<int>(G.rows());
  Matrix pol = Matrix::Identity(n, n);
  const Matrix step = -v * G.cwiseProduct(G);
  for (int t = 0; t < k; ++t) pol = pol * step;
  return -G.cwiseProduct(pol * v);
}

double ring_sum_check(const Matrix& G, const Matrix& v, int k_max) {
  // spectral radius of 1/2 v (G.*G) via the symmetric similarity transform
  const Matrix S = G.cwiseProduct(G);
  Matrix Ls;
  try {
    Ls = cholesky_factor(S);
  } catch (const NotPositiveDefinite&) {
    throw DivergentSeries("G .* G is not positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * Ls.transpose() * v * Ls);
  const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  if (radius >= 1.0)
    throw DivergentSeries("ring series spectral radius " + std::to_string(radius) + " >= 1");

  const int n = static_cast<int>(G.rows());
  Matrix partial = Matrix::Zero(n, n);
  for (int k = 0; k <= k_max; ++k) partial += ring_term(G, v, k) / std::pow(2.0, k);
  const Matrix closed = -G.cwiseProduct(screened_interaction(G, v));
  return (partial - closed).cwiseAbs().maxCoeff();
}

}  // namespace mbpt
