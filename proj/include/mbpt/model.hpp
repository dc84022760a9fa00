#pragma once
#include <Eigen/Dense>
#include <string>

#include "mbpt/errors.hpp"

namespace mbpt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Quartic Gibbs model on R^N: weight exp(-1/2 x^T A x - U(x)) with
// U(x) = 1/8 sum_ij v_ij x_i^2 x_j^2.  A is symmetric positive definite,
// v symmetric; the coupling scale lambda is folded into v at construction
// and kept separately only so that power-series code can work with the
// unit-coupling interaction.
struct GibbsProblem {
  Matrix A;        // symmetrized, validated SPD
  Matrix v;        // lambda * symmetrized v_raw
  double lambda;   // coupling scale folded into v
  int N;
  bool asym_warning = false;  // set if input asymmetry exceeded 1e-12 relative

  // Interaction with the coupling scale factored out (v / lambda; equal to v
  // when lambda == 0).  Series coefficients are computed with this matrix.
  Matrix v_unit() const { return lambda > 0.0 ? Matrix(v / lambda) : v; }
};

// Exact Gaussian (non-interacting) reference quantities.
struct GaussianReference {
  Matrix G0;      // A^{-1}
  double logZ0;   // (N/2) log(2 pi) - (1/2) log det A
  double Omega0;  // -logZ0
};

// Symmetrizes and validates the inputs; lambda is folded into v.
// Throws DimensionMismatch or NotPositiveDefinite.
GibbsProblem build_problem(const Matrix& A_raw, const Matrix& v_raw, double lambda);

GaussianReference gaussian_reference(const GibbsProblem& p);

// 1/2 x^T A x + 1/8 sum_ij v_ij x_i^2 x_j^2
double evaluate_potential(const GibbsProblem& p, const Vector& x);

// Cholesky factor of a symmetric positive definite matrix, with the pivot
// tolerance used for model validation (pivot >= 1e-12 * max|A|).
// Throws NotPositiveDefinite.
Matrix cholesky_factor(const Matrix& A);

double log_det_spd(const Matrix& A);  // via Cholesky; throws NotSPD

// Problem files: JSON object {"A": [[...]], "v": [[...]], "lambda": number}.
GibbsProblem load_problem(const std::string& path);
GibbsProblem parse_problem(const std::string& json_text);
std::string problem_to_json(const GibbsProblem& p);

}  // namespace mbpt
