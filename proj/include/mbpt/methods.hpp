#pragma once
#include <vector>

#include "mbpt/model.hpp"

namespace mbpt {

enum class SigmaKind { HartreeFock, GF2, GW };

// Bold self-energy pieces as closed forms in G and v.
Matrix sigma_hartree(const Matrix& G, const Matrix& v);  // -1/2 diag(v diag G)
Matrix sigma_fock(const Matrix& G, const Matrix& v);     // -(v .* G)
Matrix sigma_order1(const Matrix& G, const Matrix& v);
Matrix sigma_order2(const Matrix& G, const Matrix& v);

// Screened interaction W = [I + 1/2 v (G.*G)]^{-1} v (tolerates singular v).
// Throws SingularScreening.
Matrix screened_interaction(const Matrix& G, const Matrix& v);

Matrix sigma_ansatz(SigmaKind kind, const Matrix& G, const Matrix& v);

// Luttinger-Ward pieces; the order-k terms also satisfy the trace shortcut
// Phi_k = 1/(2k) Tr(G Sigma_k).
double phi_order1(const Matrix& G, const Matrix& v);
double phi_order2(const Matrix& G, const Matrix& v);
double lw_functional(SigmaKind kind, const Matrix& G, const Matrix& v);

// Omega = 1/2 Tr(A G) - 1/2 log det G - 1/2 (Phi + N log(2 pi e)).
double free_energy_lw(const GibbsProblem& p, const Matrix& G, double phi);

// E = 1/4 Tr(A G + I).
double galitskii_migdal_energy(const GibbsProblem& p, const Matrix& G);

struct ScfOptions {
  double damping = 1.0;  // undamped matches the plain Dyson iteration
  double tol = 1e-10;
  int max_iter = 100;
};

struct ScfResult {
  Matrix G;
  Matrix Sigma;
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
};

// Damped fixed-point iteration G <- (1-a) G + a (A - Sigma_ans[G,v])^{-1}
// starting from A^{-1}; G is symmetrized each step.  A non-invertible or
// non-SPD update throws LostPositivity; hitting max_iter returns the last
// iterate with converged = false.
ScfResult solve_dyson(const GibbsProblem& p, SigmaKind kind, const ScfOptions& opts = {});

// Max over (i,j) of |central finite difference of Phi - Sigma_ans(i,j)|,
// with the symmetric perturbation direction E^(ij).  Throws
// PerturbationBreaksSPD.
double phi_derivability_check(SigmaKind kind, const Matrix& G, const Matrix& v,
                              double eps = 1e-5);

// k-th ring diagram amplitude -G .* ([-v (G.*G)]^k v); its symmetry factor
// in the ring sum is 2^k.
Matrix ring_term(const Matrix& G, const Matrix& v, int k);

// Deviation between the partial ring sum up to k_max and the closed-form
// -G .* W; shrinks geometrically in k_max.  Throws DivergentSeries when the
// spectral radius of 1/2 v (G.*G) reaches one.
double ring_sum_check(const Matrix& G, const Matrix& v, int k_max);

}  // namespace mbpt
