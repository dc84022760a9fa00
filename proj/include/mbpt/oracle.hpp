#pragma once
#include <cstdint>
#include <vector>

#include "mbpt/model.hpp"

namespace mbpt {

struct QuadratureSpec {
  int nodes_per_dim = 60;
  int max_dim = 4;
};

struct ExactQuantities {
  double Z = 0.0;
  double Z_over_Z0 = 0.0;
  double Omega = 0.0;
  double E = 0.0;
  Matrix G;
};

// Reference values for Z, Omega, G and the internal energy from one
// tensor-product Gauss-Hermite pass after Cholesky whitening (x = L^{-T} y
// with A = L L^T turns the Gaussian factor into exp(-|y|^2/2)).
// Throws DimensionTooLarge or GridBudgetExceeded.
ExactQuantities exact_quantities(const GibbsProblem& p, const QuadratureSpec& spec = {});

// Gaussian moment <x_{a1} ... x_{am}>_0 via the pairing sum over products of
// G0 entries (zero for odd m).  Indices are 0-based coordinates.
double gaussian_moment(const GibbsProblem& p, const std::vector<int>& multi_index);

// The same moment from quadrature with the interaction switched off; the
// independent cross-check for the pairing sum.
double gaussian_moment_quadrature(const GibbsProblem& p, const std::vector<int>& multi_index,
                                  const QuadratureSpec& spec = {});

struct MonteCarloResult {
  double z_over_z0 = 0.0;
  double z_over_z0_stderr = 0.0;
  Matrix G;
  Matrix G_stderr;
  long samples = 0;
  std::uint64_t seed = 0;
};

// Importance sampling from N(0, A^{-1}): Z/Z0 is the mean interaction weight
// exp(-U(X)) and G the weighted second moment.  Work is split into 64 fixed
// chunks with per-chunk generators (mt19937_64 + explicit Box-Muller) and
// accumulated in chunk order, so results are identical for any thread count.
MonteCarloResult monte_carlo(const GibbsProblem& p, long samples, std::uint64_t seed,
                             int n_threads = 1);

// Nodes and weights for the weight function exp(-x^2) via Golub-Welsch.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace mbpt
