#pragma once
#include <vector>

#include "mbpt/amplitudes.hpp"
#include "mbpt/model.hpp"

namespace mbpt {

// Formal power series in the coupling constant with matrix coefficients
// (1x1 for scalar quantities).  All arithmetic is exact truncation algebra.
struct PowerSeries {
  std::vector<Matrix> coeffs;  // orders 0..max_order

  int max_order() const { return static_cast<int>(coeffs.size()) - 1; }
  int rows() const { return static_cast<int>(coeffs.at(0).rows()); }
  int cols() const { return static_cast<int>(coeffs.at(0).cols()); }

  static PowerSeries zeros(int rows, int cols, int max_order);
  static PowerSeries constant(const Matrix& c0, int max_order);

  PowerSeries operator+(const PowerSeries& o) const;
  PowerSeries operator-(const PowerSeries& o) const;
  PowerSeries scaled(double s) const;
  // truncated Cauchy product, (a*b)_k = sum_{j<=k} a_j b_{k-j}
  PowerSeries mul(const PowerSeries& o) const;
  // multiplicative inverse; requires an invertible order-0 coefficient
  PowerSeries inverse() const;
  // series exponential sum_k S^k / k! (square coefficients)
  PowerSeries exp_series() const;

  Matrix eval(double lambda) const;
};

enum class BareQuantity { ZOverZ0, OmegaMinusOmega0, G, Sigma };

// Order-by-order bare diagrammatic expansion.  Coefficients are evaluated
// with the unit-coupling interaction, so coefficient k must be scaled by
// lambda^k (eval does this).
PowerSeries bare_series(BareQuantity q, const GibbsProblem& p, int max_order,
                        int enumeration_cap = 4);

// Rebuilds the self-energy series from bold skeleton diagrams whose edges
// carry the bare Green's function series, and reports the elementwise
// deviation from the bare self-energy series at each order.
struct BoldCheckReport {
  std::vector<double> deviation_per_order;  // index = order
};
BoldCheckReport bold_series_check(const GibbsProblem& p, int max_order = 3);

}  // namespace mbpt
