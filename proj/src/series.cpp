#include "mbpt/series.hpp"

namespace mbpt {

PowerSeries PowerSeries::zeros(int rows, int cols, int max_order) {
  PowerSeries s;
  s.coeffs.assign(max_order + 1, Matrix::Zero(rows, cols));
  return s;
}

PowerSeries PowerSeries::constant(const Matrix& c0, int max_order) {
  PowerSeries s = zeros(static_cast<int>(c0.rows()), static_cast<int>(c0.cols()), max_order);
  s.coeffs[0] = c0;
  return s;
}

PowerSeries PowerSeries::operator+(const PowerSeries& o) const {
  const int k = std::min(max_order(), o.max_order());
  PowerSeries s = zeros(rows(), cols(), k);
  for (int i = 0; i <= k; ++i) s.coeffs[i] = coeffs[i] + o.coeffs[i];
  return s;
}

PowerSeries PowerSeries::operator-(const PowerSeries& o) const {
  const int k = std::min(max_order(), o.max_order());
  PowerSeries s = zeros(rows(), cols(), k);
  for (int i = 0; i <= k; ++i) s.coeffs[i] = coeffs[i] - o.coeffs[i];
  return s;
}

PowerSeries PowerSeries::scaled(double f) const {
  PowerSeries s = *this;
  for (auto& c : s.coeffs) c *= f;
  return s;
}

PowerSeries PowerSeries::mul(const PowerSeries& o) const {
  if (cols() != o.rows()) throw DimensionMismatch("series product dimensions disagree");
  const int k = std::min(max_order(), o.max_order());
  PowerSeries s = zeros(rows(), o.cols(), k);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= i; ++j) s.coeffs[i] += coeffs[j] * o.coeffs[i - j];
  return s;
}

PowerSeries PowerSeries::inverse() const {
  if (rows() != cols()) throw DimensionMismatch("series inverse needs square coefficients");
  Eigen::FullPivLU<Matrix> lu(coeffs[0]);
  if (!lu.isInvertible()) throw Error("order-0 series coefficient is not invertible");
  const Matrix b0 = lu.inverse();
  PowerSeries s = zeros(rows(), cols(), max_order());
  s.coeffs[0] = b0;
  for (int k = 1; k <= max_order(); ++k) {
    Matrix acc = Matrix::Zero(rows(), cols());
    for (int j = 1; j <= k; ++j) acc += coeffs[j] * s.coeffs[k - j];
    s.coeffs[k] = -b0 * acc;
  }
  return s;
}

PowerSeries PowerSeries::exp_series() const {
  if (rows() != cols()) throw DimensionMismatch("series exponential needs square coefficients");
  PowerSeries result = constant(Matrix::Identity(rows(), cols()), max_order());
  PowerSeries term = result;
  for (int k = 1; k <= max_order(); ++k) {
    term = term.mul(*this).scaled(1.0 / k);
    result = result + term;
  }
  return result;
}

Matrix PowerSeries::eval(double lambda) const {
  Matrix acc = Matrix::Zero(rows(), cols());
  for (int k = max_order(); k >= 0; --k) acc = lambda * acc + coeffs[k];
  return acc;
}

PowerSeries bare_series(BareQuantity q, const GibbsProblem& p, int max_order,
                        int enumeration_cap) {
  const GaussianReference ref = gaussian_reference(p);
  const Matrix vu = p.v_unit();
  const bool scalar = q == BareQuantity::ZOverZ0 || q == BareQuantity::OmegaMinusOmega0;
  PowerSeries s = PowerSeries::zeros(scalar ? 1 : p.N, scalar ? 1 : p.N, max_order);

  for (int k = 0; k <= max_order; ++k) {
    switch (q) {
      case BareQuantity::ZOverZ0:
        s.coeffs[k] = family_sum(enumerate_family(FamilyKind::Closed, k, enumeration_cap),
                                 ref.G0, vu);
        break;
      case BareQuantity::OmegaMinusOmega0:
        s.coeffs[k] = -family_sum(
            enumerate_family(FamilyKind::ConnectedClosed, k, enumeration_cap), ref.G0, vu);
        break;
      case BareQuantity::G:
        s.coeffs[k] = family_sum(enumerate_family(FamilyKind::GreensFunction, k, enumeration_cap),
                                 ref.G0, vu);
        break;
      case BareQuantity::Sigma:
        s.coeffs[k] = family_sum(enumerate_family(FamilyKind::SelfEnergy1PI, k, enumeration_cap),
                                 ref.G0, vu);
        break;
    }
  }
  return s;
}

namespace {

// Sums a skeleton's bold amplitude contribution at fixed total order by
// distributing the leftover order over its edges as bare-G-series orders.
void add_skeleton_contribution(const Diagram& skel, double weight, const PowerSeries& g_series,
                               const Matrix& vu, int budget, Matrix& acc) {
  const auto elist = internal_edges(skel);
  std::vector<int> assign(elist.size(), 0);
  auto rec = [&](auto&& self, std::size_t e, int left) -> void {
    if (e + 1 == elist.size()) {
      assign[e] = left;
      EdgeMatrixMap per_edge;
      for (std::size_t t = 0; t < elist.size(); ++t)
        per_edge.emplace(elist[t], g_series.coeffs[assign[t]]);
      acc += weight * evaluate_with_edge_assignment(skel, per_edge, vu);
      return;
    }
    for (int o = 0; o <= left; ++o) {
      assign[e] = o;
      self(self, e + 1, left - o);
    }
  };
  if (!elist.empty()) rec(rec, 0, budget);
}

}  // namespace

BoldCheckReport bold_series_check(const GibbsProblem& p, int max_order) {
  if (max_order > 3)
    throw OrderTooLarge("bold series check supports orders up to 3 by default");
  const Matrix vu = p.v_unit();
  const PowerSeries g = bare_series(BareQuantity::G, p, max_order);
  const PowerSeries sigma = bare_series(BareQuantity::Sigma, p, max_order);

  BoldCheckReport report;
  report.deviation_per_order.assign(max_order + 1, 0.0);
  for (int m = 1; m <= max_order; ++m) {
    Matrix bold = Matrix::Zero(p.N, p.N);
    for (int sk_order = 1; sk_order <= m; ++sk_order) {
      const auto fam = enumerate_family(FamilyKind::Skeleton2PI, sk_order);
      for (const auto& c : fam.classes)
        add_skeleton_contribution(c.representative, 1.0 / static_cast<double>(c.symmetry_factor),
                                  g, vu, m - sk_order, bold);
    }
    report.deviation_per_order[m] = (bold - sigma.coeffs[m]).cwiseAbs().maxCoeff();
  }
  return report;
}

}  // namespace mbpt
