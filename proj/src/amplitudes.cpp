#include "mbpt/amplitudes.hpp"

#include <array>

namespace mbpt {

namespace {

// Shared contraction kernel.  `edge_matrix` returns the propagator assigned
// to a (sorted) matched pair, or nullptr where the per-edge map is missing
// an entry.
template <typename EdgeMatrixFn>
Matrix contract(const Diagram& d, EdgeMatrixFn edge_matrix, const Matrix& v) {
  const int N = static_cast<int>(v.rows());
  if (v.cols() != N) throw DimensionMismatch("interaction matrix must be square");

  struct InternalEdge {
    int sa, sb;  // side indices bound by the edge (row binds the smaller id)
    const Matrix* M;
  };
  std::vector<InternalEdge> internal;
  // non-truncated external legs, indexed by external label (0 = "i", 1 = "j"):
  // (side index of the attached slot, matrix)
  std::array<std::pair<int, const Matrix*>, 2> legs{{{-1, nullptr}, {-1, nullptr}}};
  const Matrix* bridge = nullptr;  // edge joining the two externals directly

  for (const auto& [a, b] : edges(d)) {
    const bool a_ext = d.is_external(a), b_ext = d.is_external(b);
    if (!a_ext && !b_ext) {
      const Matrix* M = edge_matrix(a, b);
      if (!M) throw MissingEdgeAssignment("no propagator assigned to edge (" +
                                          std::to_string(a) + "," + std::to_string(b) + ")");
      if (M->rows() != N || M->cols() != N)
        throw DimensionMismatch("edge propagator has wrong dimensions");
      internal.push_back({d.side_index(a), d.side_index(b), M});
    } else if (a_ext && b_ext) {
      if (!d.truncated) {
        bridge = edge_matrix(a, b);
        if (!bridge) throw MissingEdgeAssignment("no propagator assigned to the external edge");
      }
    } else if (!d.truncated) {
      const int slot = a_ext ? b : a;
      const int ext = a_ext ? a : b;
      const Matrix* M = edge_matrix(std::min(a, b), std::max(a, b));
      if (!M) throw MissingEdgeAssignment("no propagator assigned to an external edge");
      legs[ext - d.ext_i()] = {d.side_index(slot), M};
    }
  }

  // slots whose vertex-side index is pinned to an external label (truncated)
  int pin_i = -1, pin_j = -1;
  if (d.truncated) {
    pin_i = d.side_index(d.partner[d.ext_i()]);
    pin_j = d.side_index(d.partner[d.ext_j()]);
  }

  const bool scalar = d.n_external == 0;
  Matrix result = Matrix::Zero(scalar ? 1 : N, scalar ? 1 : N);

  const int n_sides = 2 * d.order;
  std::vector<int> idx(n_sides, 0);
  while (true) {
    double base = 1.0;
    for (int k = 0; k < d.order; ++k) base *= -v(idx[2 * k], idx[2 * k + 1]);
    for (const auto& e : internal) base *= (*e.M)(idx[e.sa], idx[e.sb]);

    if (scalar) {
      result(0, 0) += base;
    } else if (d.truncated) {
      result(idx[pin_i], idx[pin_j]) += base;
    } else if (bridge) {
      result += base * (*bridge);
    } else {
      // leg factors are M(slot side, free index) since slot ids precede
      // external ids; external "i" indexes rows of the result
      const auto fi = legs[0].second->row(idx[legs[0].first]);
      const auto fj = legs[1].second->row(idx[legs[1].first]);
      result += base * fi.transpose() * fj;
    }

    int p = 0;
    while (p < n_sides && ++idx[p] == N) idx[p++] = 0;
    if (p == n_sides) break;
  }
  return result;
}

}  // namespace

Matrix evaluate(const Diagram& d, const Matrix& propagator, const Matrix& v) {
  if (propagator.rows() != v.rows() || propagator.cols() != v.cols())
    throw DimensionMismatch("propagator and interaction dimensions disagree");
  return contract(d, [&](int, int) { return &propagator; }, v);
}

Matrix evaluate_with_edge_assignment(const Diagram& d, const EdgeMatrixMap& per_edge,
                                     const Matrix& v) {
  return contract(
      d,
      [&](int a, int b) -> const Matrix* {
        auto it = per_edge.find({a, b});
        return it == per_edge.end() ? nullptr : &it->second;
      },
      v);
}

Matrix family_sum(const DiagramFamily& family, const Matrix& propagator, const Matrix& v) {
  const bool two_ext = family.kind == FamilyKind::GreensFunction ||
                       family.kind == FamilyKind::SelfEnergy1PI ||
                       family.kind == FamilyKind::Skeleton2PI;
  const int N = static_cast<int>(v.rows());
  Matrix sum = Matrix::Zero(two_ext ? N : 1, two_ext ? N : 1);
  for (const auto& c : family.classes)
    sum += evaluate(c.representative, propagator, v) / static_cast<double>(c.symmetry_factor);
  return sum;
}

}  // namespace mbpt
