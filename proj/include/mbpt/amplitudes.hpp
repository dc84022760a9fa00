#pragma once
#include <map>

#include "mbpt/diagram.hpp"
#include "mbpt/enumeration.hpp"
#include "mbpt/model.hpp"

namespace mbpt {

// Feynman amplitude of a diagram: one summation index per vertex side, a
// factor -v(a,b) per interaction line and a propagator factor per edge
// (internal edges only when the diagram is truncated).  Closed diagrams give
// a 1x1 matrix; two-external diagrams an NxN matrix indexed by the external
// labels.
Matrix evaluate(const Diagram& d, const Matrix& propagator, const Matrix& v);

// Same contraction with an edge-specific propagator on every
// propagator-bearing edge.  Keys are the matched pairs (a,b) with a < b; the
// matrix row index binds the side of the smaller half-edge id.
using EdgeMatrixMap = std::map<std::pair<int, int>, Matrix>;
Matrix evaluate_with_edge_assignment(const Diagram& d, const EdgeMatrixMap& per_edge,
                                     const Matrix& v);

// Sum of F/S over the classes of an enumerated family.
Matrix family_sum(const DiagramFamily& family, const Matrix& propagator, const Matrix& v);

}  // namespace mbpt
