#pragma once
#include "mbpt/diagram.hpp"
#include "mbpt/model.hpp"

// Named diagrams used across the tests.  Slot convention: vertex k owns
// slots 4k..4k+3, side 1 = {4k, 4k+1}, side 2 = {4k+2, 4k+3}; externals are
// the two largest ids.
namespace fixtures {

using mbpt::Diagram;
using mbpt::from_pairing;
using mbpt::Matrix;

inline Diagram closed_dumbbell() { return from_pairing(1, {{0, 1}, {2, 3}}); }
inline Diagram closed_oyster() { return from_pairing(1, {{0, 2}, {1, 3}}); }

// order-0 Green's function diagram: the bare propagator
inline Diagram bare_propagator() { return from_pairing(0, {{0, 1}}, 2, false); }

// first-order Green's function diagrams (tadpole S=2, exchange S=1)
inline Diagram gf_tadpole() { return from_pairing(1, {{4, 0}, {5, 1}, {2, 3}}, 2, false); }
inline Diagram gf_exchange() { return from_pairing(1, {{4, 0}, {5, 2}, {1, 3}}, 2, false); }

// their truncated (self-energy) counterparts
inline Diagram trunc_hartree() { return from_pairing(1, {{4, 0}, {5, 1}, {2, 3}}, 2, true); }
inline Diagram trunc_fock() { return from_pairing(1, {{4, 0}, {5, 2}, {1, 3}}, 2, true); }

// order-2 non-symmetric chain (a tadpole hanging off an exchange vertex),
// S = 2; not 1PI, so it only appears as an insertion
inline Diagram chain_insertion() {
  return from_pairing(2, {{8, 0}, {1, 2}, {3, 4}, {5, 9}, {6, 7}}, 2, true);
}

// order-4 two-particle-irreducible "diamond": externals on the top and
// bottom vertices, a central bubble between the side vertices, S = 4
inline Diagram diamond_skeleton() {
  return from_pairing(4,
                      {{16, 0},
                       {17, 12},
                       {1, 13},
                       {2, 4},
                       {3, 8},
                       {14, 5},
                       {15, 9},
                       {6, 10},
                       {7, 11}},
                      2, true);
}

inline Matrix tridiag4() {
  Matrix A = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    A(i, i) = 2.0;
    if (i > 0) A(i, i - 1) = A(i - 1, i) = -1.0;
  }
  return A;
}

inline mbpt::GibbsProblem benchmark_problem() {
  return mbpt::build_problem(tridiag4(), Matrix::Identity(4, 4), 0.1);
}

}  // namespace fixtures
