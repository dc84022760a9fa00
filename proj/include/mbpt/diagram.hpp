#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mbpt/errors.hpp"

namespace mbpt {

// Half-edge Feynman diagram for the quartic interaction.  Vertex k owns the
// four half-edge slots 4k..4k+3; slots {4k, 4k+1} form side 1 and
// {4k+2, 4k+3} form side 2 of the interaction line.  A diagram with two
// external half-edges appends ids 4n ("i") and 4n+1 ("j").  The matching is
// stored as an involution without fixed points (partner array).
struct Diagram {
  int order = 0;        // number of interaction vertices
  int n_external = 0;   // 0 or 2
  bool truncated = false;
  std::vector<int> partner;

  int n_ids() const { return 4 * order + n_external; }
  bool is_external(int id) const { return id >= 4 * order; }
  int vertex_of(int id) const { return id / 4; }
  int side_of(int id) const { return (id % 4) < 2 ? 0 : 1; }
  // Index of the summation variable attached to a slot (one per vertex side).
  int side_index(int id) const { return 2 * (id / 4) + side_of(id); }
  int ext_i() const { return 4 * order; }
  int ext_j() const { return 4 * order + 1; }

  bool operator==(const Diagram&) const = default;
};

// Per-vertex relabeling group: the order-8 subgroup of S_4 generated by the
// two within-side swaps and the side swap (dihedral of order 8).
inline constexpr int kVertexGroupSize = 8;
inline constexpr std::array<std::array<int, 4>, 8> kVertexGroup = {{
    {0, 1, 2, 3},
    {1, 0, 2, 3},
    {0, 1, 3, 2},
    {1, 0, 3, 2},
    {2, 3, 0, 1},
    {3, 2, 0, 1},
    {2, 3, 1, 0},
    {3, 2, 1, 0},
}};

// 8^n * n!, the size of the relabeling group S_n x R^n.
std::uint64_t relabeling_group_size(int order);

// Classification flags.  two_pi implies one_pi implies connected; external
// symmetry is vacuously true for closed diagrams.
struct ClassFlags {
  bool connected = false;
  bool one_pi = false;
  bool two_pi = false;
  bool externally_symmetric = false;
};

// Canonical form + symmetry factor + flags of an isomorphism class.
struct IsoClass {
  std::string canonical_key;
  int order = 0;
  std::uint64_t symmetry_factor = 1;
  ClassFlags flags;
};

// Computes the full class signature of a diagram.  Throws OrderTooLarge
// above the cap.
IsoClass iso_class(const Diagram& d, int max_order = 6);

struct SkeletonDecomposition {
  Diagram skeleton;  // two-particle irreducible
  // Ordered host half-edge pair (in skeleton ids) and the inserted diagram;
  // the first half-edge links to the insertion's "i" external.
  std::vector<std::pair<std::pair<int, int>, Diagram>> insertions;
  std::uint64_t redundancy_factor = 1;
};

// Builds a validated diagram from an explicit perfect matching.
// Throws InvalidMatching.
Diagram from_pairing(int order, const std::vector<std::pair<int, int>>& pairs,
                     int n_external = 0, bool truncated = false);

// All matched pairs {a,b} with a < b, sorted; internal_edges restricts to
// pairs with both ends on vertex slots.
std::vector<std::pair<int, int>> edges(const Diagram& d);
std::vector<std::pair<int, int>> internal_edges(const Diagram& d);

// Applies the relabeling (sigma, r_0..r_{n-1}): slot 4p+s maps to
// 4*sigma[p] + kVertexGroup[r[p]][s]; external ids are fixed.
Diagram apply_relabeling(const Diagram& d, const std::vector<int>& sigma,
                         const std::vector<int>& r);

// Structural isomorphism under S_n x R^n with external labels held fixed.
bool is_isomorphic(const Diagram& a, const Diagram& b);

// Order of the automorphism group, counted by backtracking over the
// relabeling group.  Throws OrderTooLarge above the cap.
std::uint64_t symmetry_factor(const Diagram& d, int max_order = 6);

// Minimal matching encoding over the relabeling group; equal keys iff
// isomorphic.  Throws OrderTooLarge above the cap.
std::string canonical_key(const Diagram& d, int max_order = 6);

ClassFlags classify(const Diagram& d);

// Swaps the two external labels (identity for closed diagrams).
Diagram swap_externals(const Diagram& d);

// Insertion of a truncated two-external diagram at a matched pair of the
// host: the pair (h1,h2) is unlinked and h1/h2 are linked to the slots that
// carried the insertion's "i"/"j" externals.  Throws NotAMatchedPair or
// NotTruncated.
Diagram insert(const Diagram& host, std::pair<int, int> at, const Diagram& insertion);

// Unique decomposition of a 1PI diagram into a 2PI skeleton plus its maximal
// insertions, with the redundancy factor obtained by brute-force counting of
// inequivalent ways to rebuild the class.  Throws NotOnePI.
SkeletonDecomposition skeleton_decompose(const Diagram& d);

// Text form: n=<order>; ext=<0|2>; trunc=<0|1>; match=(a,b)(c,d)...
std::string to_string(const Diagram& d);
Diagram parse_diagram(const std::string& line);

}  // namespace mbpt
