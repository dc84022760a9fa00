#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "mbpt/diagram.hpp"

namespace mbpt {

enum class FamilyKind { Closed, ConnectedClosed, GreensFunction, SelfEnergy1PI, Skeleton2PI };

struct DiagramClass {
  Diagram representative;  // first-seen member in pairing-stream order
  std::uint64_t symmetry_factor = 1;
  std::uint64_t labeled_count = 1;  // orbit size, equal to 8^n n! / S
  std::string key;
};

struct DiagramFamily {
  FamilyKind kind;
  int order = 0;
  std::vector<DiagramClass> classes;  // sorted by canonical key
};

// (m-1)!! — the number of perfect matchings of m items (1 for m == 0).
std::uint64_t pairing_count(int m);

// Enumerates all perfect matchings of the given ids in deterministic order:
// the smallest unmatched id is paired with the remaining ids in ascending
// order.  Throws OddCount.
void for_each_pairing(const std::vector<int>& ids,
                      const std::function<void(const std::vector<std::pair<int, int>>&)>& fn);

// Rank of a matching (partner array over ids 0..m-1) in the stream order
// above, and its inverse.
std::uint64_t rank_pairing(const std::vector<int>& partner);
std::vector<int> unrank_pairing(int m, std::uint64_t rank);

// Exhaustive enumeration of the isomorphism classes of a diagram family at a
// fixed order: all matchings are generated, deduplicated by relabeling-group
// orbits, and filtered by the family's classification flags.
// Throws OrderTooLarge if order exceeds the cap.
DiagramFamily enumerate_family(FamilyKind kind, int order, int max_order = 4);

const char* family_name(FamilyKind kind);

}  // namespace mbpt
