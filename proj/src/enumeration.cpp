#include "mbpt/enumeration.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace mbpt {

std::uint64_t pairing_count(int m) {
  if (m % 2 != 0) throw OddCount("pairings need an even number of ids");
  static const auto table = [] {
    std::array<std::uint64_t, 33> t{};
    t[0] = 1;
    for (int k = 1; k < 33; ++k) t[k] = t[k - 1] * static_cast<std::uint64_t>(2 * k - 1);
    return t;
  }();
  if (m / 2 < 33) return table[m / 2];
  std::uint64_t c = 1;
  for (int k = m - 1; k > 0; k -= 2) c *= static_cast<std::uint64_t>(k);
  return c;
}

namespace {

void pairing_rec(std::vector<int>& ids, std::vector<std::pair<int, int>>& acc,
                 const std::function<void(const std::vector<std::pair<int, int>>&)>& fn) {
  if (ids.empty()) {
    fn(acc);
    return;
  }
  const int first = ids.front();
  for (std::size_t k = 1; k < ids.size(); ++k) {
    const int mate = ids[k];
    std::vector<int> rest;
    rest.reserve(ids.size() - 2);
    for (std::size_t t = 1; t < ids.size(); ++t)
      if (t != k) rest.push_back(ids[t]);
    acc.emplace_back(first, mate);
    pairing_rec(rest, acc, fn);
    acc.pop_back();
  }
}

}  // namespace

void for_each_pairing(const std::vector<int>& ids,
                      const std::function<void(const std::vector<std::pair<int, int>>&)>& fn) {
  if (ids.size() % 2 != 0) throw OddCount("pairings need an even number of ids");
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<int, int>> acc;
  pairing_rec(sorted, acc, fn);
}

std::uint64_t rank_pairing(const std::vector<int>& partner) {
  const int m = static_cast<int>(partner.size());
  if (m > 64) throw OrderTooLarge("rank_pairing supports at most 64 ids");
  std::uint64_t unused = m == 64 ? ~0ull : (1ull << m) - 1;
  std::uint64_t rank = 0;
  int remaining = m;
  for (int i = 0; i < m; ++i) {
    if (!(unused & (1ull << i))) continue;
    const int j = partner[i];
    // number of still-unmatched ids strictly between i and j
    const std::uint64_t between = ((1ull << j) - 1) & ~((1ull << (i + 1)) - 1);
    const auto digit = static_cast<std::uint64_t>(__builtin_popcountll(unused & between));
    rank += digit * pairing_count(remaining - 2);
    unused &= ~((1ull << i) | (1ull << j));
    remaining -= 2;
  }
  return rank;
}

std::vector<int> unrank_pairing(int m, std::uint64_t rank) {
  std::vector<int> partner(m, -1);
  std::vector<bool> used(m, false);
  int remaining = m;
  for (int i = 0; i < m; ++i) {
    if (used[i]) continue;
    const std::uint64_t block = pairing_count(remaining - 2);
    std::uint64_t digit = rank / block;
    rank %= block;
    int j = -1;
    for (int t = i + 1; t < m; ++t) {
      if (used[t]) continue;
      if (digit == 0) {
        j = t;
        break;
      }
      --digit;
    }
    partner[i] = j;
    partner[j] = i;
    used[i] = used[j] = true;
    remaining -= 2;
  }
  return partner;
}

const char* family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Closed: return "closed";
    case FamilyKind::ConnectedClosed: return "connected";
    case FamilyKind::GreensFunction: return "greens";
    case FamilyKind::SelfEnergy1PI: return "1pi";
    case FamilyKind::Skeleton2PI: return "2pi";
  }
  return "?";
}

namespace {

std::uint64_t pack_matching(const std::vector<int>& partner) {
  std::uint64_t code = 0;
  for (int a = 0; a < static_cast<int>(partner.size()); ++a)
    if (partner[a] > a) code = (code << 5) | static_cast<std::uint64_t>(partner[a]);
  return code;
}

std::vector<int> unpack_matching(int m, std::uint64_t code) {
  std::vector<int> vals(m / 2);
  for (int k = m / 2 - 1; k >= 0; --k) {
    vals[k] = static_cast<int>(code & 31);
    code >>= 5;
  }
  std::vector<int> partner(m, -1);
  int next = 0;
  for (int a = 0; a < m; ++a) {
    if (partner[a] != -1) continue;
    const int b = vals[next++];
    partner[a] = b;
    partner[b] = a;
  }
  return partner;
}

// Distinct relabeling-group images of a matching, as packed codes.
std::vector<std::uint64_t> orbit_codes(const std::vector<int>& partner, int order, int m) {
  std::vector<std::uint64_t> codes;
  codes.reserve(relabeling_group_size(order));
  std::vector<int> psi(m), image(m), sigma(order), rdig(order);
  for (int e = 4 * order; e < m; ++e) psi[e] = e;
  std::iota(sigma.begin(), sigma.end(), 0);
  do {
    std::fill(rdig.begin(), rdig.end(), 0);
    while (true) {
      for (int p = 0; p < order; ++p)
        for (int s = 0; s < 4; ++s) psi[4 * p + s] = 4 * sigma[p] + kVertexGroup[rdig[p]][s];
      for (int a = 0; a < m; ++a) image[psi[a]] = psi[partner[a]];
      codes.push_back(pack_matching(image));
      int p = 0;
      while (p < order && ++rdig[p] == kVertexGroupSize) rdig[p++] = 0;
      if (p == order) break;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  return codes;
}

bool family_filter(FamilyKind kind, const ClassFlags& flags) {
  switch (kind) {
    case FamilyKind::Closed: return true;
    case FamilyKind::ConnectedClosed: return flags.connected;
    case FamilyKind::GreensFunction: return flags.connected;
    case FamilyKind::SelfEnergy1PI: return flags.connected && flags.one_pi;
    case FamilyKind::Skeleton2PI: return flags.connected && flags.two_pi;
  }
  return false;
}

}  // namespace

DiagramFamily enumerate_family(FamilyKind kind, int order, int max_order) {
  if (order < 0 || order > max_order)
    throw OrderTooLarge("enumeration order " + std::to_string(order) + " exceeds cap " +
                        std::to_string(max_order));
  const bool two_ext = kind == FamilyKind::GreensFunction ||
                       kind == FamilyKind::SelfEnergy1PI || kind == FamilyKind::Skeleton2PI;
  const bool truncated = kind == FamilyKind::SelfEnergy1PI || kind == FamilyKind::Skeleton2PI;

  DiagramFamily fam;
  fam.kind = kind;
  fam.order = order;

  const int m = 4 * order + (two_ext ? 2 : 0);
  if (m == 0) {
    if (kind == FamilyKind::Closed) {
      DiagramClass c;
      c.representative = Diagram{};
      c.symmetry_factor = 1;
      c.labeled_count = 1;
      c.key = canonical_key(c.representative);
      fam.classes.push_back(std::move(c));
    }
    return fam;  // the empty diagram is not connected
  }

  const std::uint64_t total = pairing_count(m);
  const std::uint64_t group = relabeling_group_size(order);
  std::vector<bool> seen(total, false);

  for (std::uint64_t rank = 0; rank < total; ++rank) {
    if (seen[rank]) continue;
    const std::vector<int> partner = unrank_pairing(m, rank);
    const auto orbit = orbit_codes(partner, order, m);
    for (std::uint64_t code : orbit) seen[rank_pairing(unpack_matching(m, code))] = true;

    Diagram rep;
    rep.order = order;
    rep.n_external = two_ext ? 2 : 0;
    rep.truncated = false;
    rep.partner = partner;
    if (truncated) {
      if (rep.is_external(rep.partner[rep.ext_i()])) continue;  // externals paired together
      rep.truncated = true;
    }
    const ClassFlags flags = classify(rep);
    if (!family_filter(kind, flags)) continue;

    DiagramClass c;
    c.representative = std::move(rep);
    c.labeled_count = orbit.size();
    if (group % orbit.size() != 0)
      throw Error("internal error: orbit size does not divide the relabeling group size");
    c.symmetry_factor = group / orbit.size();
    c.key = canonical_key(c.representative, std::max(order, 6));
    fam.classes.push_back(std::move(c));
  }

  std::sort(fam.classes.begin(), fam.classes.end(),
            [](const DiagramClass& a, const DiagramClass& b) { return a.key < b.key; });
  return fam;
}

}  // namespace mbpt
