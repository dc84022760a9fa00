#include "mbpt/diagram.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace mbpt {

std::uint64_t relabeling_group_size(int order) {
  std::uint64_t g = 1;
  for (int k = 1; k <= order; ++k) g *= 8ull * static_cast<std::uint64_t>(k);
  return g;
}

Diagram from_pairing(int order, const std::vector<std::pair<int, int>>& pairs,
                     int n_external, bool truncated) {
  if (order < 0 || (n_external != 0 && n_external != 2))
    throw InvalidMatching("order must be nonnegative and externals 0 or 2");
  Diagram d;
  d.order = order;
  d.n_external = n_external;
  d.truncated = truncated;
  const int m = d.n_ids();
  d.partner.assign(m, -1);
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= m || b >= m || a == b)
      throw InvalidMatching("pair (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    if (d.partner[a] != -1 || d.partner[b] != -1)
      throw InvalidMatching("repeated id in matching");
    d.partner[a] = b;
    d.partner[b] = a;
  }
  for (int i = 0; i < m; ++i)
    if (d.partner[i] == -1) throw InvalidMatching("id " + std::to_string(i) + " unmatched");
  if (truncated) {
    if (n_external != 2) throw InvalidMatching("truncated diagrams need 2 externals");
    if (d.is_external(d.partner[d.ext_i()]) || d.is_external(d.partner[d.ext_j()]))
      throw InvalidMatching("truncated diagram externals must attach to vertex slots");
  }
  return d;
}

std::vector<std::pair<int, int>> edges(const Diagram& d) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < d.n_ids(); ++a)
    if (d.partner[a] > a) out.emplace_back(a, d.partner[a]);
  return out;
}

std::vector<std::pair<int, int>> internal_edges(const Diagram& d) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < 4 * d.order; ++a)
    if (d.partner[a] > a && !d.is_external(d.partner[a])) out.emplace_back(a, d.partner[a]);
  return out;
}

Diagram apply_relabeling(const Diagram& d, const std::vector<int>& sigma,
                         const std::vector<int>& r) {
  const int m = d.n_ids();
  std::vector<int> psi(m);
  for (int p = 0; p < d.order; ++p)
    for (int s = 0; s < 4; ++s) psi[4 * p + s] = 4 * sigma[p] + kVertexGroup[r[p]][s];
  for (int e = 4 * d.order; e < m; ++e) psi[e] = e;
  Diagram out = d;
  for (int a = 0; a < m; ++a) out.partner[psi[a]] = psi[d.partner[a]];
  return out;
}

namespace {

// Backtracking search over S_n x R^n for structure-preserving relabelings
// from a onto b with external ids fixed.  Counts all solutions or stops at
// the first one.
struct IsoSearch {
  const Diagram& a;
  const Diagram& b;
  bool count_all;
  std::uint64_t count = 0;
  std::vector<int> psi;        // image of each a-id, -1 if unknown
  std::vector<bool> used;      // target vertices already taken

  IsoSearch(const Diagram& a_, const Diagram& b_, bool count_all_)
      : a(a_), b(b_), count_all(count_all_) {
    psi.assign(a.n_ids(), -1);
    used.assign(a.order, false);
    for (int e = 4 * a.order; e < a.n_ids(); ++e) psi[e] = e;
  }

  bool consistent_at(int p) const {
    for (int s = 0; s < 4; ++s) {
      const int x = 4 * p + s;
      const int y = a.partner[x];
      if (psi[y] != -1 && b.partner[psi[x]] != psi[y]) return false;
    }
    return true;
  }

  bool run(int p) {
    if (p == a.order) {
      ++count;
      return !count_all;
    }
    for (int q = 0; q < a.order; ++q) {
      if (used[q]) continue;
      used[q] = true;
      for (int rc = 0; rc < kVertexGroupSize; ++rc) {
        for (int s = 0; s < 4; ++s) psi[4 * p + s] = 4 * q + kVertexGroup[rc][s];
        if (consistent_at(p) && run(p + 1)) {
          if (!count_all) return true;
        }
      }
      for (int s = 0; s < 4; ++s) psi[4 * p + s] = -1;
      used[q] = false;
    }
    return false;
  }
};

std::uint64_t iso_count(const Diagram& a, const Diagram& b, bool count_all) {
  if (a.order != b.order || a.n_external != b.n_external) return 0;
  // edges between external ids have no vertex to carry the check
  for (int e = 4 * a.order; e < a.n_ids(); ++e)
    if (a.is_external(a.partner[e]) != b.is_external(b.partner[e])) return 0;
  if (a.n_external == 2 && a.is_external(a.partner[a.ext_i()]) &&
      b.partner[a.ext_i()] != a.partner[a.ext_i()])
    return 0;
  IsoSearch s(a, b, count_all);
  s.run(0);
  return s.count;
}

}  // namespace

bool is_isomorphic(const Diagram& a, const Diagram& b) { return iso_count(a, b, false) > 0; }

std::uint64_t symmetry_factor(const Diagram& d, int max_order) {
  if (d.order > max_order)
    throw OrderTooLarge("symmetry_factor: order " + std::to_string(d.order) +
                        " exceeds cap " + std::to_string(max_order));
  return iso_count(d, d, true);
}

std::string canonical_key(const Diagram& d, int max_order) {
  if (d.order > max_order)
    throw OrderTooLarge("canonical_key: order " + std::to_string(d.order) +
                        " exceeds cap " + std::to_string(max_order));
  const int m = d.n_ids();
  const int n = d.order;
  std::vector<std::uint8_t> best(m, 255);
  std::vector<int> psi(m), psi_inv(m);
  for (int e = 4 * n; e < m; ++e) {
    psi[e] = e;
    psi_inv[e] = e;
  }
  std::vector<int> sigma(n), rdig(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  bool first = true;
  do {
    std::fill(rdig.begin(), rdig.end(), 0);
    while (true) {
      for (int p = 0; p < n; ++p)
        for (int s = 0; s < 4; ++s) {
          const int t = 4 * sigma[p] + kVertexGroup[rdig[p]][s];
          psi[4 * p + s] = t;
          psi_inv[t] = 4 * p + s;
        }
      // lexicographic compare of the relabeled partner array, built in
      // target-id order so losing candidates abort early
      for (int t = 0; t < m; ++t) {
        const auto val = static_cast<std::uint8_t>(psi[d.partner[psi_inv[t]]]);
        if (first || val < best[t]) {  // new minimum: keep the whole candidate
          for (int u = 0; u < m; ++u)
            best[u] = static_cast<std::uint8_t>(psi[d.partner[psi_inv[u]]]);
          break;
        }
        if (val > best[t]) break;
      }
      first = false;
      // odometer over R^n
      int p = 0;
      while (p < n && ++rdig[p] == kVertexGroupSize) rdig[p++] = 0;
      if (p == n) break;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));

  std::string key;
  key.reserve(m + 2);
  key.push_back(static_cast<char>(d.order));
  key.push_back(static_cast<char>(d.n_external));
  for (int t = 0; t < m; ++t) key.push_back(static_cast<char>(best[t]));
  return key;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int x, int y) { parent[find(x)] = find(y); }
};

int node_of(const Diagram& d, int id) {
  return d.is_external(id) ? d.order + (id - 4 * d.order) : d.vertex_of(id);
}

// Number of connected components of the vertex multigraph (external stubs
// included as nodes), with the listed edges removed.
int component_count(const Diagram& d, const std::vector<std::pair<int, int>>& all_edges,
                    int skip1 = -1, int skip2 = -1) {
  const int nodes = d.order + d.n_external;
  if (nodes == 0) return 0;
  UnionFind uf(nodes);
  for (int e = 0; e < static_cast<int>(all_edges.size()); ++e) {
    if (e == skip1 || e == skip2) continue;
    uf.unite(node_of(d, all_edges[e].first), node_of(d, all_edges[e].second));
  }
  int roots = 0;
  for (int i = 0; i < nodes; ++i)
    if (uf.find(i) == i) ++roots;
  return roots;
}

}  // namespace

IsoClass iso_class(const Diagram& d, int max_order) {
  IsoClass c;
  c.order = d.order;
  c.canonical_key = canonical_key(d, max_order);
  c.symmetry_factor = symmetry_factor(d, max_order);
  c.flags = classify(d);
  return c;
}

Diagram swap_externals(const Diagram& d) {
  if (d.n_external != 2) return d;
  Diagram out = d;
  const int ei = d.ext_i(), ej = d.ext_j();
  const int x = d.partner[ei], y = d.partner[ej];
  if (x == ej) return out;  // externals paired together: swap is the identity
  out.partner[ei] = y;
  out.partner[y] = ei;
  out.partner[ej] = x;
  out.partner[x] = ej;
  return out;
}

ClassFlags classify(const Diagram& d) {
  ClassFlags f;
  if (d.order == 0 && d.n_external == 0) {
    f.externally_symmetric = true;  // empty diagram
    return f;
  }
  const auto all = edges(d);
  f.connected = component_count(d, all) == 1;

  // positions of internal edges within the full edge list
  std::vector<int> internal_pos;
  for (int e = 0; e < static_cast<int>(all.size()); ++e)
    if (!d.is_external(all[e].first) && !d.is_external(all[e].second)) internal_pos.push_back(e);

  f.one_pi = f.connected;
  if (f.one_pi)
    for (int e : internal_pos)
      if (component_count(d, all, e) > 1) {
        f.one_pi = false;
        break;
      }
  f.two_pi = f.one_pi;
  if (f.two_pi)
    for (std::size_t i = 0; i < internal_pos.size() && f.two_pi; ++i)
      for (std::size_t j = i + 1; j < internal_pos.size(); ++j)
        if (component_count(d, all, internal_pos[i], internal_pos[j]) > 1) {
          f.two_pi = false;
          break;
        }
  f.externally_symmetric = d.n_external == 0 || is_isomorphic(d, swap_externals(d));
  return f;
}

Diagram insert(const Diagram& host, std::pair<int, int> at, const Diagram& insertion) {
  const int m = host.n_ids();
  if (at.first < 0 || at.first >= m || at.second < 0 || at.second >= m ||
      host.partner[at.first] != at.second)
    throw NotAMatchedPair("insertion point is not a matched pair of the host");
  if (!insertion.truncated || insertion.n_external != 2 || insertion.order < 1)
    throw NotTruncated("insertion must be a truncated two-external diagram of order >= 1");

  const int ho = host.order, io = insertion.order;
  const int n = ho + io;
  const int shift = 4 * ho;
  auto remap_host = [&](int x) { return x < 4 * ho ? x : x + 4 * io; };

  Diagram out;
  out.order = n;
  out.n_external = host.n_external;
  out.truncated = host.truncated;
  out.partner.assign(out.n_ids(), -1);

  auto link = [&](int a, int b) {
    out.partner[a] = b;
    out.partner[b] = a;
  };

  for (int a = 0; a < m; ++a) {
    const int b = host.partner[a];
    if (b < a) continue;
    if ((a == at.first && b == at.second) || (a == at.second && b == at.first)) continue;
    link(remap_host(a), remap_host(b));
  }
  for (int a = 0; a < 4 * io; ++a) {
    const int b = insertion.partner[a];
    if (b < a || insertion.is_external(b)) continue;
    link(a + shift, b + shift);
  }
  const int slot_i = insertion.partner[insertion.ext_i()];
  const int slot_j = insertion.partner[insertion.ext_j()];
  link(remap_host(at.first), slot_i + shift);
  link(remap_host(at.second), slot_j + shift);
  return out;
}

namespace {

struct FoundInsertion {
  std::vector<int> verts;      // sorted vertex list of the inserted piece
  int host1 = -1, inner1 = -1; // cut edge 1: host-side slot, insertion-side slot
  int host2 = -1, inner2 = -1;
};

// Scans all pairs of internal edges whose removal disconnects the diagram;
// each success identifies an insertion (the component without externals).
std::vector<FoundInsertion> find_insertions(const Diagram& d) {
  const auto all = edges(d);
  std::vector<int> internal_pos;
  for (int e = 0; e < static_cast<int>(all.size()); ++e)
    if (!d.is_external(all[e].first) && !d.is_external(all[e].second)) internal_pos.push_back(e);

  std::vector<FoundInsertion> found;
  const int nodes = d.order + d.n_external;
  for (std::size_t i = 0; i < internal_pos.size(); ++i) {
    for (std::size_t j = i + 1; j < internal_pos.size(); ++j) {
      const int e1 = internal_pos[i], e2 = internal_pos[j];
      UnionFind uf(nodes);
      for (int e = 0; e < static_cast<int>(all.size()); ++e) {
        if (e == e1 || e == e2) continue;
        uf.unite(node_of(d, all[e].first), node_of(d, all[e].second));
      }
      int roots = 0;
      for (int t = 0; t < nodes; ++t)
        if (uf.find(t) == t) ++roots;
      if (roots != 2) continue;

      const int ext_root = uf.find(d.order);  // node of external "i"
      if (uf.find(d.order + 1) != ext_root)
        throw Error("internal error: two-edge cut separated the external labels of a 1PI diagram");

      FoundInsertion fi;
      auto classify_edge = [&](const std::pair<int, int>& e, int& host_slot, int& inner_slot) {
        const bool a_in = uf.find(node_of(d, e.first)) != ext_root;
        const bool b_in = uf.find(node_of(d, e.second)) != ext_root;
        if (a_in == b_in)
          throw Error("internal error: cut edge does not straddle the insertion boundary");
        host_slot = a_in ? e.second : e.first;
        inner_slot = a_in ? e.first : e.second;
      };
      classify_edge(all[e1], fi.host1, fi.inner1);
      classify_edge(all[e2], fi.host2, fi.inner2);
      for (int v = 0; v < d.order; ++v)
        if (uf.find(v) != ext_root) fi.verts.push_back(v);
      found.push_back(std::move(fi));
    }
  }
  return found;
}

Diagram extract_insertion(const Diagram& d, const FoundInsertion& fi) {
  const int q = static_cast<int>(fi.verts.size());
  std::vector<int> vmap(d.order, -1);
  for (int k = 0; k < q; ++k) vmap[fi.verts[k]] = k;
  auto local = [&](int slot) { return 4 * vmap[d.vertex_of(slot)] + slot % 4; };

  std::vector<std::pair<int, int>> pairs;
  for (int v : fi.verts)
    for (int s = 0; s < 4; ++s) {
      const int a = 4 * v + s;
      const int b = d.partner[a];
      if (a == fi.inner1) {
        pairs.emplace_back(local(a), 4 * q);
        continue;
      }
      if (a == fi.inner2) {
        pairs.emplace_back(local(a), 4 * q + 1);
        continue;
      }
      if (b > a && vmap[d.vertex_of(b)] >= 0) pairs.emplace_back(local(a), local(b));
    }
  return from_pairing(q, pairs, 2, true);
}

}  // namespace

SkeletonDecomposition skeleton_decompose(const Diagram& d) {
  if (d.n_external != 2 || !d.truncated)
    throw NotOnePI("skeleton decomposition needs a truncated two-external diagram");
  const ClassFlags flags = classify(d);
  if (!flags.one_pi) throw NotOnePI("diagram is not one-particle irreducible");

  auto found = find_insertions(d);
  // keep only maximal insertions (vertex sets not contained in a larger one)
  std::vector<FoundInsertion> maximal;
  for (const auto& fi : found) {
    bool contained = false;
    for (const auto& fj : found) {
      if (fi.verts.size() >= fj.verts.size()) continue;
      if (std::includes(fj.verts.begin(), fj.verts.end(), fi.verts.begin(), fi.verts.end())) {
        contained = true;
        break;
      }
    }
    if (!contained) maximal.push_back(fi);
  }
  std::sort(maximal.begin(), maximal.end(),
            [](const FoundInsertion& x, const FoundInsertion& y) { return x.verts < y.verts; });

  // collapse the maximal insertions to single matched pairs
  std::vector<bool> removed(d.order, false);
  for (const auto& fi : maximal)
    for (int v : fi.verts) removed[v] = true;
  std::vector<int> vmap(d.order, -1);
  int p = 0;
  for (int v = 0; v < d.order; ++v)
    if (!removed[v]) vmap[v] = p++;
  auto skel_slot = [&](int slot) { return 4 * vmap[d.vertex_of(slot)] + slot % 4; };

  std::vector<std::pair<int, int>> skel_pairs;
  for (int v = 0; v < d.order; ++v) {
    if (removed[v]) continue;
    for (int s = 0; s < 4; ++s) {
      const int a = 4 * v + s;
      const int b = d.partner[a];
      if (d.is_external(b)) {
        skel_pairs.emplace_back(skel_slot(a), 4 * p + (b - 4 * d.order));
      } else if (b > a && !removed[d.vertex_of(b)]) {
        skel_pairs.emplace_back(skel_slot(a), skel_slot(b));
      }
    }
  }

  SkeletonDecomposition out;
  for (const auto& fi : maximal) {
    Diagram ins = extract_insertion(d, fi);
    std::pair<int, int> at{skel_slot(fi.host1), skel_slot(fi.host2)};
    // orient each insertion deterministically so isomorphic-up-to-labeling
    // insertions receive identical labelings
    const std::string k_fwd = canonical_key(ins, ins.order);
    const std::string k_rev = canonical_key(swap_externals(ins), ins.order);
    if (k_rev < k_fwd) {
      ins = swap_externals(ins);
      std::swap(at.first, at.second);
    }
    skel_pairs.emplace_back(at.first, at.second);
    out.insertions.emplace_back(at, std::move(ins));
  }
  out.skeleton = from_pairing(p, skel_pairs, 2, true);
  if (!classify(out.skeleton).two_pi)
    throw Error("internal error: collapsed skeleton is not two-particle irreducible");

  // decompose-then-reinsert must reproduce the class
  Diagram rebuilt = out.skeleton;
  for (const auto& [at, ins] : out.insertions) rebuilt = insert(rebuilt, at, ins);
  if (!is_isomorphic(rebuilt, d))
    throw Error("internal error: re-inserting the maximal insertions does not rebuild the diagram");

  // brute-force count of inequivalent ways to rebuild the class from the
  // skeleton: an assignment of each insertion to a distinct skeleton edge
  // with an orientation, deduplicated by (edge, oriented class) multisets
  const auto skel_edges = internal_edges(out.skeleton);
  const int K = static_cast<int>(out.insertions.size());
  std::vector<std::array<std::string, 2>> okey(K);
  std::vector<std::array<Diagram, 2>> oriented(K);
  for (int k = 0; k < K; ++k) {
    const Diagram& ins = out.insertions[k].second;
    oriented[k] = {ins, swap_externals(ins)};
    okey[k] = {canonical_key(ins, ins.order), canonical_key(swap_externals(ins), ins.order)};
  }

  std::set<std::vector<std::pair<int, std::string>>> ways;
  std::map<std::vector<std::pair<int, std::string>>, bool> memo;
  std::vector<int> edge_of(K, -1), orient_of(K, 0);
  std::vector<bool> edge_used(skel_edges.size(), false);

  auto try_way = [&]() {
    std::vector<std::pair<int, std::string>> way;
    for (int k = 0; k < K; ++k) way.emplace_back(edge_of[k], okey[k][orient_of[k]]);
    std::sort(way.begin(), way.end());
    auto it = memo.find(way);
    bool ok;
    if (it != memo.end()) {
      ok = it->second;
    } else {
      Diagram composed = out.skeleton;
      for (int k = 0; k < K; ++k)
        composed = insert(composed, skel_edges[edge_of[k]], oriented[k][orient_of[k]]);
      ok = is_isomorphic(composed, d);
      memo.emplace(way, ok);
    }
    if (ok) ways.insert(std::move(way));
  };

  auto rec = [&](auto&& self, int k) -> void {
    if (k == K) {
      try_way();
      return;
    }
    for (int e = 0; e < static_cast<int>(skel_edges.size()); ++e) {
      if (edge_used[e]) continue;
      edge_used[e] = true;
      edge_of[k] = e;
      for (int o = 0; o < 2; ++o) {
        if (o == 1 && okey[k][0] == okey[k][1]) break;  // externally symmetric
        orient_of[k] = o;
        self(self, k + 1);
      }
      edge_used[e] = false;
    }
  };
  rec(rec, 0);
  out.redundancy_factor = ways.size();

  // cross-check against the symmetry-factor identity
  const std::uint64_t s_d = symmetry_factor(d, d.order);
  std::uint64_t s_prod = symmetry_factor(out.skeleton, out.skeleton.order);
  for (const auto& [at, ins] : out.insertions) s_prod *= symmetry_factor(ins, ins.order);
  if (out.redundancy_factor * s_d != s_prod)
    throw Error("internal error: redundancy factor violates the symmetry-factor identity");

  return out;
}

std::string to_string(const Diagram& d) {
  std::ostringstream os;
  os << "n=" << d.order << "; ext=" << d.n_external << "; trunc=" << (d.truncated ? 1 : 0)
     << "; match=";
  for (const auto& [a, b] : edges(d)) os << "(" << a << "," << b << ")";
  return os.str();
}

Diagram parse_diagram(const std::string& line) {
  int n = -1, ext = -1, trunc = -1;
  std::vector<std::pair<int, int>> pairs;
  std::string s = line;
  auto grab = [&](const std::string& tag) -> std::string {
    auto pos = s.find(tag);
    if (pos == std::string::npos) throw Error("diagram line missing field " + tag);
    pos += tag.size();
    auto end = s.find(';', pos);
    return s.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
  };
  n = std::stoi(grab("n="));
  ext = std::stoi(grab("ext="));
  trunc = std::stoi(grab("trunc="));
  std::string match = grab("match=");
  std::size_t i = 0;
  while (i < match.size()) {
    if (match[i] != '(') {
      ++i;
      continue;
    }
    auto comma = match.find(',', i);
    auto close = match.find(')', i);
    if (comma == std::string::npos || close == std::string::npos)
      throw Error("malformed match list in diagram line");
    pairs.emplace_back(std::stoi(match.substr(i + 1, comma - i - 1)),
                       std::stoi(match.substr(comma + 1, close - comma - 1)));
    i = close + 1;
  }
  return from_pairing(n, pairs, ext, trunc != 0);
}

}  // namespace mbpt
