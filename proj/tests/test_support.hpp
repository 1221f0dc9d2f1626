#pragma once

// Brute-force oracles and fixtures shared by the unit and acceptance tests.
// Everything here is deliberately naive so it stays independent of the
// library's indexed implementations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "nibble_forge/hypergraph.hpp"

namespace nftest {

using nforge::EdgeId;
using nforge::Hypergraph;
using nforge::Vertex;
using EdgeList = std::vector<std::vector<Vertex>>;

inline EdgeList edges_of(const Hypergraph& h) {
  EdgeList out;
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    auto s = h.edge(e);
    out.emplace_back(s.begin(), s.end());
  }
  return out;
}

inline bool contains_all(const std::vector<Vertex>& edge, const std::vector<Vertex>& u) {
  for (Vertex v : u)
    if (std::find(edge.begin(), edge.end(), v) == edge.end()) return false;
  return true;
}

inline bool meets(const std::vector<Vertex>& a, const std::vector<Vertex>& b) {
  for (Vertex v : a)
    if (std::find(b.begin(), b.end(), v) != b.end()) return true;
  return false;
}

inline std::uint64_t brute_codegree(const EdgeList& edges, const std::vector<Vertex>& u) {
  std::uint64_t c = 0;
  for (const auto& e : edges) c += contains_all(e, u);
  return c;
}

// Max over all j-subsets of [n], by enumeration of every subset.
inline std::uint64_t brute_max_codegree(std::size_t n, const EdgeList& edges, std::size_t j) {
  std::uint64_t best = 0;
  std::vector<Vertex> u(j);
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(j), true);
  do {
    u.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) u.push_back(static_cast<Vertex>(i));
    best = std::max(best, brute_codegree(edges, u));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

inline std::uint64_t brute_conflicts(const EdgeList& edges, std::size_t e) {
  std::uint64_t f = 0;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (i != e && meets(edges[i], edges[e])) ++f;
  return f;
}

// P(v in V(M)) by summing over all 2^m edge subsets X.
inline std::vector<double> enumerate_match_probability(std::size_t n, const EdgeList& edges,
                                                       double p) {
  const std::size_t m = edges.size();
  std::vector<double> out(n, 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    const int sz = __builtin_popcountll(mask);
    const double pr = std::pow(p, sz) * std::pow(1.0 - p, static_cast<double>(m) - sz);
    for (std::size_t e = 0; e < m; ++e) {
      if (!((mask >> e) & 1u)) continue;
      bool isolated = true;
      for (std::size_t o = 0; o < m && isolated; ++o)
        if (o != e && ((mask >> o) & 1u) && meets(edges[o], edges[e])) isolated = false;
      if (isolated)
        for (Vertex v : edges[e]) out[v] += pr;
    }
  }
  return out;
}

inline bool brute_disjoint(const EdgeList& edges, const std::vector<EdgeId>& ids) {
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b)
      if (meets(edges[ids[a]], edges[ids[b]])) return false;
  return true;
}

// Random hypergraph with edge sizes in [lo, hi] on n vertices; duplicates
// are allowed and occur on purpose with probability dup.
inline Hypergraph random_hypergraph(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                    std::size_t lo, std::size_t hi, double dup = 0.1) {
  EdgeList edges;
  std::vector<Vertex> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<Vertex>(i);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t e = 0; e < m; ++e) {
    if (!edges.empty() && coin(rng) < dup) {
      edges.push_back(edges[rng() % edges.size()]);
      continue;
    }
    const std::size_t sz = lo + rng() % (hi - lo + 1);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<Vertex> ed(all.begin(), all.begin() + static_cast<long>(sz));
    std::sort(ed.begin(), ed.end());
    edges.push_back(ed);
  }
  return Hypergraph(n, edges, hi);
}

// Greedy maximal matching over a random edge order.
inline std::vector<EdgeId> greedy_matching(const Hypergraph& h, std::mt19937_64& rng) {
  std::vector<EdgeId> order(h.num_edges());
  for (EdgeId e = 0; e < order.size(); ++e) order[e] = e;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> used(h.num_vertices(), 0);
  std::vector<EdgeId> out;
  for (EdgeId e : order) {
    bool ok = true;
    for (Vertex v : h.edge(e)) ok = ok && !used[v];
    if (!ok) continue;
    for (Vertex v : h.edge(e)) used[v] = 1;
    out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Hypergraph k4_3() { return Hypergraph(4, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}); }

// Small hypergraphs (at most 10 edges) used wherever exact enumeration is
// the oracle.
inline std::vector<Hypergraph> small_fixtures() {
  std::vector<Hypergraph> out;
  out.push_back(Hypergraph(2, {{0, 1}}));
  out.push_back(Hypergraph(3, {{0, 1}, {1, 2}}));
  out.push_back(Hypergraph(2, {{0, 1}, {0, 1}}));
  out.push_back(k4_3());
  out.push_back(Hypergraph(5, {{0, 1, 2}, {2, 3, 4}}));
  out.push_back(Hypergraph(6, {{0, 1, 2}, {3, 4, 5}, {0, 3, 4}, {1, 2, 5}, {0, 1, 2}}));
  out.push_back(Hypergraph(7, {{0, 1, 2}, {0, 3, 4}, {0, 5, 6}, {1, 3, 5}, {1, 4, 6},
                               {2, 3, 6}, {2, 4, 5}}));
  out.push_back(Hypergraph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}, {0, 3},
                               {1, 4}, {2, 5}, {0, 1}}));
  out.push_back(Hypergraph(8, {{0, 1, 2, 3}, {4, 5, 6, 7}, {0, 4}, {1, 5, 6}, {2, 7},
                               {3, 6, 7}, {0, 1, 2, 3}}));
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 6; ++i) out.push_back(random_hypergraph(rng, 9, 10, 2, 4, 0.15));
  return out;
}

}  // namespace nftest
