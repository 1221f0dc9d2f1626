#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "nibble_forge/errors.hpp"
#include "nibble_forge/instances.hpp"
#include "test_support.hpp"

using namespace nforge;

namespace {

// Naive re-enumeration of the auxiliary edges: directed triangles taken
// once per rotation class (smallest vertex first), rainbow, all colours good.
std::vector<std::vector<Vertex>> brute_triangle_edges(const DesignInstance& inst) {
  const ColoredDigraph& g = *inst.coloring;
  std::map<std::uint32_t, Vertex> id;
  for (std::size_t i = 0; i < inst.good_colors.size(); ++i)
    id[inst.good_colors[i]] = static_cast<Vertex>(g.n + i);
  std::vector<std::vector<Vertex>> out;
  for (std::uint32_t a = 0; a < g.n; ++a)
    for (std::uint32_t b = 0; b < g.n; ++b)
      for (std::uint32_t c = 0; c < g.n; ++c) {
        if (!(a < b && a < c) || b == c) continue;
        const std::uint32_t cs[3] = {g.color(a, b), g.color(b, c), g.color(c, a)};
        if (cs[0] == cs[1] || cs[1] == cs[2] || cs[0] == cs[2]) continue;
        if (!id.count(cs[0]) || !id.count(cs[1]) || !id.count(cs[2])) continue;
        std::vector<Vertex> vs = {a, b, c};
        std::vector<Vertex> cc = {id[cs[0]], id[cs[1]], id[cs[2]]};
        std::sort(vs.begin(), vs.end());
        std::sort(cc.begin(), cc.end());
        vs.insert(vs.end(), cc.begin(), cc.end());
        out.push_back(vs);
      }
  std::sort(out.begin(), out.end());
  return out;
}

Matching random_greedy_matching(const Hypergraph& h, std::mt19937_64& rng) {
  std::vector<EdgeId> order(h.num_edges());
  for (EdgeId e = 0; e < h.num_edges(); ++e) order[e] = e;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> used(h.num_vertices(), 0);
  Matching m;
  for (EdgeId e : order) {
    bool ok = true;
    for (Vertex v : h.edge(e)) ok = ok && !used[v];
    if (!ok) continue;
    for (Vertex v : h.edge(e)) used[v] = 1;
    m.edge_ids.push_back(e);
  }
  return m;
}

}  // namespace

TEST(CyclicColoring, OddNIsProperWithDistinctLoops) {
  const ColoredDigraph g = gen_cyclic_coloring(5);
  EXPECT_TRUE(validate_proper(g).proper);
  std::set<std::uint32_t> loops;
  for (std::size_t v = 0; v < 5; ++v) loops.insert(g.color(v, v));
  EXPECT_EQ(loops.size(), 5u);
  // Independent check of properness: every (tail, colour) and (head, colour)
  // pair occurs exactly once.
  std::map<std::pair<std::size_t, std::uint32_t>, int> tails, heads;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_LT(g.color(i, j), 5u);
      ++tails[{i, g.color(i, j)}];
      ++heads[{j, g.color(i, j)}];
    }
  EXPECT_EQ(tails.size(), 25u);
  EXPECT_EQ(heads.size(), 25u);
}

TEST(CyclicColoring, EvenNLoopColours) {
  const ColoredDigraph g = gen_cyclic_coloring(4);
  EXPECT_TRUE(validate_proper(g).proper);
  std::vector<std::uint32_t> loops;
  for (std::size_t v = 0; v < 4; ++v) loops.push_back(g.color(v, v));
  EXPECT_EQ(loops, (std::vector<std::uint32_t>{0, 2, 0, 2}));
}

TEST(CyclicColoring, CorruptionDetected) {
  ColoredDigraph g = gen_cyclic_coloring(6);
  std::swap(g.color(0, 1), g.color(0, 2));
  const ProperCheck pc = validate_proper(g);
  EXPECT_FALSE(pc.proper);
  EXPECT_FALSE(pc.problem.empty());
  ColoredDigraph h = gen_cyclic_coloring(6);
  h.color(3, 3) = 9;
  EXPECT_FALSE(validate_proper(h).proper);
  EXPECT_THROW(gen_cyclic_coloring(2), std::invalid_argument);
  EXPECT_THROW(gen_triangle_aux(g), std::invalid_argument);
}

TEST(TriangleAux, HandBuiltThreeVertexInstance) {
  // n = 3: 0->1->2->0 has colours 1, 0, 2 and the reverse 2, 0, 1; both
  // are rainbow on the same colour set, so the edge appears twice.
  const DesignInstance inst = gen_triangle_aux(gen_cyclic_coloring(3));
  EXPECT_EQ(inst.good_colors, (std::vector<std::uint32_t>{0, 1, 2}));
  const Hypergraph& h = inst.hypergraph;
  EXPECT_EQ(h.num_vertices(), 6u);
  ASSERT_EQ(h.num_edges(), 2u);
  const std::vector<Vertex> want = {0, 1, 2, 3, 4, 5};
  for (EdgeId e = 0; e < 2; ++e) {
    EXPECT_EQ(std::vector<Vertex>(h.edge(e).begin(), h.edge(e).end()), want);
    EXPECT_EQ(h.multiplicity(e), 2u);
  }
}

TEST(TriangleAux, MatchesBruteForceEnumeration) {
  for (std::size_t n : {5u, 6u, 9u, 12u}) {
    const DesignInstance inst = gen_triangle_aux(gen_cyclic_coloring(n));
    EXPECT_EQ(nftest::edges_of(inst.hypergraph).size(), brute_triangle_edges(inst).size());
    auto got = nftest::edges_of(inst.hypergraph);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, brute_triangle_edges(inst)) << "n = " << n;
  }
}

TEST(TriangleAux, N30Claims) {
  const std::size_t n = 30;
  const DesignInstance inst = gen_triangle_aux(gen_cyclic_coloring(n));
  const Hypergraph& h = inst.hypergraph;
  const double nd = static_cast<double>(n);
  const double np = static_cast<double>(h.num_vertices());
  EXPECT_GE(np, (1 - 1 / std::sqrt(nd)) * 2 * nd);
  EXPECT_LE(np, (1 + 1 / std::sqrt(nd)) * 2 * nd);
  EXPECT_LE(static_cast<double>(inst.bad_triangle_colors.size()), std::sqrt(nd));
  EXPECT_LE(static_cast<double>(inst.bad_loop_colors.size()), std::sqrt(nd));
  EXPECT_EQ(h.uniformity_bound(), 6u);
  EXPECT_TRUE(h.uniform());
  EXPECT_LE(max_codegree(h, 2), 3 * n);
  EXPECT_LE(max_codegree(h, 3), 3 * n);
  EXPECT_LE(max_codegree(h, 4), 6u);
  EXPECT_LE(max_codegree(h, 6), 2u);
  // Each edge has three vertex roles and three colour roles.
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    int vs = 0, cs = 0;
    for (Vertex x : h.edge(e)) (inst.roles[x].kind == RoleKind::Vertex ? vs : cs)++;
    ASSERT_EQ(vs, 3);
    ASSERT_EQ(cs, 3);
  }
}

TEST(TriangleAux, NonRainbowCountsAgreeWithRecount) {
  const std::size_t n = 9;
  const DesignInstance inst = gen_triangle_aux(gen_cyclic_coloring(n));
  const ColoredDigraph& g = *inst.coloring;
  std::vector<std::uint64_t> want(n, 0);
  // Ordered triples with a the smallest vertex give each directed triangle once.
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = a + 1; b < n; ++b)
      for (std::uint32_t c = a + 1; c < n; ++c) {
        if (b == c) continue;
        const std::uint32_t x = g.color(a, b), y = g.color(b, c), z = g.color(c, a);
        if (x == y && y != z) ++want[z];
        if (y == z && z != x) ++want[x];
        if (x == z && x != y) ++want[y];
      }
  EXPECT_EQ(inst.non_rainbow_count, want);
}

TEST(DesignHypergraph, RegularityAndCodegree) {
  const DesignInstance inst = gen_design_hypergraph(15, 2, 3);
  const Hypergraph& h = inst.hypergraph;
  EXPECT_EQ(h.num_vertices(), 105u);
  EXPECT_EQ(h.num_edges(), 455u);
  for (Vertex v = 0; v < h.num_vertices(); ++v) ASSERT_EQ(h.degree(v), 13u);
  EXPECT_EQ(h.uniformity_bound(), 3u);
  const auto edges = nftest::edges_of(h);
  EXPECT_EQ(nftest::brute_max_codegree(h.num_vertices(), edges, 2), 1u);
  EXPECT_EQ(max_codegree(h, 2), 1u);
  // Two t-sets sharing a point lie in exactly one edge; disjoint ones in none.
  auto id = [&](std::uint32_t a, std::uint32_t b) {
    return static_cast<Vertex>(colex_rank({std::min(a, b), std::max(a, b)}));
  };
  const Vertex share[] = {id(0, 1), id(1, 7)};
  const Vertex apart[] = {id(0, 1), id(2, 3)};
  EXPECT_EQ(codegree(h, share), 1u);
  EXPECT_EQ(codegree(h, apart), 0u);
  // Closed-form codegree bound binom(n - (t+i+1), r - (t+i+1)) for i = 0.
  EXPECT_LE(max_codegree(h, 2), binomial(15 - 3, 0));
}

TEST(DesignHypergraph, OtherParametersRegular) {
  for (auto [n, t, r] : {std::tuple{9u, 2u, 4u}, std::tuple{8u, 3u, 4u}, std::tuple{10u, 2u, 5u}}) {
    const DesignInstance inst = gen_design_hypergraph(n, t, r);
    const Hypergraph& h = inst.hypergraph;
    EXPECT_EQ(h.num_vertices(), binomial(n, t));
    EXPECT_EQ(h.num_edges(), binomial(n, r));
    EXPECT_EQ(h.min_degree(), binomial(n - t, r - t));
    EXPECT_EQ(h.max_degree(), binomial(n - t, r - t));
    EXPECT_EQ(h.uniformity_bound(), binomial(r, t));
  }
}

TEST(DesignHypergraph, Errors) {
  EXPECT_THROW(gen_design_hypergraph(10, 3, 3), std::invalid_argument);
  EXPECT_THROW(gen_design_hypergraph(10, 1, 3), std::invalid_argument);
  EXPECT_THROW(gen_design_hypergraph(10, 2, 7), std::invalid_argument);
  EXPECT_THROW(gen_design_hypergraph(4, 2, 5), std::invalid_argument);
  EXPECT_THROW(gen_design_hypergraph(30, 2, 3, 1000), MemoryGuardError);
}

TEST(SteinerTripleSystem, Fano) {
  const Hypergraph h = gen_steiner_triple_system(7);
  EXPECT_EQ(h.num_edges(), 7u);
  const auto edges = nftest::edges_of(h);
  for (Vertex a = 0; a < 7; ++a)
    for (Vertex b = a + 1; b < 7; ++b) ASSERT_EQ(nftest::brute_codegree(edges, {a, b}), 1u);
}

TEST(SteinerTripleSystem, NineAndBeyond) {
  const Hypergraph h9 = gen_steiner_triple_system(9);
  EXPECT_EQ(h9.num_edges(), 12u);
  for (Vertex v = 0; v < 9; ++v) EXPECT_EQ(h9.degree(v), 4u);
  for (std::size_t n : {13u, 15u, 19u, 21u, 25u, 27u, 31u}) {
    const Hypergraph h = gen_steiner_triple_system(n);
    const auto edges = nftest::edges_of(h);
    EXPECT_EQ(h.num_edges(), n * (n - 1) / 6);
    for (Vertex a = 0; a < n; ++a) {
      ASSERT_EQ(h.degree(a), (n - 1) / 2) << n;
      for (Vertex b = a + 1; b < n; ++b)
        ASSERT_EQ(nftest::brute_codegree(edges, {a, b}), 1u) << n;
    }
  }
  EXPECT_THROW(gen_steiner_triple_system(8), std::invalid_argument);
  EXPECT_THROW(gen_steiner_triple_system(1), std::invalid_argument);
}

TEST(CompleteUniform, Counts) {
  EXPECT_EQ(gen_complete_uniform(4, 3).num_edges(), 4u);
  const Hypergraph k60 = gen_complete_uniform(60, 3);
  EXPECT_EQ(k60.num_edges(), 34220u);
  EXPECT_EQ(k60.min_degree(), 1711u);
  EXPECT_EQ(k60.max_degree(), 1711u);
  // Brute force codegree on a sample of pairs.
  const auto edges = nftest::edges_of(k60);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5; ++i) {
    const Vertex a = rng() % 60;
    Vertex b = rng() % 60;
    if (b == a) b = (a + 1) % 60;
    EXPECT_EQ(nftest::brute_codegree(edges, {a, b}), 58u);
  }
  EXPECT_EQ(max_codegree(k60, 2), 58u);
  EXPECT_THROW(gen_complete_uniform(3, 4), std::invalid_argument);
  EXPECT_THROW(gen_complete_uniform(3, 1), std::invalid_argument);
  EXPECT_THROW(gen_complete_uniform(100, 5, 1000), MemoryGuardError);
}

TEST(IndicatorWeights, Examples) {
  std::vector<Vertex> all(200), half(50);
  for (Vertex v = 0; v < 200; ++v) all[v] = v;
  for (Vertex v = 0; v < 50; ++v) half[v] = 4 * v;
  const WeightFamily w = make_indicator_weights({all, {}, half}, {"all", "none", "fifty"});
  ASSERT_EQ(w.size(), 3u);
  EXPECT_DOUBLE_EQ(w[0].total, 200.0);
  EXPECT_EQ(w[1].support_size(), 0u);
  EXPECT_DOUBLE_EQ(w[1].total, 0.0);
  EXPECT_DOUBLE_EQ(w[2].total, 50.0);
  EXPECT_DOUBLE_EQ(w[2].max, 1.0);
  EXPECT_EQ(w[2].name, "fifty");
  EXPECT_EQ(make_indicator_weights({{1}})[0].name, "F0");
  EXPECT_THROW(make_indicator_weights({{1}}, {"a", "b"}), std::invalid_argument);
}

TEST(Colex, RoundTripAndOrder) {
  std::vector<std::uint32_t> prev;
  for (std::uint64_t i = 0; i < binomial(12, 3); ++i) {
    const auto s = colex_unrank(i, 3);
    ASSERT_EQ(colex_rank(s), i);
    ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
    if (i > 0) {
      // Colex: compare from the largest element down.
      ASSERT_TRUE(std::lexicographical_compare(prev.rbegin(), prev.rend(), s.rbegin(), s.rend()));
    }
    prev = s;
  }
  EXPECT_EQ(binomial(10, 3), 120u);
  EXPECT_EQ(binomial(3, 5), 0u);
}

TEST(Extractors, EmptyMatchings) {
  const DesignInstance tri = gen_triangle_aux(gen_cyclic_coloring(7));
  const TriangleFactor f = extract_triangle_factor(tri, Matching{});
  EXPECT_TRUE(f.valid);
  EXPECT_TRUE(f.triangles.empty());
  const DesignInstance des = gen_design_hypergraph(8, 2, 3);
  const PartialSteiner p = extract_partial_steiner(des, Matching{});
  EXPECT_TRUE(p.valid);
  EXPECT_TRUE(p.blocks.empty());
  EXPECT_THROW(extract_partial_steiner(tri, Matching{}), std::invalid_argument);
  EXPECT_THROW(extract_triangle_factor(des, Matching{}), std::invalid_argument);
  EXPECT_THROW(extract_partial_steiner(des, Matching{{999999}}), Error);
}

TEST(Extractors, TwoTriangleFactorOnNine) {
  const DesignInstance inst = gen_triangle_aux(gen_cyclic_coloring(9));
  const Hypergraph& h = inst.hypergraph;
  // First pair of vertex-disjoint edges in id order.
  Matching m;
  for (EdgeId a = 0; a < h.num_edges() && m.edge_ids.empty(); ++a)
    for (EdgeId b = a + 1; b < h.num_edges(); ++b) {
      auto ea = nftest::edges_of(h)[a], eb = nftest::edges_of(h)[b];
      if (!nftest::meets(ea, eb)) {
        m.edge_ids = {a, b};
        break;
      }
    }
  ASSERT_EQ(m.edge_ids.size(), 2u);
  const TriangleFactor f = extract_triangle_factor(inst, m);
  EXPECT_TRUE(f.valid) << f.problem;
  ASSERT_EQ(f.triangles.size(), 2u);
  const ColoredDigraph& g = *inst.coloring;
  std::set<std::uint32_t> vs, cs;
  for (const Triangle& t : f.triangles)
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(t.c[i], g.color(t.v[i], t.v[(i + 1) % 3]));
      vs.insert(t.v[i]);
      cs.insert(t.c[i]);
    }
  EXPECT_EQ(vs.size(), 6u);
  EXPECT_EQ(cs.size(), 6u);
}

TEST(Extractors, SharedColourReported) {
  const DesignInstance inst = gen_triangle_aux(gen_cyclic_coloring(9));
  const Hypergraph& h = inst.hypergraph;
  const auto edges = nftest::edges_of(h);
  // Two edges with disjoint vertex roles but a common colour role.
  for (EdgeId a = 0; a < h.num_edges(); ++a)
    for (EdgeId b = a + 1; b < h.num_edges(); ++b) {
      const std::vector<Vertex> va(edges[a].begin(), edges[a].begin() + 3);
      const std::vector<Vertex> vb(edges[b].begin(), edges[b].begin() + 3);
      const std::vector<Vertex> ca(edges[a].begin() + 3, edges[a].end());
      const std::vector<Vertex> cb(edges[b].begin() + 3, edges[b].end());
      if (nftest::meets(va, vb) || !nftest::meets(ca, cb)) continue;
      const TriangleFactor f = extract_triangle_factor(inst, Matching{{a, b}});
      EXPECT_FALSE(f.valid);
      ASSERT_TRUE(f.conflict.has_value());
      EXPECT_EQ(*f.conflict, (std::pair<EdgeId, EdgeId>{a, b}));
      EXPECT_NE(f.problem.find("colour"), std::string::npos);
      return;
    }
  FAIL() << "no colour-sharing pair found";
}

TEST(Extractors, FanoBlocksOnH7) {
  const DesignInstance inst = gen_design_hypergraph(7, 2, 3);
  const Hypergraph fano = gen_steiner_triple_system(7);
  std::set<std::vector<std::uint32_t>> lines;
  for (const auto& e : nftest::edges_of(fano)) lines.insert({e[0], e[1], e[2]});
  Matching m;
  for (EdgeId e = 0; e < inst.hypergraph.num_edges(); ++e) {
    std::set<std::uint32_t> pts;
    for (Vertex x : inst.hypergraph.edge(e))
      for (auto p : inst.roles[x].value) pts.insert(p);
    if (lines.count(std::vector<std::uint32_t>(pts.begin(), pts.end()))) m.edge_ids.push_back(e);
  }
  ASSERT_EQ(m.edge_ids.size(), 7u);
  EXPECT_TRUE(verify_matching(inst.hypergraph, m).valid);
  const PartialSteiner p = extract_partial_steiner(inst, m);
  EXPECT_TRUE(p.valid);
  EXPECT_EQ(p.blocks.size(), 7u);
  EXPECT_EQ(p.covered_tsets, 21u);
  EXPECT_EQ(p.max_coverage, 1u);
  // Two overlapping blocks are reported.
  const PartialSteiner bad = extract_partial_steiner(inst, Matching{{0, 1}});
  EXPECT_FALSE(bad.valid);
  EXPECT_EQ(bad.max_coverage, 2u);
}

TEST(Extractors, MetamorphicOverGreedyMatchings) {
  const DesignInstance tri = gen_triangle_aux(gen_cyclic_coloring(11));
  const DesignInstance des = gen_design_hypergraph(12, 2, 3);
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const Matching mt = random_greedy_matching(tri.hypergraph, rng);
    ASSERT_TRUE(verify_matching(tri.hypergraph, mt).valid);
    const TriangleFactor f = extract_triangle_factor(tri, mt);
    ASSERT_TRUE(f.valid) << f.problem;
    ASSERT_EQ(f.triangles.size(), mt.edge_ids.size());
    const Matching md = random_greedy_matching(des.hypergraph, rng);
    const PartialSteiner p = extract_partial_steiner(des, md);
    ASSERT_TRUE(p.valid) << p.problem;
    ASSERT_LE(p.max_coverage, 1u);
    ASSERT_EQ(p.covered_tsets, 3 * md.edge_ids.size());
  }
}

TEST(RoleMap, BijectiveAndRoundTrips) {
  for (const DesignInstance& inst :
       {gen_triangle_aux(gen_cyclic_coloring(9)), gen_design_hypergraph(9, 2, 4)}) {
    std::set<std::pair<int, std::vector<std::uint32_t>>> distinct;
    for (const Role& r : inst.roles) distinct.insert({static_cast<int>(r.kind), r.value});
    EXPECT_EQ(distinct.size(), inst.hypergraph.num_vertices());
    const auto j = nlohmann::json::parse(role_map_json(inst).dump());
    const DesignInstance back = instance_from_role_map(j, inst.hypergraph);
    EXPECT_EQ(back.kind, inst.kind);
    EXPECT_EQ(back.n, inst.n);
    EXPECT_EQ(back.t, inst.t);
    EXPECT_EQ(back.r, inst.r);
    ASSERT_EQ(back.roles.size(), inst.roles.size());
    for (std::size_t i = 0; i < inst.roles.size(); ++i) {
      EXPECT_EQ(back.roles[i].kind, inst.roles[i].kind);
      EXPECT_EQ(back.roles[i].value, inst.roles[i].value);
    }
    EXPECT_EQ(back.coloring.has_value(), inst.coloring.has_value());
    if (inst.coloring) {
      EXPECT_EQ(back.coloring->colors, inst.coloring->colors);
      EXPECT_EQ(back.good_colors, inst.good_colors);
    }
  }
  const DesignInstance d = gen_design_hypergraph(6, 2, 3);
  EXPECT_THROW(instance_from_role_map(role_map_json(d), gen_complete_uniform(5, 3)),
               std::invalid_argument);
}
