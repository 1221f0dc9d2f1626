#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nibble_forge/hypergraph.hpp"
#include "nibble_forge/weights.hpp"

namespace nforge {

// Arc colouring of the looped complete digraph on n vertices; color(i, j)
// for every ordered pair including loops.
struct ColoredDigraph {
  std::size_t n = 0;
  std::vector<std::uint32_t> colors;  // row-major n x n

  std::uint32_t color(std::size_t i, std::size_t j) const { return colors[i * n + j]; }
  std::uint32_t& color(std::size_t i, std::size_t j) { return colors[i * n + j]; }
};

struct ProperCheck {
  bool proper = true;
  std::string problem;  // first violation, empty when proper
};

// Every vertex is the tail of exactly one arc and the head of exactly one
// arc of each colour in [0, n).
ProperCheck validate_proper(const ColoredDigraph& g);

// color(i, j) = (i + j) mod n. Throws std::invalid_argument for n < 3.
ColoredDigraph gen_cyclic_coloring(std::size_t n);

enum class RoleKind { Vertex, Color, TSet };
std::string to_string(RoleKind k);

struct Role {
  RoleKind kind = RoleKind::Vertex;
  // Vertex: {v}; Color: {c}; TSet: sorted elements of [n].
  std::vector<std::uint32_t> value;
};

struct DesignInstance {
  std::string kind;  // "triangle-aux" or "design"
  std::size_t n = 0;
  std::size_t t = 0;
  std::size_t r = 0;
  Hypergraph hypergraph;
  std::vector<Role> roles;  // indexed by hypergraph vertex
  // Triangle instance only.
  std::optional<ColoredDigraph> coloring;
  std::vector<std::uint64_t> non_rainbow_count;  // N(c) per colour
  std::vector<std::uint32_t> bad_triangle_colors;
  std::vector<std::uint32_t> bad_loop_colors;
  std::vector<std::uint32_t> good_colors;
};

// Auxiliary 6-uniform multihypergraph on V u C_good: one edge
// {v1, v2, v3, c1, c2, c3} per rainbow directed triangle with good colours,
// counted once per orientation. Colour c is Delta-bad when at least n^{3/2}
// non-rainbow directed triangles have exactly one c-arc and loop-bad when at
// least sqrt(n) loops carry c. Throws std::invalid_argument if g is not
// proper.
DesignInstance gen_triangle_aux(const ColoredDigraph& g);

// Vertices: t-subsets of [n] (colex rank); one edge per r-set L made of the
// t-subsets of L. Throws std::invalid_argument unless 2 <= t < r <= 6 and
// r <= n, MemoryGuardError when the incidence count exceeds cap.
DesignInstance gen_design_hypergraph(std::size_t n, std::size_t t, std::size_t r,
                                     std::size_t cap = 100'000'000);

// (2,3,n)-Steiner system: Bose for n = 3 (mod 6), Skolem for n = 1 (mod 6).
// Throws std::invalid_argument otherwise.
Hypergraph gen_steiner_triple_system(std::size_t n);

// All u-subsets of [n] in lexicographic order. Throws std::invalid_argument
// unless 2 <= u <= n, MemoryGuardError above cap incidences.
Hypergraph gen_complete_uniform(std::size_t n, std::size_t u,
                                std::size_t cap = 100'000'000);

// tau_F = indicator of F, named F0, F1, ... unless names are given.
WeightFamily make_indicator_weights(const std::vector<std::vector<Vertex>>& sets,
                                    const std::vector<std::string>& names = {});

// Rank of a sorted subset in colex order: sum binom(s_i, i+1).
std::uint64_t colex_rank(const std::vector<std::uint32_t>& sorted);
std::vector<std::uint32_t> colex_unrank(std::uint64_t rank, std::size_t size);
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

struct Triangle {
  std::uint32_t v[3];  // directed v[0] -> v[1] -> v[2] -> v[0]
  std::uint32_t c[3];  // c[i] = colour of the arc leaving v[i]
};

struct TriangleFactor {
  std::vector<Triangle> triangles;
  bool valid = true;
  std::string problem;
  // Offending pair of matched edge ids when not valid.
  std::optional<std::pair<EdgeId, EdgeId>> conflict;
};

// Throws Error when a matched edge does not decode to three vertices and
// three colours.
TriangleFactor extract_triangle_factor(const DesignInstance& inst, const Matching& m);

struct PartialSteiner {
  std::vector<std::vector<std::uint32_t>> blocks;
  bool valid = true;
  std::size_t max_coverage = 0;
  std::size_t covered_tsets = 0;
  std::string problem;
};

PartialSteiner extract_partial_steiner(const DesignInstance& inst, const Matching& m);

// Sidecar: {"kind", "n", "t", "r", "roles": {"<id>": {"kind", "value"}}, ...}.
nlohmann::json role_map_json(const DesignInstance& inst);
// Restores everything but the hypergraph, which is attached by the caller.
DesignInstance instance_from_role_map(const nlohmann::json& j, Hypergraph h);

}  // namespace nforge
