#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nforge {

using Vertex = std::uint32_t;
using EdgeId = std::uint32_t;

// Immutable multihypergraph in compressed form.
//
// Edges are stored back to back in one array; duplicate edges are distinct
// copies with their own ids. Every hypergraph remembers, for each vertex and
// edge, the id it had in the root hypergraph it was induced from, so results
// computed on nested survivors can be reported against the original input.
class Hypergraph {
 public:
  Hypergraph() = default;

  // Validates and builds from explicit edge lists. uniformity_bound = 0 means
  // "largest edge size". Throws std::invalid_argument on bad input.
  Hypergraph(std::size_t n, const std::vector<std::vector<Vertex>>& edges,
             std::size_t uniformity_bound = 0);

  // Same, from flat storage: edge e is verts[offsets[e] .. offsets[e+1]).
  static Hypergraph from_flat(std::size_t n, std::vector<std::uint64_t> offsets,
                              std::vector<Vertex> verts,
                              std::size_t uniformity_bound = 0);

  std::size_t num_vertices() const { return n_; }
  std::size_t num_edges() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t uniformity_bound() const { return bound_; }
  bool uniform() const { return uniform_; }

  std::span<const Vertex> edge(EdgeId e) const {
    return {verts_.data() + offsets_[e], verts_.data() + offsets_[e + 1]};
  }
  std::size_t edge_size(EdgeId e) const { return offsets_[e + 1] - offsets_[e]; }
  std::span<const EdgeId> incident(Vertex v) const {
    return {inc_.data() + inc_off_[v], inc_.data() + inc_off_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return inc_off_[v + 1] - inc_off_[v]; }

  // Number of copies of edge e (including e itself).
  std::uint32_t multiplicity(EdgeId e) const { return mult_[e]; }

  std::size_t min_degree() const { return min_deg_; }
  std::size_t max_degree() const { return max_deg_; }

  // Ids in the root hypergraph.
  Vertex root_vertex(Vertex v) const { return vlabel_.empty() ? v : vlabel_[v]; }
  EdgeId root_edge(EdgeId e) const { return elabel_.empty() ? e : elabel_[e]; }

  const std::vector<std::uint64_t>& offsets() const { return offsets_; }
  const std::vector<Vertex>& flat_vertices() const { return verts_; }

  friend Hypergraph induce(const Hypergraph& h, std::span<const Vertex> keep);
  friend bool operator==(const Hypergraph& a, const Hypergraph& b);

 private:
  void build_index();
  void compute_multiplicity();

  std::size_t n_ = 0;
  std::size_t bound_ = 0;
  bool uniform_ = true;
  std::vector<std::uint64_t> offsets_;
  std::vector<Vertex> verts_;
  std::vector<std::uint64_t> inc_off_;
  std::vector<EdgeId> inc_;
  std::vector<std::uint32_t> mult_;
  std::vector<Vertex> vlabel_;
  std::vector<EdgeId> elabel_;
  std::size_t min_deg_ = 0;
  std::size_t max_deg_ = 0;
};

// Structural equality: same n, bound and edge lists in the same order.
bool operator==(const Hypergraph& a, const Hypergraph& b);

struct Matching {
  std::vector<EdgeId> edge_ids;
};

struct RegularityProfile {
  std::size_t n = 0;
  double D = 0.0;
  double eps = 0.0;
};

std::size_t degree(const Hypergraph& h, Vertex v);

// Number of edge copies containing every vertex of u. u need not be sorted.
std::uint64_t codegree(const Hypergraph& h, std::span<const Vertex> u);

// C_j(H). The entry cap bounds the subset-counting table (see CodegreeTable).
std::uint64_t max_codegree(const Hypergraph& h, std::size_t j,
                           std::size_t entry_cap = 100'000'000);

// D = (max+min)/2, eps = max((max-min)/(max+min), eps_floor).
// Throws std::invalid_argument for an edgeless input and InadmissibleNibble
// when some vertex is isolated.
RegularityProfile fit_regularity(const Hypergraph& h, double eps_floor);

// Default floor 1/n.
RegularityProfile fit_regularity(const Hypergraph& h);

// True when every degree lies in [(1-eps)D, (1+eps)D].
bool profile_valid(const Hypergraph& h, const RegularityProfile& p);

// Subhypergraph on the listed vertices (any order, duplicates ignored),
// relabelled to 0..|S|-1 in increasing old id.
Hypergraph induce(const Hypergraph& h, std::span<const Vertex> keep);

struct MatchingCheck {
  bool valid = true;
  std::size_t uncovered = 0;
  // First conflicting pair when invalid.
  EdgeId first = 0;
  EdgeId second = 0;
};

// Throws std::out_of_range for an unknown edge id.
MatchingCheck verify_matching(const Hypergraph& h, const Matching& m);

// Vertices covered by the matching, sorted.
std::vector<Vertex> matched_vertices(const Hypergraph& h, const Matching& m);

// Text format: "n m u" header then one sorted vertex list per edge.
Hypergraph load_hypergraph(std::istream& in);
Hypergraph load_hypergraph(const std::string& path);
void save_hypergraph(const Hypergraph& h, std::ostream& out);
void save_hypergraph(const Hypergraph& h, const std::string& path);

}  // namespace nforge
