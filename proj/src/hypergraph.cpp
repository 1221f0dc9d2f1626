#include "nibble_forge/hypergraph.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "nibble_forge/codegree_table.hpp"
#include "nibble_forge/errors.hpp"

namespace nforge {

namespace {

constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Hypergraph::Hypergraph(std::size_t n, const std::vector<std::vector<Vertex>>& edges,
                       std::size_t uniformity_bound) {
  std::vector<std::uint64_t> offsets;
  offsets.reserve(edges.size() + 1);
  offsets.push_back(0);
  std::size_t total = 0;
  for (const auto& e : edges) total += e.size();
  std::vector<Vertex> verts;
  verts.reserve(total);
  for (const auto& e : edges) {
    verts.insert(verts.end(), e.begin(), e.end());
    offsets.push_back(verts.size());
  }
  *this = from_flat(n, std::move(offsets), std::move(verts), uniformity_bound);
}

Hypergraph Hypergraph::from_flat(std::size_t n, std::vector<std::uint64_t> offsets,
                                 std::vector<Vertex> verts,
                                 std::size_t uniformity_bound) {
  if (n >= kNoVertex) throw std::invalid_argument("vertex count too large");
  if (offsets.empty()) offsets.push_back(0);
  if (offsets.front() != 0 || offsets.back() != verts.size())
    throw std::invalid_argument("inconsistent edge offsets");
  const std::size_t m = offsets.size() - 1;
  if (m >= std::numeric_limits<EdgeId>::max())
    throw std::invalid_argument("too many edges");

  std::size_t largest = 0;
  std::size_t smallest = std::numeric_limits<std::size_t>::max();
  for (std::size_t e = 0; e < m; ++e) {
    if (offsets[e + 1] <= offsets[e])
      throw std::invalid_argument("edge " + std::to_string(e) + " is empty");
    const std::size_t sz = offsets[e + 1] - offsets[e];
    largest = std::max(largest, sz);
    smallest = std::min(smallest, sz);
    for (std::uint64_t i = offsets[e]; i < offsets[e + 1]; ++i) {
      if (verts[i] >= n)
        throw std::invalid_argument("edge " + std::to_string(e) +
                                    " has vertex out of range");
      if (i > offsets[e] && verts[i] <= verts[i - 1])
        throw std::invalid_argument("edge " + std::to_string(e) +
                                    " is not strictly increasing");
    }
  }
  if (uniformity_bound == 0) uniformity_bound = largest;
  if (largest > uniformity_bound)
    throw std::invalid_argument("edge larger than the uniformity bound");

  Hypergraph h;
  h.n_ = n;
  h.bound_ = uniformity_bound;
  h.uniform_ = (m == 0) || (smallest == largest && largest == uniformity_bound);
  h.offsets_ = std::move(offsets);
  h.verts_ = std::move(verts);
  h.build_index();
  h.compute_multiplicity();
  return h;
}

void Hypergraph::build_index() {
  const std::size_t m = num_edges();
  inc_off_.assign(n_ + 1, 0);
  for (Vertex v : verts_) ++inc_off_[v + 1];
  for (std::size_t v = 0; v < n_; ++v) inc_off_[v + 1] += inc_off_[v];
  inc_.resize(verts_.size());
  std::vector<std::uint64_t> pos(inc_off_.begin(), inc_off_.end() - 1);
  for (std::size_t e = 0; e < m; ++e)
    for (std::uint64_t i = offsets_[e]; i < offsets_[e + 1]; ++i)
      inc_[pos[verts_[i]]++] = static_cast<EdgeId>(e);
  min_deg_ = n_ == 0 ? 0 : std::numeric_limits<std::size_t>::max();
  max_deg_ = 0;
  for (std::size_t v = 0; v < n_; ++v) {
    const std::size_t d = inc_off_[v + 1] - inc_off_[v];
    min_deg_ = std::min(min_deg_, d);
    max_deg_ = std::max(max_deg_, d);
  }
}

void Hypergraph::compute_multiplicity() {
  const std::size_t m = num_edges();
  mult_.assign(m, 1);
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(verts_.begin() + offsets_[a],
                                        verts_.begin() + offsets_[a + 1],
                                        verts_.begin() + offsets_[b],
                                        verts_.begin() + offsets_[b + 1]);
  };
  bool sorted = true;
  for (std::size_t e = 1; e < m && sorted; ++e) sorted = less(e - 1, e);
  if (sorted) return;

  // Group by content hash, then compare exactly inside hash groups.
  std::vector<std::pair<std::uint64_t, EdgeId>> keyed(m);
  for (std::size_t e = 0; e < m; ++e) {
    std::uint64_t hsh = mix64(offsets_[e + 1] - offsets_[e]);
    for (std::uint64_t i = offsets_[e]; i < offsets_[e + 1]; ++i)
      hsh = mix64(hsh ^ verts_[i]);
    keyed[e] = {hsh, static_cast<EdgeId>(e)};
  }
  std::sort(keyed.begin(), keyed.end());
  auto same = [&](EdgeId a, EdgeId b) {
    return std::equal(verts_.begin() + offsets_[a], verts_.begin() + offsets_[a + 1],
                      verts_.begin() + offsets_[b], verts_.begin() + offsets_[b + 1]);
  };
  for (std::size_t lo = 0; lo < m;) {
    std::size_t hi = lo;
    while (hi < m && keyed[hi].first == keyed[lo].first) ++hi;
    for (std::size_t a = lo; a < hi; ++a) {
      std::uint32_t c = 0;
      for (std::size_t b = lo; b < hi; ++b)
        if (same(keyed[a].second, keyed[b].second)) ++c;
      mult_[keyed[a].second] = c;
    }
    lo = hi;
  }
}

bool operator==(const Hypergraph& a, const Hypergraph& b) {
  return a.n_ == b.n_ && a.bound_ == b.bound_ && a.offsets_ == b.offsets_ &&
         a.verts_ == b.verts_;
}

std::size_t degree(const Hypergraph& h, Vertex v) {
  if (v >= h.num_vertices()) throw std::out_of_range("vertex id out of range");
  return h.degree(v);
}

std::uint64_t codegree(const Hypergraph& h, std::span<const Vertex> u) {
  if (u.empty()) throw std::invalid_argument("codegree of an empty set");
  std::vector<Vertex> s(u.begin(), u.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  for (Vertex v : s)
    if (v >= h.num_vertices()) throw std::out_of_range("vertex id out of range");
  Vertex pivot = s.front();
  for (Vertex v : s)
    if (h.degree(v) < h.degree(pivot)) pivot = v;
  std::uint64_t count = 0;
  for (EdgeId e : h.incident(pivot)) {
    auto ev = h.edge(e);
    if (std::includes(ev.begin(), ev.end(), s.begin(), s.end())) ++count;
  }
  return count;
}

std::uint64_t max_codegree(const Hypergraph& h, std::size_t j, std::size_t entry_cap) {
  if (j < 2 || j > h.uniformity_bound())
    throw std::invalid_argument("codegree order out of range");
  if (j == h.uniformity_bound()) {
    std::uint64_t best = 0;
    for (EdgeId e = 0; e < h.num_edges(); ++e)
      if (h.edge_size(e) == j) best = std::max<std::uint64_t>(best, h.multiplicity(e));
    return best;
  }
  CodegreeTable table(h, {j}, entry_cap);
  return table.max_count(j);
}

RegularityProfile fit_regularity(const Hypergraph& h, double eps_floor) {
  if (!(eps_floor > 0)) throw std::invalid_argument("eps_floor must be positive");
  if (h.num_edges() == 0) throw std::invalid_argument("hypergraph has no edges");
  if (h.min_degree() == 0) throw InadmissibleNibble("hypergraph has an isolated vertex");
  const double lo = static_cast<double>(h.min_degree());
  const double hi = static_cast<double>(h.max_degree());
  RegularityProfile p;
  p.n = h.num_vertices();
  p.D = (hi + lo) / 2.0;
  p.eps = std::max((hi - lo) / (hi + lo), eps_floor);
  return p;
}

RegularityProfile fit_regularity(const Hypergraph& h) {
  const double n = static_cast<double>(std::max<std::size_t>(h.num_vertices(), 1));
  return fit_regularity(h, 1.0 / n);
}

bool profile_valid(const Hypergraph& h, const RegularityProfile& p) {
  if (!(p.eps > 0) || h.num_vertices() == 0) return false;
  return static_cast<double>(h.min_degree()) >= (1.0 - p.eps) * p.D &&
         static_cast<double>(h.max_degree()) <= (1.0 + p.eps) * p.D;
}

Hypergraph induce(const Hypergraph& h, std::span<const Vertex> keep) {
  const std::size_t n = h.num_vertices();
  std::vector<Vertex> relabel(n, kNoVertex);
  for (Vertex v : keep) {
    if (v >= n) throw std::out_of_range("vertex id out of range");
    relabel[v] = 0;
  }
  Vertex next = 0;
  for (std::size_t v = 0; v < n; ++v)
    if (relabel[v] != kNoVertex) relabel[v] = next++;

  Hypergraph out;
  out.n_ = next;
  out.bound_ = h.bound_;
  out.vlabel_.resize(next);
  for (std::size_t v = 0; v < n; ++v)
    if (relabel[v] != kNoVertex) out.vlabel_[relabel[v]] = h.root_vertex(static_cast<Vertex>(v));

  out.offsets_.reserve(h.num_edges() + 1);
  out.offsets_.push_back(0);
  bool uniform = true;
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    auto ev = h.edge(e);
    bool inside = true;
    for (Vertex v : ev)
      if (relabel[v] == kNoVertex) {
        inside = false;
        break;
      }
    if (!inside) continue;
    for (Vertex v : ev) out.verts_.push_back(relabel[v]);
    out.offsets_.push_back(out.verts_.size());
    out.elabel_.push_back(h.root_edge(e));
    out.mult_.push_back(h.mult_[e]);
    if (ev.size() != h.bound_) uniform = false;
  }
  out.uniform_ = uniform;
  out.build_index();
  return out;
}

MatchingCheck verify_matching(const Hypergraph& h, const Matching& m) {
  MatchingCheck res;
  std::vector<std::int64_t> owner(h.num_vertices(), -1);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < m.edge_ids.size(); ++i) {
    const EdgeId e = m.edge_ids[i];
    if (e >= h.num_edges()) throw std::out_of_range("unknown edge id " + std::to_string(e));
    for (Vertex v : h.edge(e)) {
      if (owner[v] >= 0) {
        if (res.valid) {
          res.valid = false;
          res.first = static_cast<EdgeId>(owner[v]);
          res.second = e;
        }
        continue;
      }
      owner[v] = e;
      ++covered;
    }
  }
  res.uncovered = h.num_vertices() - covered;
  return res;
}

std::vector<Vertex> matched_vertices(const Hypergraph& h, const Matching& m) {
  std::vector<Vertex> out;
  for (EdgeId e : m.edge_ids) {
    auto ev = h.edge(e);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace nforge
