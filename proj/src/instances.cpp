#include "nibble_forge/instances.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "nibble_forge/errors.hpp"

namespace nforge {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::uint64_t colex_rank(const std::vector<std::uint32_t>& s) {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < s.size(); ++i) r += binomial(s[i], i + 1);
  return r;
}

std::vector<std::uint32_t> colex_unrank(std::uint64_t rank, std::size_t size) {
  std::vector<std::uint32_t> s(size);
  for (std::size_t i = size; i-- > 0;) {
    std::uint32_t c = static_cast<std::uint32_t>(i);
    while (binomial(c + 1, i + 1) <= rank) ++c;
    s[i] = c;
    rank -= binomial(c, i + 1);
  }
  return s;
}

ProperCheck validate_proper(const ColoredDigraph& g) {
  ProperCheck out;
  const std::size_t n = g.n;
  if (g.colors.size() != n * n) return {false, "colour table has the wrong size"};
  std::vector<std::uint32_t> seen(n);
  for (int dir = 0; dir < 2; ++dir) {
    for (std::size_t v = 0; v < n; ++v) {
      std::fill(seen.begin(), seen.end(), 0);
      for (std::size_t w = 0; w < n; ++w) {
        const std::uint32_t c = dir == 0 ? g.color(v, w) : g.color(w, v);
        if (c >= n) return {false, "colour " + std::to_string(c) + " out of range"};
        if (++seen[c] > 1)
          return {false, "vertex " + std::to_string(v) + " is the " +
                             (dir == 0 ? "tail" : "head") + " of two arcs of colour " +
                             std::to_string(c)};
      }
    }
  }
  return out;
}

ColoredDigraph gen_cyclic_coloring(std::size_t n) {
  if (n < 3) throw std::invalid_argument("cyclic colouring needs n >= 3");
  ColoredDigraph g;
  g.n = n;
  g.colors.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.color(i, j) = static_cast<std::uint32_t>((i + j) % n);
  return g;
}

std::string to_string(RoleKind k) {
  switch (k) {
    case RoleKind::Vertex: return "vertex";
    case RoleKind::Color: return "color";
    case RoleKind::TSet: return "tset";
  }
  return "?";
}

namespace {

RoleKind role_kind_from_string(const std::string& s) {
  if (s == "vertex") return RoleKind::Vertex;
  if (s == "color") return RoleKind::Color;
  if (s == "tset") return RoleKind::TSet;
  throw std::invalid_argument("unknown role kind '" + s + "'");
}

void guard(std::uint64_t requested, std::size_t cap) {
  if (requested > cap) throw MemoryGuardError(requested, cap);
}

}  // namespace

DesignInstance gen_triangle_aux(const ColoredDigraph& g) {
  const ProperCheck pc = validate_proper(g);
  if (!pc.proper) throw std::invalid_argument("colouring is not proper: " + pc.problem);
  const std::size_t n = g.n;
  DesignInstance inst;
  inst.kind = "triangle-aux";
  inst.n = n;
  inst.coloring = g;

  // Each directed triangle on a < b < c once per orientation.
  auto orient = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, int o, Triangle& tr) {
    if (o == 0) {
      tr.v[0] = a; tr.v[1] = b; tr.v[2] = c;
    } else {
      tr.v[0] = a; tr.v[1] = c; tr.v[2] = b;
    }
    for (int i = 0; i < 3; ++i) tr.c[i] = g.color(tr.v[i], tr.v[(i + 1) % 3]);
  };

  inst.non_rainbow_count.assign(n, 0);
  std::vector<std::uint32_t> loops(n, 0);
  for (std::size_t v = 0; v < n; ++v) ++loops[g.color(v, v)];
  Triangle tr;
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = a + 1; b < n; ++b)
      for (std::uint32_t c = b + 1; c < n; ++c)
        for (int o = 0; o < 2; ++o) {
          orient(a, b, c, o, tr);
          const bool e01 = tr.c[0] == tr.c[1], e12 = tr.c[1] == tr.c[2], e02 = tr.c[0] == tr.c[2];
          const int eq = e01 + e12 + e02;
          if (eq == 1) {
            // Exactly two arcs share a colour; the third is the lone arc.
            const std::uint32_t lone = e01 ? tr.c[2] : (e12 ? tr.c[0] : tr.c[1]);
            ++inst.non_rainbow_count[lone];
          }
        }

  const double n32 = std::pow(static_cast<double>(n), 1.5);
  const double sq = std::sqrt(static_cast<double>(n));
  std::vector<char> good(n, 1);
  for (std::uint32_t c = 0; c < n; ++c) {
    if (static_cast<double>(inst.non_rainbow_count[c]) >= n32) {
      inst.bad_triangle_colors.push_back(c);
      good[c] = 0;
    }
    if (static_cast<double>(loops[c]) >= sq) {
      inst.bad_loop_colors.push_back(c);
      good[c] = 0;
    }
  }
  std::vector<std::uint32_t> color_id(n, 0);
  for (std::uint32_t c = 0; c < n; ++c) {
    if (!good[c]) continue;
    color_id[c] = static_cast<std::uint32_t>(n + inst.good_colors.size());
    inst.good_colors.push_back(c);
  }
  const std::size_t nv = n + inst.good_colors.size();
  for (std::uint32_t v = 0; v < n; ++v) inst.roles.push_back({RoleKind::Vertex, {v}});
  for (std::uint32_t c : inst.good_colors) inst.roles.push_back({RoleKind::Color, {c}});

  std::vector<std::uint64_t> offsets{0};
  std::vector<Vertex> verts;
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = a + 1; b < n; ++b)
      for (std::uint32_t c = b + 1; c < n; ++c)
        for (int o = 0; o < 2; ++o) {
          orient(a, b, c, o, tr);
          if (tr.c[0] == tr.c[1] || tr.c[1] == tr.c[2] || tr.c[0] == tr.c[2]) continue;
          if (!good[tr.c[0]] || !good[tr.c[1]] || !good[tr.c[2]]) continue;
          Vertex e[6] = {a, b, c, color_id[tr.c[0]], color_id[tr.c[1]], color_id[tr.c[2]]};
          std::sort(e + 3, e + 6);
          verts.insert(verts.end(), e, e + 6);
          offsets.push_back(verts.size());
        }
  inst.hypergraph = Hypergraph::from_flat(nv, std::move(offsets), std::move(verts), 6);
  return inst;
}

DesignInstance gen_design_hypergraph(std::size_t n, std::size_t t, std::size_t r,
                                     std::size_t cap) {
  if (t < 2 || r <= t || r > 6) throw std::invalid_argument("need 2 <= t < r <= 6");
  if (r > n) throw std::invalid_argument("need r <= n");
  const std::uint64_t nv = binomial(n, t);
  const std::uint64_t m = binomial(n, r);
  const std::uint64_t u = binomial(r, t);
  guard(std::max(nv, m * u), cap);
  DesignInstance inst;
  inst.kind = "design";
  inst.n = n;
  inst.t = t;
  inst.r = r;
  inst.roles.resize(nv);
  for (std::uint64_t i = 0; i < nv; ++i)
    inst.roles[i] = {RoleKind::TSet, colex_unrank(i, t)};

  // Subsets of size t of an r-set, as index lists.
  std::vector<std::vector<std::uint32_t>> subs;
  for (std::uint64_t i = 0; i < u; ++i) subs.push_back(colex_unrank(i, t));
  std::vector<std::uint64_t> offsets{0};
  std::vector<Vertex> verts;
  verts.reserve(m * u);
  std::vector<std::uint32_t> L(r), ts(t);
  std::vector<Vertex> e(u);
  for (std::uint64_t li = 0; li < m; ++li) {
    L = colex_unrank(li, r);
    for (std::uint64_t q = 0; q < u; ++q) {
      for (std::size_t i = 0; i < t; ++i) ts[i] = L[subs[q][i]];
      e[q] = static_cast<Vertex>(colex_rank(ts));
    }
    std::sort(e.begin(), e.end());
    verts.insert(verts.end(), e.begin(), e.end());
    offsets.push_back(verts.size());
  }
  inst.hypergraph =
      Hypergraph::from_flat(nv, std::move(offsets), std::move(verts), static_cast<std::size_t>(u));
  return inst;
}

Hypergraph gen_steiner_triple_system(std::size_t n) {
  if (n < 3 || (n % 6 != 1 && n % 6 != 3))
    throw std::invalid_argument("Steiner triple systems need n = 1 or 3 (mod 6), n >= 3");
  std::vector<std::vector<Vertex>> blocks;
  auto add = [&](Vertex a, Vertex b, Vertex c) {
    std::vector<Vertex> e{a, b, c};
    std::sort(e.begin(), e.end());
    blocks.push_back(std::move(e));
  };
  if (n % 6 == 3) {
    // Bose: idempotent commutative quasigroup of odd order q on Z_q x Z_3.
    const std::size_t q = n / 3;
    auto pt = [&](std::size_t x, std::size_t i) { return static_cast<Vertex>(i * q + x); };
    auto op = [&](std::size_t x, std::size_t y) { return ((x + y) * ((q + 1) / 2)) % q; };
    for (std::size_t x = 0; x < q; ++x) add(pt(x, 0), pt(x, 1), pt(x, 2));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t x = 0; x < q; ++x)
        for (std::size_t y = x + 1; y < q; ++y) add(pt(x, i), pt(y, i), pt(op(x, y), (i + 1) % 3));
  } else {
    // Skolem: half-idempotent commutative quasigroup of order 2m plus a point.
    const std::size_t m = (n - 1) / 6;
    const std::size_t q = 2 * m;
    const Vertex inf = static_cast<Vertex>(n - 1);
    auto pt = [&](std::size_t x, std::size_t i) { return static_cast<Vertex>(i * q + x); };
    auto op = [&](std::size_t x, std::size_t y) {
      const std::size_t s = (x + y) % q;
      return s % 2 == 0 ? s / 2 : m + (s - 1) / 2;
    };
    for (std::size_t x = 0; x < m; ++x) add(pt(x, 0), pt(x, 1), pt(x, 2));
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t i = 0; i < 3; ++i) add(inf, pt(x + m, i), pt(x, (i + 1) % 3));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t x = 0; x < q; ++x)
        for (std::size_t y = x + 1; y < q; ++y) add(pt(x, i), pt(y, i), pt(op(x, y), (i + 1) % 3));
  }
  std::sort(blocks.begin(), blocks.end());
  return Hypergraph(n, blocks, 3);
}

Hypergraph gen_complete_uniform(std::size_t n, std::size_t u, std::size_t cap) {
  if (u < 2 || u > n) throw std::invalid_argument("need 2 <= u <= n");
  const std::uint64_t m = binomial(n, u);
  guard(m * u, cap);
  std::vector<std::uint64_t> offsets;
  offsets.reserve(m + 1);
  offsets.push_back(0);
  std::vector<Vertex> verts;
  verts.reserve(m * u);
  std::vector<Vertex> s(u);
  for (std::size_t i = 0; i < u; ++i) s[i] = static_cast<Vertex>(i);
  while (true) {
    verts.insert(verts.end(), s.begin(), s.end());
    offsets.push_back(verts.size());
    std::size_t i = u;
    while (i > 0 && s[i - 1] == n - u + i - 1) --i;
    if (i == 0) break;
    ++s[i - 1];
    for (std::size_t j = i; j < u; ++j) s[j] = s[j - 1] + 1;
  }
  return Hypergraph::from_flat(n, std::move(offsets), std::move(verts), u);
}

WeightFamily make_indicator_weights(const std::vector<std::vector<Vertex>>& sets,
                                    const std::vector<std::string>& names) {
  if (!names.empty() && names.size() != sets.size())
    throw std::invalid_argument("one name per set");
  WeightFamily w;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    std::vector<Vertex> f = sets[i];
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
    std::vector<std::pair<Vertex, double>> entries;
    for (Vertex v : f) entries.emplace_back(v, 1.0);
    w.add(names.empty() ? "F" + std::to_string(i) : names[i], std::move(entries));
  }
  return w;
}

TriangleFactor extract_triangle_factor(const DesignInstance& inst, const Matching& m) {
  if (inst.kind != "triangle-aux" || !inst.coloring)
    throw std::invalid_argument("not a triangle instance");
  const ColoredDigraph& g = *inst.coloring;
  const Hypergraph& h = inst.hypergraph;
  TriangleFactor out;
  std::map<std::uint32_t, EdgeId> used_v, used_c;
  auto fail = [&](std::string why, EdgeId a, EdgeId b) {
    if (!out.valid) return;
    out.valid = false;
    out.problem = std::move(why);
    out.conflict = std::make_pair(a, b);
  };
  for (EdgeId e : m.edge_ids) {
    if (e >= h.num_edges()) throw Error("matched edge " + std::to_string(e) + " does not exist");
    std::vector<std::uint32_t> vs, cs;
    for (Vertex x : h.edge(e)) {
      const Role& role = inst.roles.at(x);
      (role.kind == RoleKind::Vertex ? vs : cs).push_back(role.value.at(0));
      if (role.kind == RoleKind::TSet) throw Error("edge " + std::to_string(e) + " has a t-set role");
    }
    if (vs.size() != 3 || cs.size() != 3)
      throw Error("edge " + std::to_string(e) + " does not decode to 3 vertices and 3 colours");
    std::vector<std::uint32_t> want = cs;
    std::sort(want.begin(), want.end());
    Triangle tr{};
    bool found = false;
    for (int o = 0; o < 2 && !found; ++o) {
      tr.v[0] = vs[0];
      tr.v[1] = o == 0 ? vs[1] : vs[2];
      tr.v[2] = o == 0 ? vs[2] : vs[1];
      std::vector<std::uint32_t> got(3);
      for (int i = 0; i < 3; ++i) got[i] = tr.c[i] = g.color(tr.v[i], tr.v[(i + 1) % 3]);
      std::sort(got.begin(), got.end());
      found = got == want && got[0] != got[1] && got[1] != got[2];
    }
    if (!found) fail("edge " + std::to_string(e) + " is not a rainbow directed triangle", e, e);
    for (std::uint32_t v : vs) {
      auto [it, fresh] = used_v.emplace(v, e);
      if (!fresh) fail("vertex " + std::to_string(v) + " used twice", it->second, e);
    }
    for (std::uint32_t c : cs) {
      auto [it, fresh] = used_c.emplace(c, e);
      if (!fresh) fail("colour " + std::to_string(c) + " used twice", it->second, e);
    }
    out.triangles.push_back(tr);
  }
  return out;
}

PartialSteiner extract_partial_steiner(const DesignInstance& inst, const Matching& m) {
  if (inst.kind != "design") throw std::invalid_argument("not a design instance");
  const Hypergraph& h = inst.hypergraph;
  PartialSteiner out;
  std::map<std::uint64_t, std::size_t> cover;
  for (EdgeId e : m.edge_ids) {
    if (e >= h.num_edges()) throw Error("matched edge " + std::to_string(e) + " does not exist");
    std::vector<std::uint32_t> block;
    for (Vertex x : h.edge(e)) {
      const Role& role = inst.roles.at(x);
      if (role.kind != RoleKind::TSet) throw Error("edge " + std::to_string(e) + " is not a design edge");
      block.insert(block.end(), role.value.begin(), role.value.end());
      const std::size_t c = ++cover[x];
      out.max_coverage = std::max(out.max_coverage, c);
      if (c > 1 && out.valid) {
        out.valid = false;
        std::string s;
        for (auto y : role.value) s += (s.empty() ? "" : ",") + std::to_string(y);
        out.problem = "t-set {" + s + "} lies in two blocks";
      }
    }
    std::sort(block.begin(), block.end());
    block.erase(std::unique(block.begin(), block.end()), block.end());
    if (block.size() != inst.r) throw Error("edge " + std::to_string(e) + " does not decode to an r-set");
    out.blocks.push_back(std::move(block));
  }
  out.covered_tsets = cover.size();
  return out;
}

nlohmann::json role_map_json(const DesignInstance& inst) {
  nlohmann::json roles = nlohmann::json::object();
  for (std::size_t i = 0; i < inst.roles.size(); ++i) {
    const Role& r = inst.roles[i];
    nlohmann::json value =
        r.kind == RoleKind::TSet ? nlohmann::json(r.value) : nlohmann::json(r.value.at(0));
    roles[std::to_string(i)] = {{"kind", to_string(r.kind)}, {"value", value}};
  }
  nlohmann::json j = {{"kind", inst.kind}, {"n", inst.n}, {"t", inst.t}, {"r", inst.r},
                      {"roles", roles}};
  if (inst.coloring) {
    j["coloring"] = inst.coloring->colors;
    j["non_rainbow_count"] = inst.non_rainbow_count;
    j["bad_triangle_colors"] = inst.bad_triangle_colors;
    j["bad_loop_colors"] = inst.bad_loop_colors;
    j["good_colors"] = inst.good_colors;
  }
  return j;
}

DesignInstance instance_from_role_map(const nlohmann::json& j, Hypergraph h) {
  DesignInstance inst;
  inst.kind = j.at("kind").get<std::string>();
  inst.n = j.at("n").get<std::size_t>();
  inst.t = j.value("t", std::size_t{0});
  inst.r = j.value("r", std::size_t{0});
  const auto& roles = j.at("roles");
  inst.roles.resize(h.num_vertices());
  if (roles.size() != h.num_vertices())
    throw std::invalid_argument("role map does not match the hypergraph's vertex count");
  for (const auto& [key, val] : roles.items()) {
    const std::size_t id = std::stoul(key);
    if (id >= inst.roles.size()) throw std::invalid_argument("role id out of range");
    Role r;
    r.kind = role_kind_from_string(val.at("kind").get<std::string>());
    if (r.kind == RoleKind::TSet)
      r.value = val.at("value").get<std::vector<std::uint32_t>>();
    else
      r.value = {val.at("value").get<std::uint32_t>()};
    inst.roles[id] = std::move(r);
  }
  if (j.contains("coloring")) {
    ColoredDigraph g;
    g.n = inst.n;
    g.colors = j.at("coloring").get<std::vector<std::uint32_t>>();
    if (g.colors.size() != g.n * g.n) throw std::invalid_argument("colouring has the wrong size");
    inst.coloring = std::move(g);
    inst.non_rainbow_count = j.value("non_rainbow_count", std::vector<std::uint64_t>{});
    inst.bad_triangle_colors = j.value("bad_triangle_colors", std::vector<std::uint32_t>{});
    inst.bad_loop_colors = j.value("bad_loop_colors", std::vector<std::uint32_t>{});
    inst.good_colors = j.value("good_colors", std::vector<std::uint32_t>{});
  }
  inst.hypergraph = std::move(h);
  return inst;
}

}  // namespace nforge
