#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "nibble_forge/errors.hpp"
#include "nibble_forge/hypergraph.hpp"

namespace nforge {

namespace {

// Splits a line into unsigned integers; anything after '#' is ignored.
bool parse_ints(const std::string& line, std::size_t lineno,
                std::vector<std::uint64_t>& out) {
  out.clear();
  const char* p = line.data();
  const char* end = p + line.size();
  if (auto hash = line.find('#'); hash != std::string::npos) end = p + hash;
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    std::uint64_t v = 0;
    auto [q, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (q < end && *q != ' ' && *q != '\t' && *q != '\r'))
      throw ParseError(lineno, "expected a nonnegative integer");
    out.push_back(v);
    p = q;
  }
  return !out.empty();
}

}  // namespace

Hypergraph load_hypergraph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::uint64_t> ints;
  bool have_header = false;
  std::uint64_t n = 0, m = 0, u = 0;
  std::vector<std::uint64_t> offsets{0};
  std::vector<Vertex> verts;
  while (std::getline(in, line)) {
    ++lineno;
    if (!parse_ints(line, lineno, ints)) continue;
    if (!have_header) {
      if (ints.size() != 3) throw ParseError(lineno, "header must be 'n m u'");
      n = ints[0];
      m = ints[1];
      u = ints[2];
      if (n >= std::numeric_limits<Vertex>::max()) throw ParseError(lineno, "n too large");
      if (m > 0 && u == 0) throw ParseError(lineno, "uniformity bound must be positive");
      have_header = true;
      offsets.reserve(m + 1);
      continue;
    }
    if (offsets.size() - 1 == m) throw ParseError(lineno, "more edge lines than declared");
    if (ints.size() > u) throw ParseError(lineno, "edge exceeds the uniformity bound");
    for (std::size_t i = 0; i < ints.size(); ++i) {
      if (ints[i] >= n) throw ParseError(lineno, "vertex out of range");
      if (i > 0 && ints[i] <= ints[i - 1])
        throw ParseError(lineno, "edge is not strictly increasing");
      verts.push_back(static_cast<Vertex>(ints[i]));
    }
    offsets.push_back(verts.size());
  }
  if (!have_header) throw ParseError(lineno, "missing header");
  if (offsets.size() - 1 != m)
    throw ParseError(lineno, "expected " + std::to_string(m) + " edges, found " +
                                 std::to_string(offsets.size() - 1));
  return Hypergraph::from_flat(n, std::move(offsets), std::move(verts), u);
}

Hypergraph load_hypergraph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return load_hypergraph(in);
}

void save_hypergraph(const Hypergraph& h, std::ostream& out) {
  out << h.num_vertices() << ' ' << h.num_edges() << ' ' << h.uniformity_bound() << '\n';
  std::string buf;
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    buf.clear();
    bool first = true;
    for (Vertex v : h.edge(e)) {
      if (!first) buf.push_back(' ');
      buf += std::to_string(v);
      first = false;
    }
    buf.push_back('\n');
    out << buf;
  }
}

void save_hypergraph(const Hypergraph& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  save_hypergraph(h, out);
}

}  // namespace nforge
