#include "nibble_forge/codegree_table.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <unordered_map>

#include "nibble_forge/errors.hpp"

namespace nforge {

namespace {

using u128 = unsigned __int128;

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

inline std::uint64_t hash_key(std::uint64_t k) { return mix64(k); }
inline std::uint64_t hash_key(u128 k) {
  return mix64(static_cast<std::uint64_t>(k) ^ mix64(static_cast<std::uint64_t>(k >> 64)));
}

// Open addressing counter; the all-ones key is the empty marker and is never
// produced by packing because every vertex id is below 2^bits - 1.
template <class K>
class FlatCounter {
 public:
  FlatCounter() { rehash(1024); }

  void increment(K key) {
    if ((size_ + 1) * 2 > keys_.size()) rehash(keys_.size() * 2);
    std::size_t i = hash_key(key) & mask_;
    while (true) {
      if (keys_[i] == key) {
        ++vals_[i];
        return;
      }
      if (keys_[i] == kEmpty) {
        keys_[i] = key;
        vals_[i] = 1;
        ++size_;
        return;
      }
      i = (i + 1) & mask_;
    }
  }

  std::uint32_t find(K key) const {
    std::size_t i = hash_key(key) & mask_;
    while (true) {
      if (keys_[i] == key) return vals_[i];
      if (keys_[i] == kEmpty) return 0;
      i = (i + 1) & mask_;
    }
  }

  std::uint32_t max_value() const {
    std::uint32_t best = 0;
    for (std::size_t i = 0; i < keys_.size(); ++i)
      if (keys_[i] != kEmpty) best = std::max(best, vals_[i]);
    return best;
  }

 private:
  static constexpr K kEmpty = ~K(0);

  void rehash(std::size_t cap) {
    std::vector<K> old_keys = std::move(keys_);
    std::vector<std::uint32_t> old_vals = std::move(vals_);
    keys_.assign(cap, kEmpty);
    vals_.assign(cap, 0);
    mask_ = cap - 1;
    for (std::size_t i = 0; i < old_keys.size(); ++i) {
      if (old_keys[i] == kEmpty) continue;
      std::size_t p = hash_key(old_keys[i]) & mask_;
      while (keys_[p] != kEmpty) p = (p + 1) & mask_;
      keys_[p] = old_keys[i];
      vals_[p] = old_vals[i];
    }
  }

  std::vector<K> keys_;
  std::vector<std::uint32_t> vals_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

constexpr std::size_t kDensePairLimit = 2048;

std::uint64_t binom_small(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Calls f(subset) for every j-subset of the sorted span, in lexicographic
// order. The subset buffer stays sorted.
template <class F>
void for_each_subset(std::span<const Vertex> e, std::size_t j, std::vector<Vertex>& buf, F&& f) {
  const std::size_t s = e.size();
  if (j > s || j == 0) return;
  std::size_t idx[32];
  for (std::size_t i = 0; i < j; ++i) idx[i] = i;
  buf.resize(j);
  while (true) {
    for (std::size_t i = 0; i < j; ++i) buf[i] = e[idx[i]];
    f(std::span<const Vertex>(buf));
    std::size_t i = j;
    while (i > 0 && idx[i - 1] == s - j + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t q = i; q < j; ++q) idx[q] = idx[q - 1] + 1;
  }
}

}  // namespace

struct CodegreeTable::Level {
  enum class Kind { Dense, Packed64, Packed128, Bytes } kind = Kind::Packed64;
  std::size_t n = 0;
  unsigned bits = 0;
  std::vector<std::uint32_t> dense;
  FlatCounter<std::uint64_t> c64;
  FlatCounter<u128> c128;
  std::unordered_map<std::string, std::uint32_t> bytes;

  std::uint64_t pack64(std::span<const Vertex> s) const {
    std::uint64_t k = 0;
    for (Vertex v : s) k = (k << bits) | v;
    return k;
  }
  u128 pack128(std::span<const Vertex> s) const {
    u128 k = 0;
    for (Vertex v : s) k = (k << bits) | v;
    return k;
  }
  static std::string pack_bytes(std::span<const Vertex> s) {
    return std::string(reinterpret_cast<const char*>(s.data()), s.size() * sizeof(Vertex));
  }

  void add(std::span<const Vertex> s) {
    switch (kind) {
      case Kind::Dense: ++dense[std::size_t{s[0]} * n + s[1]]; break;
      case Kind::Packed64: c64.increment(pack64(s)); break;
      case Kind::Packed128: c128.increment(pack128(s)); break;
      case Kind::Bytes: ++bytes[pack_bytes(s)]; break;
    }
  }
  std::uint64_t get(std::span<const Vertex> s) const {
    switch (kind) {
      case Kind::Dense: return dense[std::size_t{s[0]} * n + s[1]];
      case Kind::Packed64: return c64.find(pack64(s));
      case Kind::Packed128: return c128.find(pack128(s));
      case Kind::Bytes: {
        auto it = bytes.find(pack_bytes(s));
        return it == bytes.end() ? 0 : it->second;
      }
    }
    return 0;
  }
  std::uint64_t max_value() const {
    switch (kind) {
      case Kind::Dense: return dense.empty() ? 0 : *std::max_element(dense.begin(), dense.end());
      case Kind::Packed64: return c64.max_value();
      case Kind::Packed128: return c128.max_value();
      case Kind::Bytes: {
        std::uint64_t best = 0;
        for (const auto& kv : bytes) best = std::max<std::uint64_t>(best, kv.second);
        return best;
      }
    }
    return 0;
  }
};

std::uint64_t CodegreeTable::required_entries(const Hypergraph& h,
                                              std::span<const std::size_t> sizes) {
  std::vector<std::uint64_t> by_size(h.uniformity_bound() + 1, 0);
  for (EdgeId e = 0; e < h.num_edges(); ++e) ++by_size[h.edge_size(e)];
  std::uint64_t total = 0;
  for (std::size_t j : sizes) {
    if (j < 2 || j >= h.uniformity_bound()) continue;
    for (std::size_t s = j; s < by_size.size(); ++s) total += by_size[s] * binom_small(s, j);
  }
  return total;
}

CodegreeTable::CodegreeTable(const Hypergraph& h, std::vector<std::size_t> sizes,
                             std::size_t entry_cap)
    : n_(h.num_vertices()) {
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  sizes.erase(std::remove_if(sizes.begin(), sizes.end(),
                             [&](std::size_t j) { return j < 2 || j >= h.uniformity_bound(); }),
              sizes.end());
  if (!sizes.empty() && sizes.back() > 32)
    throw std::invalid_argument("codegree tables support subsets of at most 32 vertices");
  const std::uint64_t need = required_entries(h, sizes);
  if (need > entry_cap) throw MemoryGuardError(need, entry_cap);

  levels_.resize(h.uniformity_bound() + 1);
  const unsigned bits = static_cast<unsigned>(std::bit_width(std::max<std::size_t>(n_, 1)));
  for (std::size_t j : sizes) {
    auto lvl = std::make_unique<Level>();
    lvl->n = n_;
    lvl->bits = bits;
    if (j == 2 && n_ <= kDensePairLimit) {
      lvl->kind = Level::Kind::Dense;
      lvl->dense.assign(n_ * n_, 0);
    } else if (j * bits <= 64) {
      lvl->kind = Level::Kind::Packed64;
    } else if (j * bits <= 128) {
      lvl->kind = Level::Kind::Packed128;
    } else {
      lvl->kind = Level::Kind::Bytes;
    }
    levels_[j] = std::move(lvl);
  }

  std::vector<Vertex> buf;
  for (std::size_t j : sizes) {
    Level& lvl = *levels_[j];
    for (EdgeId e = 0; e < h.num_edges(); ++e) {
      auto ev = h.edge(e);
      if (ev.size() < j) continue;
      if (lvl.kind == Level::Kind::Dense) {
        for (std::size_t a = 0; a < ev.size(); ++a)
          for (std::size_t b = a + 1; b < ev.size(); ++b)
            ++lvl.dense[std::size_t{ev[a]} * n_ + ev[b]];
      } else {
        for_each_subset(ev, j, buf, [&](std::span<const Vertex> s) { lvl.add(s); });
      }
    }
  }
}

CodegreeTable::~CodegreeTable() = default;
CodegreeTable::CodegreeTable(CodegreeTable&&) noexcept = default;
CodegreeTable& CodegreeTable::operator=(CodegreeTable&&) noexcept = default;

bool CodegreeTable::has_size(std::size_t j) const {
  return j < levels_.size() && levels_[j] != nullptr;
}

std::uint64_t CodegreeTable::count(std::span<const Vertex> sorted) const {
  if (!has_size(sorted.size())) throw std::invalid_argument("subset size not tabled");
  return levels_[sorted.size()]->get(sorted);
}

std::uint64_t CodegreeTable::max_count(std::size_t j) const {
  if (!has_size(j)) throw std::invalid_argument("subset size not tabled");
  return levels_[j]->max_value();
}

}  // namespace nforge
