#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "nibble_forge/hypergraph.hpp"

namespace nforge {

// Counts, for each requested size j, how many edge copies contain each j-set
// that lies inside some edge. Sets outside every edge have count 0 and are
// never stored.
//
// Sizes 1 and uniformity_bound are not tabled: use degrees and edge
// multiplicities. Requested sizes outside [2, uniformity_bound-1] are ignored.
class CodegreeTable {
 public:
  CodegreeTable(const Hypergraph& h, std::vector<std::size_t> sizes,
                std::size_t entry_cap = 100'000'000);
  ~CodegreeTable();
  CodegreeTable(CodegreeTable&&) noexcept;
  CodegreeTable& operator=(CodegreeTable&&) noexcept;

  // Number of subset occurrences the table would hold for these sizes.
  static std::uint64_t required_entries(const Hypergraph& h,
                                        std::span<const std::size_t> sizes);

  bool has_size(std::size_t j) const;

  // Count for a strictly increasing vertex list of a tabled size.
  std::uint64_t count(std::span<const Vertex> sorted) const;

  // max over tabled j-sets; 0 if no edge has j vertices.
  std::uint64_t max_count(std::size_t j) const;

  std::size_t num_vertices() const { return n_; }

 private:
  struct Level;
  std::size_t n_ = 0;
  std::vector<std::unique_ptr<Level>> levels_;  // indexed by size
};

}  // namespace nforge
