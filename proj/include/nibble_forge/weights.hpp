#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nibble_forge/hypergraph.hpp"

namespace nforge {

struct WeightFunction {
  std::string name;
  // Sorted by vertex, strictly positive weights only (the support).
  std::vector<std::pair<Vertex, double>> entries;
  double total = 0.0;
  double max = 0.0;

  std::size_t support_size() const { return entries.size(); }
  // Sum of the weights on vertices flagged in mask (mask indexed by vertex).
  double total_on(const std::vector<char>& mask) const;
};

// Sparse nonnegative vertex weight functions over the vertex ids of one
// hypergraph.
class WeightFamily {
 public:
  // Zero weights are dropped; negative or non-finite weights and repeated
  // vertices throw std::invalid_argument.
  void add(std::string name, std::vector<std::pair<Vertex, double>> entries);

  std::size_t size() const { return taus_.size(); }
  bool empty() const { return taus_.empty(); }
  const WeightFunction& operator[](std::size_t i) const { return taus_[i]; }
  auto begin() const { return taus_.begin(); }
  auto end() const { return taus_.end(); }

  // Number of supports containing each vertex, for vertices 0..n-1.
  std::vector<std::uint32_t> involvement(std::size_t n) const;
  std::uint32_t max_involvement(std::size_t n) const;
  // Largest vertex id mentioned plus one (0 when empty).
  std::size_t vertex_bound() const;

  // Keeps only the listed vertices (sorted, distinct ids below parent_n) and
  // renames kept[i] to i, matching induce().
  WeightFamily restrict_to(std::span<const Vertex> kept, std::size_t parent_n) const;

 private:
  std::vector<WeightFunction> taus_;
};

// JSON: [{"name": ..., "entries": [[vertex, weight], ...]}, ...]
WeightFamily load_weights(std::istream& in);
WeightFamily load_weights(const std::string& path);
void save_weights(const WeightFamily& w, std::ostream& out);

}  // namespace nforge
