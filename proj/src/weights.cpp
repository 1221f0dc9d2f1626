#include "nibble_forge/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "nibble_forge/errors.hpp"

namespace nforge {

double WeightFunction::total_on(const std::vector<char>& mask) const {
  double s = 0.0;
  for (const auto& [v, w] : entries)
    if (v < mask.size() && mask[v]) s += w;
  return s;
}

void WeightFamily::add(std::string name, std::vector<std::pair<Vertex, double>> entries) {
  WeightFunction f;
  f.name = std::move(name);
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double w = entries[i].second;
    if (!std::isfinite(w) || w < 0)
      throw std::invalid_argument("weight function '" + f.name + "' has an invalid weight");
    if (i > 0 && entries[i].first == entries[i - 1].first)
      throw std::invalid_argument("weight function '" + f.name + "' repeats vertex " +
                                  std::to_string(entries[i].first));
    if (w == 0) continue;
    f.entries.push_back(entries[i]);
    f.total += w;
    f.max = std::max(f.max, w);
  }
  taus_.push_back(std::move(f));
}

std::vector<std::uint32_t> WeightFamily::involvement(std::size_t n) const {
  std::vector<std::uint32_t> inv(n, 0);
  for (const auto& f : taus_)
    for (const auto& [v, w] : f.entries)
      if (v < n) ++inv[v];
  return inv;
}

std::uint32_t WeightFamily::max_involvement(std::size_t n) const {
  auto inv = involvement(n);
  return inv.empty() ? 0 : *std::max_element(inv.begin(), inv.end());
}

std::size_t WeightFamily::vertex_bound() const {
  std::size_t b = 0;
  for (const auto& f : taus_)
    if (!f.entries.empty()) b = std::max<std::size_t>(b, f.entries.back().first + 1);
  return b;
}

WeightFamily WeightFamily::restrict_to(std::span<const Vertex> kept, std::size_t parent_n) const {
  constexpr Vertex kGone = std::numeric_limits<Vertex>::max();
  std::vector<Vertex> rename(std::max(parent_n, vertex_bound()), kGone);
  for (std::size_t i = 0; i < kept.size(); ++i) rename[kept[i]] = static_cast<Vertex>(i);
  WeightFamily out;
  out.taus_.reserve(taus_.size());
  for (const auto& f : taus_) {
    WeightFunction g;
    g.name = f.name;
    for (const auto& [v, w] : f.entries) {
      if (rename[v] == kGone) continue;
      g.entries.emplace_back(rename[v], w);
      g.total += w;
      g.max = std::max(g.max, w);
    }
    out.taus_.push_back(std::move(g));
  }
  return out;
}

WeightFamily load_weights(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("weights: ") + e.what());
  }
  if (!doc.is_array()) throw Error("weights: expected a JSON list");
  WeightFamily fam;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("entries"))
      throw Error("weights: each item needs 'entries'");
    std::string name = item.value("name", "tau" + std::to_string(fam.size()));
    std::vector<std::pair<Vertex, double>> entries;
    for (const auto& pr : item.at("entries")) {
      if (!pr.is_array() || pr.size() != 2) throw Error("weights: entry must be [vertex, weight]");
      entries.emplace_back(pr[0].get<Vertex>(), pr[1].get<double>());
    }
    fam.add(std::move(name), std::move(entries));
  }
  return fam;
}

WeightFamily load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return load_weights(in);
}

void save_weights(const WeightFamily& w, std::ostream& out) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& f : w) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [v, x] : f.entries) entries.push_back({v, x});
    doc.push_back({{"name", f.name}, {"entries", entries}});
  }
  out << doc.dump(2) << '\n';
}

}  // namespace nforge
