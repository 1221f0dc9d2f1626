#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nibble_forge/hypergraph.hpp"
#include "nibble_forge/nibble.hpp"
#include "nibble_forge/report.hpp"
#include "nibble_forge/weights.hpp"

namespace nforge {

// eps and D come from the RegularityProfile handed to run_chomp.
struct ChompParams {
  double x = 2.0;
  std::vector<std::size_t> jstar;
  // D_j for j = 2..k+1 at index j-2. Empty: measured codegrees of the input.
  std::vector<double> codegree_bounds;
  // Exponent slack for (CP4); only used when weights are supplied.
  double delta = 0.5;
  Mode mode = Mode::Lenient;
  std::size_t max_retries_per_nibble = 1;
  std::uint64_t seed = 0;
  std::optional<double> theta_override;
  std::optional<std::size_t> T_override;
  // Move isolated vertices out of the active hypergraph instead of stopping.
  // They stay uncovered and are reported as parked.
  bool park_isolated = false;
  std::size_t entry_cap = 100'000'000;
};

// (C1)-(C5) and, with weights, (CP1)-(CP4). Values and bounds are natural
// logs of the two sides; passed is exact up to a 1e-12 relative tie margin.
ConclusionReport check_chomp_hypotheses(const RegularityProfile& profile, std::size_t k,
                                        const ChompParams& params,
                                        const std::vector<double>& codegree_bounds,
                                        const WeightFamily* weights = nullptr);

struct ChompIteration {
  std::size_t i = 0;
  std::size_t n = 0;  // active vertices plus parked ones
  std::size_t active = 0;
  std::size_t edges = 0;
  double n_lower = 0, n_upper = 0;
  double D = 0;  // chained D^{(i)}
  double D_lower = 0, D_upper = 0;
  double eps = 0;
  std::size_t min_degree = 0, max_degree = 0;
  std::vector<std::size_t> jstar;
  std::vector<double> Dj;                 // scheduled D_j^{(i)}, j in J*
  std::vector<std::uint64_t> measured_Cj;  // C_j(H_i), j in J*
  std::vector<double> tau_total, tau_lower, tau_upper;
  // Outcome of the nibble that produced this iteration (absent for i = 0).
  std::size_t matched_edges = 0;
  std::size_t waste = 0;
  double p_star = 0;
  std::size_t attempt = 0;
  std::size_t failed_checks = 0;
  bool passed = true;
};

struct ChompTrace {
  double theta = 0;
  std::size_t T = 0;
  bool theta_overridden = false;
  bool T_overridden = false;
  std::vector<ChompIteration> iterations;
  bool stopped_early = false;
  std::string stop_reason;
  std::size_t parked = 0;
  ConclusionReport hypotheses;
  ConclusionReport conclusions;
  std::vector<nlohmann::json> nibble_reports;
};

struct ChompResult {
  // Ids are those of the root hypergraph of the input.
  Matching matching;
  std::vector<Vertex> waste;   // union of the W_i
  std::vector<Vertex> parked;  // isolated vertices set aside
  Hypergraph survivor;         // active part of H_T
  ChompTrace trace;
  // Vertex sets of the final survivor and the parked vertices, root ids.
  std::size_t leftover() const { return survivor.num_vertices() + parked.size(); }
};

// theta = 1/log^2 D (natural log, initial D), T = floor(log^2 D * log x).
double chomp_theta(double D);
std::size_t chomp_length(double D, double x);

ChompResult run_chomp(const Hypergraph& h, const ChompParams& params,
                      const RegularityProfile& profile, const WeightFamily* weights = nullptr);

void write_trace_csv(const ChompTrace& trace, std::ostream& out);
nlohmann::json to_json(const ChompTrace& trace);

}  // namespace nforge
