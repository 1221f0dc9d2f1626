#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nibble_forge/hypergraph.hpp"
#include "nibble_forge/ledger.hpp"
#include "nibble_forge/report.hpp"
#include "nibble_forge/weights.hpp"

namespace nforge {

enum class McwaMode { Theoretical, Empirical };
std::string to_string(McwaMode m);
McwaMode mcwa_mode_from_string(const std::string& s);

struct McwaOptions {
  double gamma = 0.2;
  // Supplied D_j for j = 2..k+1 at index j-2. Empty: measured C_j(H).
  std::vector<double> codegree_bounds;
  // Supplied eps; empty: fitted from the degrees.
  std::optional<double> eps;
  McwaMode mode = McwaMode::Empirical;
  Mode check_mode = Mode::Lenient;
  std::size_t max_retries_per_nibble = 1;
  std::uint64_t seed = 0;
  // Scheduler steps are pooled until floor(sum log x / theta) reaches this.
  std::size_t min_nibbles = 4;
  // Stop at a failing (Ct1). Empty: only in strict mode.
  std::optional<bool> enforce_ct1;
  std::size_t entry_cap = 100'000'000;
};

struct McwaTauReport {
  std::string name;
  double total = 0;      // tau(V(H))
  double uncovered = 0;  // tau(V(H) \ V(M))
  double lower_target = 0;        // tau(V(H)) / B
  double log_upper_target = 0;    // log of tau(V(H)) B^{-1+gamma} log^A D
  double uncovered_fraction = 0;  // uncovered / total
};

// One chomp, covering scheduler steps t_begin..t_end-1.
struct McwaStep {
  std::size_t t_begin = 0;
  std::size_t t_end = 0;
  double logx = 0;
  double theta = 0;
  std::size_t T = 0;
  std::vector<std::size_t> jstar;
  std::size_t n_before = 0;
  std::size_t edges_before = 0;
  double D_fit = 0;
  double eps_fit = 0;
  std::vector<double> scheduled_logDj;  // ledger values at t_begin, j = 2..k+1
  std::vector<std::uint64_t> measured_Cj;  // C_j(H_t), j = 2..k+1 (empirical mode)
  std::size_t matched_edges = 0;
  std::size_t waste = 0;
  std::size_t parked = 0;
  std::size_t n_after = 0;
  std::size_t failed_checks = 0;
  std::size_t nibbles_run = 0;
  std::string chomp_stop_reason;
};

struct McwaReport {
  std::uint64_t seed = 0;
  McwaMode mode = McwaMode::Empirical;
  Mode check_mode = Mode::Lenient;
  double gamma = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  double D = 0;
  double eps = 0;
  std::vector<double> supplied_logDj;
  std::vector<double> measured_logDj;  // empty when not computable
  bool inputs_checked = false;
  std::vector<std::size_t> inputs_violated;  // j with C_j(H) > D_j
  double logB = 0;           // from the supplied D_j
  double logB_measured = 0;  // from measured C_j (same as logB without them)
  double A = 0;
  std::size_t t_star = 0;
  std::size_t t_reached = 0;
  std::string stop_reason;
  std::size_t matched_edges = 0;
  std::size_t matched_vertices = 0;
  std::size_t waste = 0;     // |W \ V(M)|
  std::size_t survivor = 0;  // |V(H_final)|
  std::size_t parked = 0;
  std::size_t leftover = 0;  // n - matched_vertices
  double log_target_leftover = 0;           // log(n B^{-1+gamma} log^A D)
  double log_target_leftover_measured = 0;  // same with the measured B
  std::vector<McwaTauReport> per_tau;
  std::vector<McwaStep> per_step;
  std::vector<std::string> events;
  std::size_t ct1_failures = 0;
  // Ledger as driven by the executor (k >= 2).
  ScheduleTrajectory executed;
  // Standalone schedule from the same inputs (k >= 2).
  ScheduleTrajectory theoretical;
};

struct McwaResult {
  Matching matching;               // edge ids of the input
  std::vector<Vertex> waste;       // W \ V(M), sorted
  std::vector<Vertex> survivor;    // vertices of the final hypergraph, sorted
  std::vector<Vertex> parked;      // isolated vertices set aside, sorted
  McwaReport report;
};

// Throws std::invalid_argument on bad options, HypothesisFailure and
// RetryExhausted in strict mode.
McwaResult run_mcwa(const Hypergraph& h, const McwaOptions& opt,
                    const WeightFamily* weights = nullptr);

// C_j(H) for j = 2..k+1; std::nullopt when the tables exceed the cap.
std::optional<std::vector<std::uint64_t>> measure_codegrees(const Hypergraph& h,
                                                            std::size_t entry_cap);

nlohmann::json to_json(const McwaReport& r, bool with_states = false);

}  // namespace nforge
