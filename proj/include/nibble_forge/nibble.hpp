#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "nibble_forge/codegree_table.hpp"
#include "nibble_forge/errors.hpp"
#include "nibble_forge/hypergraph.hpp"
#include "nibble_forge/report.hpp"
#include "nibble_forge/rng.hpp"
#include "nibble_forge/weights.hpp"

namespace nforge {

// The profile (n, D, eps) is passed separately as a RegularityProfile.
struct NibbleParams {
  double theta = 0.0;
  std::vector<std::size_t> jstar;
  // D_j for j = 2..k+1 at index j-2. Empty: measured codegrees of the input.
  std::vector<double> codegree_bounds;
  Mode mode = Mode::Lenient;
  std::size_t max_retries = 1;
  std::uint64_t seed = 0;
  std::size_t entry_cap = 100'000'000;
};

// f(e): copies e' != e that meet e. Scans the incidence lists of e.
std::uint64_t conflict_count(const Hypergraph& h, EdgeId e);

// f for every edge. Uses subset-count inclusion-exclusion when the table
// fits under entry_cap and is cheaper than scanning; table may be supplied.
std::vector<std::uint64_t> conflict_counts(const Hypergraph& h,
                                           std::size_t entry_cap = 100'000'000,
                                           const CodegreeTable* table = nullptr);

struct MatchProbabilities {
  std::vector<double> p_v;
  double p_star = 0.0;
};

// p(v) = sum over e containing v of p(1-p)^f(e).
MatchProbabilities match_probability(const Hypergraph& h, double p,
                                     std::size_t entry_cap = 100'000'000);
MatchProbabilities match_probability(const Hypergraph& h, double p,
                                     const std::vector<std::uint64_t>& f);

// w(v) = (p* - p(v)) / (1 - p(v)).
double waste_probability(double p_v, double p_star);

// Everything a nibble needs that does not depend on the random draw.
struct NibblePlan {
  double theta = 0.0;
  double p = 0.0;
  std::size_t k = 0;
  std::vector<std::uint64_t> f;
  MatchProbabilities probs;
  std::vector<double> w;
  double max_w = 0.0;
};

// Throws InadmissibleNibble when delta(H) = 0 or theta >= delta(H).
NibblePlan plan_nibble(const Hypergraph& h, double theta,
                       std::size_t entry_cap = 100'000'000,
                       const CodegreeTable* table = nullptr);

// Raw random part of a nibble, ids local to the hypergraph.
struct NibbleDraw {
  std::vector<EdgeId> X;
  std::vector<EdgeId> M;
  std::vector<Vertex> W;
};

// Edges in ascending id order (geometric skips), then one uniform per vertex
// in ascending id order for W.
NibbleDraw draw_nibble(const Hypergraph& h, const NibblePlan& plan, Rng& rng);

struct TauTotals {
  std::string name;
  double before = 0.0;    // tau(V(H))
  double survivor = 0.0;  // tau(V(H'))
  double waste = 0.0;     // tau(W)
  double matched = 0.0;   // tau(V(M))
  double max = 0.0;
  std::size_t support = 0;
};

struct NibbleOutcome {
  std::uint64_t seed = 0;
  std::size_t attempt = 0;
  double theta = 0.0;
  double p = 0.0;
  double p_star = 0.0;
  double max_w = 0.0;
  std::size_t k = 0;
  std::vector<EdgeId> X;
  Matching M;
  std::vector<Vertex> W;
  // Sorted ids (in the input) of the survivor's vertices; survivor vertex i
  // is kept[i].
  std::vector<Vertex> kept;
  Hypergraph survivor;
  std::size_t n = 0;
  std::size_t n_prime = 0;
  std::size_t matched_vertices = 0;
  double D = 0.0;
  double D_prime = 0.0;
  double eps = 0.0;
  double eps_prime = 0.0;
  // Resolved D_j, j = 2..k+1 at index j-2.
  std::vector<double> codegree_bounds;
  std::vector<std::size_t> jstar;
  // Measured C_j(H'), j = 2..k+1 at index j-2, for j in J* (0 elsewhere).
  std::vector<std::uint64_t> survivor_codegrees;
  std::vector<TauTotals> tau_totals;
  ConclusionReport report;
  // Codegree table of the survivor (sizes 2..k) when (c) needed one.
  std::shared_ptr<const CodegreeTable> survivor_table;
};

// Conclusion, hypothesis and analytic checks for an outcome.
ConclusionReport evaluate_conclusions(const NibbleOutcome& out, const NibbleParams& params,
                                      const WeightFamily* weights = nullptr);

// One nibble with params.seed.
NibbleOutcome sample_nibble(const Hypergraph& h, const NibbleParams& params,
                            const RegularityProfile& profile,
                            const WeightFamily* weights = nullptr);

// Hook letting callers append their own checks (e.g. chomp bands).
using ExtraChecks = std::function<void(const NibbleOutcome&, ConclusionReport&)>;

class RetryExhausted : public Error {
 public:
  RetryExhausted(std::size_t attempts, ConclusionReport best)
      : Error("no passing nibble in " + std::to_string(attempts) + " attempts"),
        attempts_(attempts),
        best_(std::move(best)) {}
  std::size_t attempts() const { return attempts_; }
  const ConclusionReport& best_report() const { return best_; }

 private:
  std::size_t attempts_;
  ConclusionReport best_;
};

// The hypothesis checks of evaluate_conclusions, which do not depend on the
// draw.
ConclusionReport check_nibble_hypotheses(const Hypergraph& h, const NibbleParams& params,
                                         const RegularityProfile& profile,
                                         const WeightFamily* weights = nullptr);

// Attempt 0 uses params.seed, attempt i > 0 uses derive_seed(params.seed, i).
// Strict mode returns the first attempt passing every conclusion and
// hypothesis check and throws RetryExhausted otherwise; lenient mode returns
// the attempt with the fewest failed conclusions (ties: smaller violation).
NibbleOutcome nibble_with_retry(const Hypergraph& h, const NibbleParams& params,
                                const RegularityProfile& profile,
                                const WeightFamily* weights = nullptr,
                                const ExtraChecks& extra = {},
                                const NibblePlan* plan = nullptr);

// Outcome for a precomputed plan.
NibbleOutcome run_planned_nibble(const Hypergraph& h, const NibblePlan& plan,
                                 const NibbleParams& params, const RegularityProfile& profile,
                                 const WeightFamily* weights, std::uint64_t seed);

nlohmann::json to_json(const NibbleOutcome& out);

}  // namespace nforge
