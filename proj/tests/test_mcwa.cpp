#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nibble_forge/errors.hpp"
#include "nibble_forge/instances.hpp"
#include "nibble_forge/mcwa.hpp"
#include "test_support.hpp"

using namespace nforge;

namespace {

Hypergraph doubled_perfect_matching(std::size_t pairs) {
  std::vector<std::vector<Vertex>> e;
  for (Vertex i = 0; i < pairs; ++i) {
    e.push_back({2 * i, 2 * i + 1});
    e.push_back({2 * i, 2 * i + 1});
  }
  return Hypergraph(2 * pairs, e);
}

// Every vertex lands in exactly one of M, W \ V(M), the survivor, or the
// parked set; the reported counts agree with the lists.
void expect_accounting(const Hypergraph& h, const McwaResult& res) {
  const auto chk = verify_matching(h, res.matching);
  ASSERT_TRUE(chk.valid) << "edges " << chk.first << " and " << chk.second << " overlap";
  const auto mv = matched_vertices(h, res.matching);
  std::vector<int> seen(h.num_vertices(), 0);
  for (Vertex v : mv) ++seen[v];
  for (Vertex v : res.waste) ++seen[v];
  for (Vertex v : res.survivor) ++seen[v];
  for (Vertex v : res.parked) ++seen[v];
  for (Vertex v = 0; v < h.num_vertices(); ++v) ASSERT_EQ(seen[v], 1) << "vertex " << v;
  const auto& r = res.report;
  EXPECT_EQ(r.n, h.num_vertices());
  EXPECT_EQ(r.matched_edges, res.matching.edge_ids.size());
  EXPECT_EQ(r.matched_vertices, mv.size());
  EXPECT_EQ(r.waste, res.waste.size());
  EXPECT_EQ(r.survivor, res.survivor.size());
  EXPECT_EQ(r.parked, res.parked.size());
  EXPECT_EQ(r.leftover, r.n - r.matched_vertices);
  EXPECT_EQ(r.leftover, r.waste + r.survivor + r.parked);
  EXPECT_TRUE(std::is_sorted(res.waste.begin(), res.waste.end()));
  EXPECT_TRUE(std::is_sorted(res.survivor.begin(), res.survivor.end()));
  EXPECT_TRUE(std::is_sorted(res.parked.begin(), res.parked.end()));
}

bool same_states(const ScheduleTrajectory& a, const ScheduleTrajectory& b) {
  if (a.states.size() != b.states.size()) return false;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    if (a.states[i].logDj != b.states[i].logDj) return false;
    if (a.states[i].jstar != b.states[i].jstar) return false;
    if (a.states[i].log_eps != b.states[i].log_eps) return false;
  }
  return a.termination == b.termination;
}

}  // namespace

TEST(RunMcwa, KOneDoubledPerfectMatching) {
  const Hypergraph h = doubled_perfect_matching(20);
  McwaOptions opt;
  opt.seed = 3;
  const McwaResult res = run_mcwa(h, opt);
  EXPECT_EQ(res.report.k, 1u);
  expect_accounting(h, res);
  EXPECT_TRUE(res.report.executed.states.empty());
}

TEST(RunMcwa, KOneCompleteGraphSingleChomp) {
  const Hypergraph h = gen_complete_uniform(40, 2);
  McwaOptions opt;
  opt.gamma = 0.3;
  opt.seed = 11;
  const McwaResult res = run_mcwa(h, opt);
  expect_accounting(h, res);
  const auto& r = res.report;
  ASSERT_EQ(r.per_step.size(), 1u);
  EXPECT_EQ(r.stop_reason, "single chomp done");
  EXPECT_NEAR(r.per_step[0].logx, (1 - 0.09) * r.logB, 1e-12);
  EXPECT_TRUE(r.per_step[0].jstar.empty());
  EXPECT_GT(r.matched_edges, 0u);
}

TEST(RunMcwa, Errors) {
  McwaOptions opt;
  EXPECT_THROW(run_mcwa(Hypergraph(3, {}), opt), std::invalid_argument);
  const Hypergraph h = gen_complete_uniform(8, 3);
  opt.gamma = 1.0;
  EXPECT_THROW(run_mcwa(h, opt), std::invalid_argument);
  opt.gamma = 0.2;
  opt.codegree_bounds = {2.0, 6.0};
  EXPECT_THROW(run_mcwa(h, opt), std::invalid_argument);
  opt.codegree_bounds = {6.0};
  EXPECT_THROW(run_mcwa(h, opt), std::invalid_argument);
  opt.codegree_bounds.clear();
  opt.eps = 0.0;
  EXPECT_THROW(run_mcwa(h, opt), std::invalid_argument);
  EXPECT_THROW(mcwa_mode_from_string("fast"), std::invalid_argument);
  EXPECT_EQ(mcwa_mode_from_string(to_string(McwaMode::Theoretical)), McwaMode::Theoretical);
}

TEST(RunMcwa, MeasuredCodegrees) {
  // K_8^(3): C_2 = 6, C_3 = 1.
  const auto c = measure_codegrees(gen_complete_uniform(8, 3), 100'000'000);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(*c, (std::vector<std::uint64_t>{6, 1}));
  EXPECT_FALSE(measure_codegrees(gen_complete_uniform(8, 3), 3).has_value());
}

TEST(RunMcwa, SuppliedBoundsBelowMeasuredAreFlagged) {
  const Hypergraph h = gen_complete_uniform(12, 3);
  McwaOptions opt;
  opt.codegree_bounds = {5.0, 1.0};  // C_2 = 10
  const McwaResult res = run_mcwa(h, opt);
  EXPECT_TRUE(res.report.inputs_checked);
  EXPECT_EQ(res.report.inputs_violated, std::vector<std::size_t>{2});
  expect_accounting(h, res);
}

TEST(RunMcwa, TheoreticalTrajectoryMatchesStandaloneSchedule) {
  const auto inst = gen_design_hypergraph(14, 2, 3);
  const Hypergraph& h = inst.hypergraph;
  McwaOptions opt;
  opt.mode = McwaMode::Theoretical;
  opt.gamma = 0.2;
  opt.seed = 5;
  const McwaResult res = run_mcwa(h, opt);
  expect_accounting(h, res);
  const auto& r = res.report;
  ASSERT_EQ(r.k, 2u);
  EXPECT_GT(r.matched_edges, 0u);
  EXPECT_EQ(r.t_star, schedule_length(opt.gamma));
  const double logD = std::log(r.D);
  CodegreeLedger l(r.k, logD, r.supplied_logDj, r.logB, opt.gamma);
  EXPECT_DOUBLE_EQ(r.logB, compute_log_B(logD, r.supplied_logDj, std::log(r.eps)));
  const auto standalone = run_schedule(l, false, false, true);
  EXPECT_TRUE(same_states(standalone, r.theoretical));
  // The executed ledger follows the same values for as long as it ran.
  ASSERT_FALSE(r.executed.states.empty());
  ASSERT_LE(r.executed.states.size(), standalone.states.size());
  for (std::size_t i = 0; i < r.executed.states.size(); ++i)
    ASSERT_EQ(r.executed.states[i].logDj, standalone.states[i].logDj) << i;
  if (r.stop_reason == "reached t*") EXPECT_TRUE(same_states(standalone, r.executed));
}

TEST(RunMcwa, EmpiricalFeedsMeasuredCodegrees) {
  const auto inst = gen_design_hypergraph(14, 2, 3);
  McwaOptions opt;
  opt.seed = 8;
  const McwaResult res = run_mcwa(inst.hypergraph, opt);
  expect_accounting(inst.hypergraph, res);
  ASSERT_FALSE(res.report.per_step.empty());
  EXPECT_GT(res.report.matched_edges, 0u);
  for (const auto& s : res.report.per_step) {
    ASSERT_EQ(s.measured_Cj.size(), 2u);
    EXPECT_EQ(s.measured_Cj[1], 1u);  // simple 3-graph
    EXPECT_LE(s.n_after + s.waste, s.n_before);
    EXPECT_EQ(s.t_end >= s.t_begin, true);
  }
  // A design is linear: the matching covers each pair at most once.
  const auto st = extract_partial_steiner(inst, res.matching);
  EXPECT_TRUE(st.valid);
  EXPECT_LE(st.max_coverage, 1u);
}

TEST(RunMcwa, DeterministicForSeed) {
  const Hypergraph h = gen_complete_uniform(13, 3);
  McwaOptions opt;
  opt.seed = 21;
  const McwaResult a = run_mcwa(h, opt);
  const McwaResult b = run_mcwa(h, opt);
  EXPECT_EQ(a.matching.edge_ids, b.matching.edge_ids);
  EXPECT_EQ(a.waste, b.waste);
  EXPECT_EQ(to_json(a.report, true).dump(), to_json(b.report, true).dump());
  opt.seed = 22;
  const McwaResult c = run_mcwa(h, opt);
  EXPECT_NE(to_json(a.report).dump(), to_json(c.report).dump());
}

TEST(RunMcwa, WeightsReported) {
  const Hypergraph h = gen_complete_uniform(13, 3);
  const WeightFamily w = make_indicator_weights({{0, 1, 2, 3, 4, 5}, {6, 7}});
  McwaOptions opt;
  opt.seed = 2;
  const McwaResult res = run_mcwa(h, opt, &w);
  ASSERT_EQ(res.report.per_tau.size(), 2u);
  const auto mv = matched_vertices(h, res.matching);
  const std::set<Vertex> covered(mv.begin(), mv.end());
  const std::vector<std::vector<Vertex>> sets = {{0, 1, 2, 3, 4, 5}, {6, 7}};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& t = res.report.per_tau[i];
    double unc = 0;
    for (Vertex v : sets[i]) unc += covered.count(v) ? 0.0 : 1.0;
    EXPECT_DOUBLE_EQ(t.total, static_cast<double>(sets[i].size()));
    EXPECT_DOUBLE_EQ(t.uncovered, unc);
    EXPECT_DOUBLE_EQ(t.uncovered_fraction, unc / t.total);
    EXPECT_NEAR(t.lower_target, t.total / std::exp(res.report.logB), 1e-9);
  }
  WeightFamily bad = make_indicator_weights({{20}});
  EXPECT_THROW(run_mcwa(h, opt, &bad), std::invalid_argument);
}

TEST(RunMcwa, JsonFields) {
  const Hypergraph h = gen_complete_uniform(10, 3);
  McwaOptions opt;
  const auto j = to_json(run_mcwa(h, opt).report);
  for (const char* key : {"seed", "mode", "gamma", "B", "A", "t_star", "t_reached",
                          "matched_vertices", "waste", "leftover", "target_leftover", "per_tau",
                          "per_step"})
    EXPECT_TRUE(j.contains(key)) << key;
}

class McwaInvariants : public ::testing::TestWithParam<int> {};

TEST_P(McwaInvariants, ValidMatchingAndAccounting) {
  std::mt19937_64 rng(700 + GetParam());
  const std::size_t n = 10 + rng() % 6;
  Hypergraph h;
  switch (GetParam() % 3) {
    case 0: h = gen_complete_uniform(n, 3); break;
    case 1: h = nftest::random_hypergraph(rng, n, 40 + rng() % 40, 2, 4, 0.1); break;
    default: h = gen_design_hypergraph(n, 2, 3).hypergraph; break;
  }
  McwaOptions opt;
  opt.seed = static_cast<std::uint64_t>(GetParam());
  opt.gamma = 0.15 + 0.01 * static_cast<double>(GetParam() % 5);
  opt.mode = GetParam() % 2 ? McwaMode::Theoretical : McwaMode::Empirical;
  opt.min_nibbles = 1 + GetParam() % 4;
  const McwaResult res = run_mcwa(h, opt);
  expect_accounting(h, res);
}

INSTANTIATE_TEST_SUITE_P(Seeds, McwaInvariants, ::testing::Range(0, 30));
