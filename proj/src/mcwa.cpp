#include "nibble_forge/mcwa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nibble_forge/chomp.hpp"
#include "nibble_forge/codegree_table.hpp"
#include "nibble_forge/errors.hpp"
#include "nibble_forge/rng.hpp"

namespace nforge {

namespace {

constexpr double kSlack = 2.0;  // log of the e^2 slack on measured codegrees

std::vector<double> logs_of(const std::vector<std::uint64_t>& c) {
  std::vector<double> v;
  for (auto x : c) v.push_back(std::log(static_cast<double>(std::max<std::uint64_t>(x, 1))));
  return v;
}

std::vector<Vertex> root_ids(const Hypergraph& g) {
  std::vector<Vertex> v(g.num_vertices());
  for (Vertex i = 0; i < g.num_vertices(); ++i) v[i] = g.root_vertex(i);
  return v;
}

double log_target(double n, double logB, double gamma, double A, double logD) {
  const double lld = logD > 0 ? std::log(logD) : -std::numeric_limits<double>::infinity();
  return std::log(n) + (-1.0 + gamma) * logB + A * lld;
}

void check_bounds(const std::vector<double>& Dj, std::size_t k) {
  if (Dj.size() != k) throw std::invalid_argument("need D_j for j = 2..k+1");
  for (std::size_t i = 0; i < Dj.size(); ++i) {
    if (!(Dj[i] >= 1.0)) throw std::invalid_argument("D_j must be at least 1");
    if (i > 0 && Dj[i] > Dj[i - 1]) throw std::invalid_argument("D_j must be nonincreasing");
  }
}

}  // namespace

std::string to_string(McwaMode m) {
  return m == McwaMode::Theoretical ? "theoretical" : "empirical";
}

McwaMode mcwa_mode_from_string(const std::string& s) {
  if (s == "theoretical") return McwaMode::Theoretical;
  if (s == "empirical") return McwaMode::Empirical;
  throw std::invalid_argument("unknown MCWA mode '" + s + "'");
}

std::optional<std::vector<std::uint64_t>> measure_codegrees(const Hypergraph& h,
                                                            std::size_t entry_cap) {
  const std::size_t u = h.uniformity_bound();
  if (u < 2) return std::vector<std::uint64_t>{};
  const std::size_t k = u - 1;
  std::vector<std::size_t> sizes;
  for (std::size_t j = 2; j <= k; ++j) sizes.push_back(j);
  if (CodegreeTable::required_entries(h, sizes) > entry_cap) return std::nullopt;
  std::vector<std::uint64_t> out(k, 0);
  if (!sizes.empty()) {
    CodegreeTable t(h, sizes, entry_cap);
    for (std::size_t j = 2; j <= k; ++j) out[j - 2] = t.max_count(j);
  }
  out[k - 1] = max_codegree(h, k + 1, entry_cap);
  return out;
}

McwaResult run_mcwa(const Hypergraph& input, const McwaOptions& opt,
                    const WeightFamily* weights) {
  if (input.num_edges() == 0) throw std::invalid_argument("hypergraph has no edges");
  if (input.uniformity_bound() < 2) throw std::invalid_argument("edges must have at least 2 vertices");
  if (!(opt.gamma > 0.0 && opt.gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (weights != nullptr && weights->vertex_bound() > input.num_vertices())
    throw std::invalid_argument("weights mention vertices outside the hypergraph");

  // Fresh labels so every reported id is an id of the input.
  const Hypergraph H = Hypergraph::from_flat(input.num_vertices(), input.offsets(),
                                             input.flat_vertices(), input.uniformity_bound());
  const std::size_t k = H.uniformity_bound() - 1;
  const bool strict = opt.check_mode == Mode::Strict;
  const bool enforce = opt.enforce_ct1.value_or(strict);

  McwaResult res;
  McwaReport& rep = res.report;
  rep.seed = opt.seed;
  rep.mode = opt.mode;
  rep.check_mode = opt.check_mode;
  rep.gamma = opt.gamma;
  rep.k = k;
  rep.n = H.num_vertices();
  rep.A = 10.0 / std::pow(opt.gamma, 4);

  // Isolated vertices can never be covered.
  std::vector<Vertex> active;
  for (Vertex v = 0; v < H.num_vertices(); ++v) {
    if (H.degree(v) > 0)
      active.push_back(v);
    else
      res.parked.push_back(v);
  }
  if (!res.parked.empty())
    rep.events.push_back("parked " + std::to_string(res.parked.size()) + " isolated vertices");
  Hypergraph cur = induce(H, active);

  const RegularityProfile fitted = fit_regularity(cur, 1.0 / static_cast<double>(H.num_vertices()));
  rep.D = fitted.D;
  rep.eps = opt.eps.value_or(fitted.eps);
  if (!(rep.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double logD = std::log(rep.D);

  auto measured = measure_codegrees(cur, opt.entry_cap);
  if (measured) rep.measured_logDj = logs_of(*measured);
  std::vector<double> Dj = opt.codegree_bounds;
  if (Dj.empty()) {
    if (!measured) throw std::invalid_argument("codegree tables exceed the cap; supply D_j");
    for (auto c : *measured) Dj.push_back(static_cast<double>(std::max<std::uint64_t>(c, 1)));
  }
  check_bounds(Dj, k);
  for (double d : Dj) rep.supplied_logDj.push_back(std::log(d));
  if (measured) {
    rep.inputs_checked = true;
    for (std::size_t j = 2; j <= k + 1; ++j)
      if (static_cast<double>((*measured)[j - 2]) > Dj[j - 2]) rep.inputs_violated.push_back(j);
    if (!rep.inputs_violated.empty())
      rep.events.push_back("supplied D_j below measured C_j for " +
                           std::to_string(rep.inputs_violated.size()) + " indices");
  } else {
    rep.events.push_back("supplied D_j trusted: codegree tables exceed the cap");
  }

  const double log_eps = std::log(rep.eps);
  rep.logB = compute_log_B(logD, rep.supplied_logDj, log_eps);
  rep.logB_measured =
      measured ? compute_log_B(logD, rep.measured_logDj, log_eps) : rep.logB;
  const double n = static_cast<double>(rep.n);
  rep.log_target_leftover = log_target(n, rep.logB, opt.gamma, rep.A, logD);
  rep.log_target_leftover_measured = log_target(n, rep.logB_measured, opt.gamma, rep.A, logD);

  std::vector<Vertex> all_waste;
  std::size_t chomp_index = 0;

  // Runs one chomp of length floor(logx / theta) on cur.
  auto execute = [&](McwaStep step, const std::vector<double>& logDj) {
    const RegularityProfile prof =
        fit_regularity(cur, 1.0 / static_cast<double>(H.num_vertices()));
    step.n_before = cur.num_vertices();
    step.edges_before = cur.num_edges();
    step.D_fit = prof.D;
    step.eps_fit = prof.eps;
    step.scheduled_logDj = logDj;
    ChompParams cp;
    cp.x = std::exp(step.logx);
    cp.jstar = step.jstar;
    for (double l : logDj) cp.codegree_bounds.push_back(std::max(1.0, std::exp(l)));
    for (std::size_t i = 1; i < cp.codegree_bounds.size(); ++i)
      cp.codegree_bounds[i] = std::min(cp.codegree_bounds[i], cp.codegree_bounds[i - 1]);
    cp.mode = opt.check_mode;
    cp.max_retries_per_nibble = opt.max_retries_per_nibble;
    cp.seed = derive_seed(opt.seed, chomp_index++);
    cp.theta_override = step.theta;
    cp.T_override = step.T;
    cp.park_isolated = true;
    cp.entry_cap = opt.entry_cap;
    WeightFamily w;
    if (weights != nullptr) w = weights->restrict_to(root_ids(cur), H.num_vertices());
    ChompResult cr = run_chomp(cur, cp, prof, weights != nullptr ? &w : nullptr);
    res.matching.edge_ids.insert(res.matching.edge_ids.end(), cr.matching.edge_ids.begin(),
                                 cr.matching.edge_ids.end());
    all_waste.insert(all_waste.end(), cr.waste.begin(), cr.waste.end());
    res.parked.insert(res.parked.end(), cr.parked.begin(), cr.parked.end());
    step.matched_edges = cr.matching.edge_ids.size();
    step.waste = cr.waste.size();
    step.parked = cr.parked.size();
    step.nibbles_run = cr.trace.iterations.size() - 1;
    for (const auto& it : cr.trace.iterations) step.failed_checks += it.failed_checks;
    step.chomp_stop_reason = cr.trace.stop_reason;
    cur = std::move(cr.survivor);
    step.n_after = cur.num_vertices();
    rep.per_step.push_back(std::move(step));
  };

  // Sets aside vertices a chomp left isolated.
  auto park = [&] {
    if (cur.num_vertices() == 0 || cur.min_degree() > 0) return;
    std::vector<Vertex> keep;
    for (Vertex v = 0; v < cur.num_vertices(); ++v) {
      if (cur.degree(v) > 0)
        keep.push_back(v);
      else
        res.parked.push_back(cur.root_vertex(v));
    }
    cur = induce(cur, keep);
  };

  auto runnable_theta = [&](double& theta) {
    const RegularityProfile prof =
        fit_regularity(cur, 1.0 / static_cast<double>(H.num_vertices()));
    theta = chomp_theta(prof.D);
    return theta > 0.0 && theta < 1.0;
  };

  if (rep.logB <= 0.0) {
    rep.stop_reason = "B = 1: nothing to chomp";
  } else if (k == 1) {
    // Single chomp with x = B^{1 - gamma^2}.
    McwaStep step;
    step.logx = (1.0 - opt.gamma * opt.gamma) * rep.logB;
    double theta = 0;
    if (!runnable_theta(theta)) {
      rep.stop_reason = "degrees too small for theta = 1/log^2 D";
    } else {
      step.theta = theta;
      step.T = static_cast<std::size_t>(std::floor(step.logx / theta));
      if (step.T == 0) {
        rep.stop_reason = "chomp length is 0";
      } else {
        execute(step, rep.supplied_logDj);
        rep.stop_reason = "single chomp done";
      }
    }
  } else {
    CodegreeLedger ledger(k, logD, rep.supplied_logDj, rep.logB, opt.gamma);
    rep.t_star = ledger.t_star();
    const bool clamp = !strict;
    rep.theoretical = run_schedule(ledger, false, enforce, clamp);

    ScheduleTrajectory& ex = rep.executed;
    ex.k = k;
    ex.logD = logD;
    ex.logB = rep.logB;
    ex.gamma = opt.gamma;
    ex.initial_logDj = rep.supplied_logDj;
    ex.enforce_ct1 = enforce;
    ex.clamp_order = clamp;

    bool open = false;
    McwaStep step;
    std::vector<double> batch_logDj;
    IndexMask mask = ~IndexMask{0};
    double theta = 0;

    auto flush = [&](bool final_batch) {
      step.T = static_cast<std::size_t>(std::floor(step.logx / theta));
      if (step.T == 0) {
        if (final_batch) rep.events.push_back("final batch shorter than one nibble; skipped");
        open = false;
        return;
      }
      step.t_end = ledger.t();
      for (std::size_t j = 2; j <= k; ++j)
        if ((mask >> j) & 1u) step.jstar.push_back(j);
      execute(step, batch_logDj);
      open = false;
    };

    while (true) {
      if (!open) {
        park();
        if (cur.num_vertices() == 0 || cur.num_edges() == 0) {
          rep.stop_reason = cur.num_vertices() == 0 ? "survivor empty" : "survivor has no edges";
          ex.termination = "stopped";
          break;
        }
        if (!runnable_theta(theta)) {
          rep.stop_reason = "degrees too small for theta = 1/log^2 D";
          ex.termination = "stopped";
          break;
        }
        step = McwaStep{};
        if (opt.mode == McwaMode::Empirical) {
          auto c = measure_codegrees(cur, opt.entry_cap);
          if (c) {
            step.measured_Cj = *c;
            const auto logs = logs_of(*c);
            const std::size_t t = ledger.t();
            if (t < rep.theoretical.states.size()) {
              const auto& th = rep.theoretical.states[t].logDj;
              for (std::size_t j = 2; j <= k + 1; ++j) {
                if (logs[j - 2] > th[j - 2] + kSlack) {
                  const std::string msg = "t=" + std::to_string(t) + ": C_" + std::to_string(j) +
                                          " exceeds the scheduled D_j by more than e^2";
                  if (strict) throw HypothesisFailure(msg);
                  rep.events.push_back(msg);
                }
              }
            }
            ledger.set_logDj(logs);
          } else {
            rep.events.push_back("t=" + std::to_string(ledger.t()) +
                                 ": codegrees not measurable under the cap; ledger values kept");
          }
        }
        step.t_begin = ledger.t();
        step.theta = theta;
        batch_logDj = ledger.logDj_all();
        mask = ~IndexMask{0};
        open = true;
      }

      TrajectoryState s;
      s.t = ledger.t();
      s.logDj = ledger.logDj_all();
      s.log_eps = ledger.log_eps();
      StepResult r = advance(ledger, enforce, clamp);
      if (r.reordered) ++ex.reorders;
      s.super_stuck = r.classification.super_stuck;
      s.semi_stuck = r.classification.semi_stuck;
      s.jstar = jstar_mask(r.classification);
      s.ct1_margin = r.ct1_margin;
      ex.states.push_back(std::move(s));

      if (r.status == StepStatus::Terminated) {
        ex.termination = "t_star";
        rep.stop_reason = "reached t*";
        if (open && step.logx > 0) flush(true);
        break;
      }
      if (r.status == StepStatus::Ct1Failed) {
        ++ex.ct1_failures;
        if (ex.ct1_failures <= 8)
          rep.events.push_back("t=" + std::to_string(r.t) + ": (Ct1) fails, margin " +
                               log_to_string(r.ct1_margin));
        if (ledger.terminated()) {
          ex.termination = "ct1";
          rep.stop_reason = "(Ct1) failed";
          if (open && step.logx > 0) flush(true);
          break;
        }
      }
      step.logx += ledger.logx();
      mask &= jstar_mask(r.classification);
      const double nib = std::floor(step.logx / theta);
      if (nib >= static_cast<double>(opt.min_nibbles) || ledger.t() == ledger.t_star()) flush(false);
    }
    if (ex.ct1_failures > 8)
      rep.events.push_back("(Ct1) failed at " + std::to_string(ex.ct1_failures) + " steps in total");
    ex.t_end = ex.states.empty() ? 0 : ex.states.back().t;
    rep.t_reached = ex.t_end;
    rep.ct1_failures = ex.ct1_failures;
  }

  // Final accounting against the input.
  const MatchingCheck mc = verify_matching(H, res.matching);
  if (!mc.valid) throw std::logic_error("MCWA produced an invalid matching");
  const auto mv = matched_vertices(H, res.matching);
  std::vector<char> matched(H.num_vertices(), 0);
  for (Vertex v : mv) matched[v] = 1;
  std::sort(all_waste.begin(), all_waste.end());
  all_waste.erase(std::unique(all_waste.begin(), all_waste.end()), all_waste.end());
  for (Vertex v : all_waste)
    if (!matched[v]) res.waste.push_back(v);
  res.survivor = root_ids(cur);
  std::sort(res.parked.begin(), res.parked.end());

  rep.matched_edges = res.matching.edge_ids.size();
  rep.matched_vertices = mv.size();
  rep.waste = res.waste.size();
  rep.survivor = res.survivor.size();
  rep.parked = res.parked.size();
  rep.leftover = rep.n - rep.matched_vertices;
  if (rep.matched_vertices + rep.waste + rep.survivor + rep.parked != rep.n)
    throw std::logic_error("MCWA leftover accounting does not add up");

  if (weights != nullptr) {
    for (const auto& tau : *weights) {
      McwaTauReport t;
      t.name = tau.name;
      t.total = tau.total;
      t.uncovered = tau.total - tau.total_on(matched);
      t.lower_target = tau.total * std::exp(-rep.logB);
      t.log_upper_target = (tau.total > 0 ? std::log(tau.total) : -std::numeric_limits<double>::infinity()) +
                           log_target(1.0, rep.logB, opt.gamma, rep.A, logD);
      t.uncovered_fraction = tau.total > 0 ? t.uncovered / tau.total : 0.0;
      rep.per_tau.push_back(std::move(t));
    }
  }
  return res;
}

namespace {

nlohmann::json trajectory_summary(const ScheduleTrajectory& tr, bool with_states) {
  if (with_states) return to_json(tr);
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : tr.violations)
    viol.push_back({{"observation", v.observation}, {"t", v.t}, {"j", v.j},
                    {"margin", log_to_string(v.margin)}});
  nlohmann::json last = nlohmann::json::array();
  if (!tr.states.empty())
    for (double x : tr.states.back().logDj) last.push_back(log_to_string(x));
  return {{"t_end", tr.t_end},
          {"termination", tr.termination},
          {"ct1_failures", tr.ct1_failures},
          {"violations", viol},
          {"final_logDj", last}};
}

nlohmann::json logs(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(log_to_string(x));
  return a;
}

}  // namespace

nlohmann::json to_json(const McwaReport& r, bool with_states) {
  nlohmann::json per_tau = nlohmann::json::array();
  for (const auto& t : r.per_tau)
    per_tau.push_back({{"name", t.name},
                       {"total", json_number(t.total)},
                       {"uncovered", json_number(t.uncovered)},
                       {"uncovered_fraction", json_number(t.uncovered_fraction)},
                       {"lower_target", json_number(t.lower_target)},
                       {"log_upper_target", json_number(t.log_upper_target)},
                       {"lower_target_met", t.uncovered >= t.lower_target}});
  nlohmann::json per_step = nlohmann::json::array();
  for (const auto& s : r.per_step)
    per_step.push_back({{"t_begin", s.t_begin},
                        {"t_end", s.t_end},
                        {"logx", json_number(s.logx)},
                        {"theta", json_number(s.theta)},
                        {"T", s.T},
                        {"jstar", s.jstar},
                        {"n_before", s.n_before},
                        {"edges_before", s.edges_before},
                        {"D_fit", json_number(s.D_fit)},
                        {"eps_fit", json_number(s.eps_fit)},
                        {"scheduled_logDj", logs(s.scheduled_logDj)},
                        {"measured_Cj", s.measured_Cj},
                        {"matched_edges", s.matched_edges},
                        {"waste", s.waste},
                        {"parked", s.parked},
                        {"n_after", s.n_after},
                        {"nibbles_run", s.nibbles_run},
                        {"failed_checks", s.failed_checks},
                        {"chomp_stop_reason", s.chomp_stop_reason}});
  const double B = std::exp(r.logB);
  return {{"build_id", build_id()},
          {"seed", r.seed},
          {"mode", to_string(r.mode)},
          {"check_mode", to_string(r.check_mode)},
          {"gamma", r.gamma},
          {"k", r.k},
          {"n", r.n},
          {"D", json_number(r.D)},
          {"eps", json_number(r.eps)},
          {"supplied_logDj", logs(r.supplied_logDj)},
          {"measured_logDj", logs(r.measured_logDj)},
          {"inputs_checked", r.inputs_checked},
          {"inputs_violated", r.inputs_violated},
          {"B", json_number(B)},
          {"logB", log_to_string(r.logB)},
          {"logB_measured", log_to_string(r.logB_measured)},
          {"A", json_number(r.A)},
          {"t_star", r.t_star},
          {"t_reached", r.t_reached},
          {"stop_reason", r.stop_reason},
          {"matched_edges", r.matched_edges},
          {"matched_vertices", r.matched_vertices},
          {"waste", r.waste},
          {"survivor", r.survivor},
          {"parked", r.parked},
          {"leftover", r.leftover},
          {"target_leftover", json_number(std::exp(r.log_target_leftover))},
          {"log_target_leftover", log_to_string(r.log_target_leftover)},
          {"target_leftover_measured", json_number(std::exp(r.log_target_leftover_measured))},
          {"log_target_leftover_measured", log_to_string(r.log_target_leftover_measured)},
          {"ct1_failures", r.ct1_failures},
          {"per_tau", per_tau},
          {"per_step", per_step},
          {"events", r.events},
          {"executed_schedule", trajectory_summary(r.executed, with_states)},
          {"theoretical_schedule", trajectory_summary(r.theoretical, with_states)}};
}

}  // namespace nforge
