#include "nibble_forge/nibble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace nforge {

namespace {

double powlog(double D, double a) {
  const double l = std::log(D);
  return l > 0 ? std::pow(l, a) : 0.0;
}

// Vertex-disjointness of M and isolation of every M-edge inside X.
void assert_isolation(const Hypergraph& h, const NibbleDraw& d) {
  std::vector<std::uint32_t> cnt(h.num_vertices(), 0);
  for (EdgeId e : d.X)
    for (Vertex v : h.edge(e)) ++cnt[v];
  for (EdgeId e : d.M)
    for (Vertex v : h.edge(e))
      if (cnt[v] != 1) throw std::logic_error("matched edge is not isolated in X");
}

std::vector<double> resolve_bounds(const Hypergraph& h, const NibbleParams& params) {
  const std::size_t k = h.uniformity_bound() - 1;
  if (!params.codegree_bounds.empty()) {
    if (params.codegree_bounds.size() != k)
      throw std::invalid_argument("codegree bounds must list D_j for j = 2..k+1");
    return params.codegree_bounds;
  }
  std::vector<double> out(k, 0.0);
  for (std::size_t j = 2; j <= k + 1; ++j)
    out[j - 2] = static_cast<double>(max_codegree(h, j, params.entry_cap));
  return out;
}

}  // namespace

std::uint64_t conflict_count(const Hypergraph& h, EdgeId e) {
  if (e >= h.num_edges()) throw std::out_of_range("unknown edge id");
  std::vector<EdgeId> seen;
  for (Vertex v : h.edge(e))
    for (EdgeId g : h.incident(v))
      if (g != e) seen.push_back(g);
  std::sort(seen.begin(), seen.end());
  return static_cast<std::uint64_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

std::vector<std::uint64_t> conflict_counts(const Hypergraph& h, std::size_t entry_cap,
                                           const CodegreeTable* table) {
  const std::size_t m = h.num_edges();
  std::vector<std::uint64_t> f(m, 0);
  if (m == 0) return f;

  std::size_t smax = 0;
  double ie_cost = 0.0;
  for (EdgeId e = 0; e < m; ++e) {
    smax = std::max(smax, h.edge_size(e));
    ie_cost += std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(h.edge_size(e), 60)));
  }
  double scan_cost = 0.0;
  for (Vertex v = 0; v < h.num_vertices(); ++v)
    scan_cost += static_cast<double>(h.degree(v)) * static_cast<double>(h.degree(v));

  std::vector<std::size_t> sizes;
  for (std::size_t j = 2; j <= smax && j < h.uniformity_bound(); ++j) sizes.push_back(j);

  bool use_table = smax <= 24;
  std::unique_ptr<CodegreeTable> own;
  if (use_table && table != nullptr) {
    for (std::size_t j : sizes) use_table = use_table && table->has_size(j);
  } else {
    table = nullptr;
  }
  if (use_table && table == nullptr) {
    // Hash lookups cost several times a scan step.
    use_table = ie_cost * 4.0 <= scan_cost &&
                CodegreeTable::required_entries(h, sizes) <= entry_cap;
    if (use_table) {
      own = std::make_unique<CodegreeTable>(h, sizes, entry_cap);
      table = own.get();
    }
  }

  if (!use_table) {
    std::vector<EdgeId> stamp(m, static_cast<EdgeId>(-1));
    for (EdgeId e = 0; e < m; ++e) {
      std::uint64_t c = 0;
      for (Vertex v : h.edge(e))
        for (EdgeId g : h.incident(v))
          if (stamp[g] != e) {
            stamp[g] = e;
            ++c;
          }
      f[e] = c - 1;
    }
    return f;
  }

  // |{e' : e' meets e}| by inclusion-exclusion over nonempty subsets of e.
  std::vector<Vertex> buf;
  for (EdgeId e = 0; e < m; ++e) {
    auto ev = h.edge(e);
    const std::size_t s = ev.size();
    std::int64_t total = 0;
    for (std::uint32_t mask = 1; mask < (1u << s); ++mask) {
      const int c = std::popcount(mask);
      std::int64_t cod;
      if (c == 1) {
        cod = static_cast<std::int64_t>(h.degree(ev[std::countr_zero(mask)]));
      } else if (static_cast<std::size_t>(c) == s && s == h.uniformity_bound()) {
        cod = h.multiplicity(e);
      } else {
        buf.clear();
        for (std::size_t i = 0; i < s; ++i)
          if (mask & (1u << i)) buf.push_back(ev[i]);
        cod = static_cast<std::int64_t>(table->count(buf));
      }
      total += (c & 1) ? cod : -cod;
    }
    f[e] = static_cast<std::uint64_t>(total - 1);
  }
  return f;
}

MatchProbabilities match_probability(const Hypergraph& h, double p,
                                     const std::vector<std::uint64_t>& f) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0,1)");
  const double lq = std::log1p(-p);
  std::vector<double> term(h.num_edges());
  std::uint64_t last_f = ~std::uint64_t{0};
  double last_t = 0.0;
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    if (f[e] != last_f) {
      last_f = f[e];
      last_t = p * std::exp(static_cast<double>(f[e]) * lq);
    }
    term[e] = last_t;
  }
  MatchProbabilities out;
  out.p_v.assign(h.num_vertices(), 0.0);
  for (Vertex v = 0; v < h.num_vertices(); ++v) {
    double s = 0.0;
    for (EdgeId e : h.incident(v)) s += term[e];
    out.p_v[v] = s;
    out.p_star = std::max(out.p_star, s);
  }
  return out;
}

MatchProbabilities match_probability(const Hypergraph& h, double p, std::size_t entry_cap) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0,1)");
  return match_probability(h, p, conflict_counts(h, entry_cap));
}

double waste_probability(double p_v, double p_star) {
  if (!(p_v >= 0.0) || !(p_star < 1.0))
    throw std::invalid_argument("need 0 <= p(v) <= p* < 1");
  if (p_v > p_star) throw std::invalid_argument("p(v) exceeds p*");
  return (p_star - p_v) / (1.0 - p_v);
}

NibblePlan plan_nibble(const Hypergraph& h, double theta, std::size_t entry_cap,
                       const CodegreeTable* table) {
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  if (h.num_vertices() == 0 || h.num_edges() == 0)
    throw InadmissibleNibble("nibble needs a nonempty hypergraph");
  const double delta = static_cast<double>(h.min_degree());
  if (delta == 0.0) throw InadmissibleNibble("minimum degree is 0");
  if (theta >= delta)
    throw InadmissibleNibble("theta must be below the minimum degree " +
                             std::to_string(h.min_degree()));
  NibblePlan plan;
  plan.theta = theta;
  plan.p = theta / delta;
  plan.k = h.uniformity_bound() - 1;
  plan.f = conflict_counts(h, entry_cap, table);
  plan.probs = match_probability(h, plan.p, plan.f);
  if (!(plan.probs.p_star < 1.0)) throw InadmissibleNibble("p* reached 1");
  plan.w.resize(h.num_vertices());
  for (Vertex v = 0; v < h.num_vertices(); ++v) {
    plan.w[v] = waste_probability(plan.probs.p_v[v], plan.probs.p_star);
    plan.max_w = std::max(plan.max_w, plan.w[v]);
  }
  return plan;
}

NibbleDraw draw_nibble(const Hypergraph& h, const NibblePlan& plan, Rng& rng) {
  NibbleDraw d;
  const std::uint64_t m = h.num_edges();
  const double lq = std::log1p(-plan.p);
  std::uint64_t i = rng.geometric_gap(lq);
  while (i < m) {
    d.X.push_back(static_cast<EdgeId>(i));
    const std::uint64_t gap = rng.geometric_gap(lq);
    if (gap >= m) break;
    i += gap + 1;
  }
  if (!d.X.empty()) {
    std::vector<std::uint32_t> cnt(h.num_vertices(), 0);
    for (EdgeId e : d.X)
      for (Vertex v : h.edge(e)) ++cnt[v];
    for (EdgeId e : d.X) {
      bool isolated = true;
      for (Vertex v : h.edge(e)) isolated = isolated && cnt[v] == 1;
      if (isolated) d.M.push_back(e);
    }
  }
  for (Vertex v = 0; v < h.num_vertices(); ++v)
    if (rng.uniform() < plan.w[v]) d.W.push_back(v);
  return d;
}

ConclusionReport evaluate_conclusions(const NibbleOutcome& out, const NibbleParams& params,
                                      const WeightFamily* weights) {
  ConclusionReport r;
  const double th = out.theta;
  const double th32 = std::pow(th, 1.5);
  const double n = static_cast<double>(out.n);
  const double k = static_cast<double>(out.k);
  const double log5 = powlog(out.D, 5.0);

  r.add(band_check("a_vertex_count", CheckKind::Conclusion, static_cast<double>(out.n_prime),
                   n * (1 - th - 2 * th32), n * (1 - th + 2 * th32)));
  const bool nonempty = out.n_prime > 0;
  const double lo_deg = (1 - out.eps_prime) * out.D_prime;
  const double hi_deg = (1 + out.eps_prime) * out.D_prime;
  r.add(band_check("b_min_degree", CheckKind::Conclusion,
                   nonempty ? static_cast<double>(out.survivor.min_degree()) : 0.0, lo_deg,
                   std::numeric_limits<double>::infinity(), nonempty));
  r.add(band_check("b_max_degree", CheckKind::Conclusion,
                   nonempty ? static_cast<double>(out.survivor.max_degree()) : 0.0,
                   -std::numeric_limits<double>::infinity(), hi_deg, nonempty));
  for (std::size_t j : out.jstar) {
    const double Dj = out.codegree_bounds.at(j - 2);
    r.add(band_check("c_codegree_" + std::to_string(j), CheckKind::Conclusion,
                     static_cast<double>(out.survivor_codegrees.at(j - 2)),
                     -std::numeric_limits<double>::infinity(),
                     Dj * (1 - (k - static_cast<double>(j) + 1) * th + th32)));
  }
  r.add(band_check("d_waste", CheckKind::Conclusion, static_cast<double>(out.W.size()),
                   -std::numeric_limits<double>::infinity(), 10 * out.eps * th * n));
  for (std::size_t i = 0; i < out.tau_totals.size(); ++i) {
    const auto& t = out.tau_totals[i];
    r.add(band_check("e_tau_" + t.name + "_survivor", CheckKind::Conclusion, t.survivor,
                     t.before * (1 - th - th32), t.before * (1 - th + th32)));
    r.add(band_check("e_tau_" + t.name + "_waste", CheckKind::Conclusion, t.waste,
                     -std::numeric_limits<double>::infinity(), 10 * out.eps * th * t.before));
  }

  // Hypotheses, recorded but never gating a nibble.
  const double D2 = out.codegree_bounds.empty() ? 0.0 : out.codegree_bounds[0];
  r.add(band_check("N1", CheckKind::Hypothesis,
                   D2 > 0 ? out.eps * out.eps * th * out.D / D2
                          : std::numeric_limits<double>::infinity(),
                   log5, std::numeric_limits<double>::infinity()));
  for (std::size_t j : out.jstar) {
    const double Dj = out.codegree_bounds.at(j - 2);
    const double Dj1 = out.codegree_bounds.at(j - 1);
    r.add(band_check("N2_" + std::to_string(j), CheckKind::Hypothesis,
                     Dj1 > 0 ? th * th * Dj / Dj1 : std::numeric_limits<double>::infinity(),
                     log5, std::numeric_limits<double>::infinity()));
  }
  r.add(band_check("N3", CheckKind::Hypothesis, out.eps,
                   -std::numeric_limits<double>::infinity(), th));
  if (weights != nullptr) {
    const double cap_log = std::log(std::max(out.D, 1.0)) * powlog(out.D, 1.25);
    const double cap = std::exp(cap_log);
    const double inv = static_cast<double>(weights->max_involvement(out.n));
    for (std::size_t i = 0; i < out.tau_totals.size(); ++i) {
      const auto& t = out.tau_totals[i];
      r.add(band_check("NP1_" + t.name, CheckKind::Hypothesis, out.eps * th * t.before,
                       t.max * log5, std::numeric_limits<double>::infinity()));
      r.add(band_check("NP2_" + t.name, CheckKind::Hypothesis, static_cast<double>(t.support),
                       -std::numeric_limits<double>::infinity(), cap));
    }
    r.add(band_check("NP3", CheckKind::Hypothesis, inv, -std::numeric_limits<double>::infinity(),
                     cap));
  }

  // Analytic consequences that hold in the small-theta, small-eps regime.
  const bool regime = th <= 1.0 / (10.0 * (k + 1.0)) && out.eps <= th;
  const double th74 = std::pow(th, 1.75);
  r.add(band_check("p_star_band", CheckKind::Analytic, out.p_star, th - th74, th + th74, regime));
  r.add(band_check("w_bound", CheckKind::Analytic, out.max_w,
                   -std::numeric_limits<double>::infinity(), 8 * out.eps * th, regime));
  r.add(band_check("D_prime_band", CheckKind::Analytic, out.D_prime,
                   out.D * (1 - k * th - th32), out.D * (1 - k * th + th32), regime));
  (void)params;
  return r;
}

NibbleOutcome run_planned_nibble(const Hypergraph& h, const NibblePlan& plan,
                                 const NibbleParams& params, const RegularityProfile& profile,
                                 const WeightFamily* weights, std::uint64_t seed) {
  Rng rng(seed);
  NibbleDraw d = draw_nibble(h, plan, rng);
  assert_isolation(h, d);

  NibbleOutcome out;
  out.seed = seed;
  out.theta = plan.theta;
  out.p = plan.p;
  out.p_star = plan.probs.p_star;
  out.max_w = plan.max_w;
  out.k = plan.k;
  out.n = h.num_vertices();
  out.D = profile.D;
  out.eps = profile.eps;
  out.eps_prime = profile.eps * (1 + plan.theta);
  out.D_prime = profile.D * std::pow(1 - out.p_star, static_cast<double>(plan.k));
  out.codegree_bounds = params.codegree_bounds;
  out.jstar = params.jstar;

  std::vector<char> removed(h.num_vertices(), 0), matched(h.num_vertices(), 0),
      wasted(h.num_vertices(), 0);
  for (EdgeId e : d.M)
    for (Vertex v : h.edge(e)) {
      removed[v] = 1;
      matched[v] = 1;
      ++out.matched_vertices;
    }
  for (Vertex v : d.W) {
    removed[v] = 1;
    wasted[v] = 1;
  }
  for (Vertex v = 0; v < h.num_vertices(); ++v)
    if (!removed[v]) out.kept.push_back(v);
  out.survivor = induce(h, out.kept);
  out.n_prime = out.kept.size();

  out.survivor_codegrees.assign(plan.k, 0);
  if (!out.jstar.empty()) {
    std::vector<std::size_t> sizes;
    for (std::size_t j = 2; j <= plan.k; ++j) sizes.push_back(j);
    std::shared_ptr<CodegreeTable> table;
    if (CodegreeTable::required_entries(out.survivor, sizes) <= params.entry_cap)
      table = std::make_shared<CodegreeTable>(out.survivor, sizes, params.entry_cap);
    else
      table = std::make_shared<CodegreeTable>(out.survivor, out.jstar, params.entry_cap);
    for (std::size_t j : out.jstar) out.survivor_codegrees[j - 2] = table->max_count(j);
    if (std::all_of(sizes.begin(), sizes.end(), [&](std::size_t j) { return table->has_size(j); }))
      out.survivor_table = table;
  }

  if (weights != nullptr) {
    std::vector<char> keep(h.num_vertices(), 0);
    for (Vertex v : out.kept) keep[v] = 1;
    for (const auto& tau : *weights) {
      TauTotals t;
      t.name = tau.name;
      t.before = tau.total;
      t.max = tau.max;
      t.support = tau.support_size();
      t.survivor = tau.total_on(keep);
      t.waste = tau.total_on(wasted);
      t.matched = tau.total_on(matched);
      out.tau_totals.push_back(std::move(t));
    }
  }

  out.X = std::move(d.X);
  out.M.edge_ids = std::move(d.M);
  out.W = std::move(d.W);
  out.report = evaluate_conclusions(out, params, weights);
  return out;
}

namespace {
// Strict mode gates on hypotheses as well as conclusions.
std::size_t gating_failures(const ConclusionReport& r, Mode mode) {
  return r.failed() + (mode == Mode::Strict ? r.failed(CheckKind::Hypothesis) : 0);
}
}  // namespace

NibbleOutcome sample_nibble(const Hypergraph& h, const NibbleParams& params,
                            const RegularityProfile& profile, const WeightFamily* weights) {
  NibbleParams resolved = params;
  NibblePlan plan = plan_nibble(h, params.theta, params.entry_cap);
  resolved.codegree_bounds = resolve_bounds(h, params);
  return run_planned_nibble(h, plan, resolved, profile, weights, params.seed);
}

ConclusionReport check_nibble_hypotheses(const Hypergraph& h, const NibbleParams& params,
                                         const RegularityProfile& profile,
                                         const WeightFamily* weights) {
  NibbleOutcome stub;
  stub.theta = params.theta;
  stub.k = h.uniformity_bound() - 1;
  stub.n = h.num_vertices();
  stub.D = profile.D;
  stub.eps = profile.eps;
  stub.codegree_bounds = resolve_bounds(h, params);
  stub.jstar = params.jstar;
  stub.survivor_codegrees.assign(stub.codegree_bounds.size(), 0);
  if (weights != nullptr)
    for (const auto& tau : *weights) {
      TauTotals t;
      t.name = tau.name;
      t.before = tau.total;
      t.max = tau.max;
      t.support = tau.support_size();
      stub.tau_totals.push_back(std::move(t));
    }
  ConclusionReport all = evaluate_conclusions(stub, params, weights);
  ConclusionReport out;
  for (auto& c : all.checks)
    if (c.kind == CheckKind::Hypothesis) out.add(std::move(c));
  return out;
}

NibbleOutcome nibble_with_retry(const Hypergraph& h, const NibbleParams& params,
                                const RegularityProfile& profile, const WeightFamily* weights,
                                const ExtraChecks& extra, const NibblePlan* plan) {
  NibblePlan own;
  if (plan == nullptr) {
    own = plan_nibble(h, params.theta, params.entry_cap);
    plan = &own;
  }
  NibbleParams resolved = params;
  resolved.codegree_bounds = resolve_bounds(h, params);

  const std::size_t attempts = std::max<std::size_t>(params.max_retries, 1);
  NibbleOutcome best;
  bool have_best = false;
  for (std::size_t a = 0; a < attempts; ++a) {
    const std::uint64_t seed = a == 0 ? params.seed : derive_seed(params.seed, a);
    NibbleOutcome out = run_planned_nibble(h, *plan, resolved, profile, weights, seed);
    out.attempt = a;
    if (extra) extra(out, out.report);
    const std::size_t failed = gating_failures(out.report, params.mode);
    if (params.mode == Mode::Strict && failed == 0) return out;
    const bool better =
        !have_best || failed < gating_failures(best.report, params.mode) ||
        (failed == gating_failures(best.report, params.mode) &&
         out.report.max_violation() < best.report.max_violation());
    if (better) {
      best = std::move(out);
      have_best = true;
    }
  }
  if (params.mode == Mode::Strict) throw RetryExhausted(attempts, best.report);
  return best;
}

nlohmann::json to_json(const NibbleOutcome& out) {
  nlohmann::json taus = nlohmann::json::array();
  for (const auto& t : out.tau_totals)
    taus.push_back({{"name", t.name},
                    {"before", t.before},
                    {"survivor", t.survivor},
                    {"waste", t.waste},
                    {"matched", t.matched},
                    {"max", t.max},
                    {"support", t.support}});
  nlohmann::json bounds = nlohmann::json::array();
  for (double b : out.codegree_bounds) bounds.push_back(json_number(b));
  return {{"seed", out.seed},
          {"attempt", out.attempt},
          {"theta", out.theta},
          {"p", out.p},
          {"p_star", out.p_star},
          {"max_w", out.max_w},
          {"k", out.k},
          {"n", out.n},
          {"n_prime", out.n_prime},
          {"selected_edges", out.X.size()},
          {"matching_size", out.M.edge_ids.size()},
          {"matched_vertices", out.matched_vertices},
          {"waste_size", out.W.size()},
          {"D", out.D},
          {"D_prime", out.D_prime},
          {"eps", out.eps},
          {"eps_prime", out.eps_prime},
          {"jstar", out.jstar},
          {"codegree_bounds", bounds},
          {"survivor_codegrees", out.survivor_codegrees},
          {"tau_totals", taus},
          {"matching", out.M.edge_ids},
          {"report", to_json(out.report)}};
}

}  // namespace nforge
