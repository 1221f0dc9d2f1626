#include "nibble_forge/chomp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace nforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Log-domain check with a small relative margin so that exact ties pass.
Check log_check(std::string name, double value, double lower, double upper,
                bool applicable = true) {
  auto widen = [](double b, double sign) {
    if (!std::isfinite(b)) return b;
    return b + sign * 1e-12 * std::max(1.0, std::abs(b));
  };
  Check c = band_check(std::move(name), CheckKind::Hypothesis, value, widen(lower, -1.0),
                       widen(upper, 1.0), applicable);
  c.lower = lower;
  c.upper = upper;
  return c;
}

bool contains(const std::vector<std::size_t>& s, std::size_t j) {
  return std::find(s.begin(), s.end(), j) != s.end();
}

double safe_log(double x) { return x > 0 ? std::log(x) : -kInf; }

}  // namespace

double chomp_theta(double D) {
  const double L = std::log(D);
  return 1.0 / (L * L);
}

std::size_t chomp_length(double D, double x) {
  const double L = std::log(D);
  const double t = std::floor(L * L * std::log(x));
  return t > 0 ? static_cast<std::size_t>(t) : 0;
}

ConclusionReport check_chomp_hypotheses(const RegularityProfile& profile, std::size_t k,
                                        const ChompParams& params,
                                        const std::vector<double>& Dj,
                                        const WeightFamily* weights) {
  if (Dj.size() != k) throw std::invalid_argument("need D_j for j = 2..k+1");
  ConclusionReport r;
  const double logD = std::log(profile.D);
  const double ll = safe_log(logD);  // log log D
  const double le = std::log(profile.eps);
  const double lx = std::log(params.x);
  auto lD = [&](std::size_t j) { return safe_log(Dj.at(j - 2)); };
  const bool has2 = contains(params.jstar, 2);

  r.add(log_check("C1", 2 * le + logD - lD(2), 8 * ll, kInf, has2 || k == 1));
  if (k >= 2)
    r.add(log_check("C2", 2 * le + logD - static_cast<double>(k - 2) * lx - lD(2), 8 * ll, kInf,
                    !has2));
  for (std::size_t j : params.jstar) {
    if (contains(params.jstar, j + 1))
      r.add(log_check("C3_" + std::to_string(j), lD(j) - lx - lD(j + 1), 10 * ll, kInf));
    else
      r.add(log_check("C4_" + std::to_string(j),
                      lD(j) - static_cast<double>(k - j + 1) * lx - lD(j + 1), 9 * ll, kInf));
  }
  r.add(log_check("C5", le, -kInf, -lx - 2 * ll));

  if (weights != nullptr) {
    const double cap = logD * std::pow(std::max(logD, 0.0), 1.2);
    for (const auto& tau : *weights) {
      r.add(log_check("CP1_" + tau.name, le + safe_log(tau.total),
                      safe_log(tau.max) + 3 + 7 * ll, kInf));
      r.add(log_check("CP2_" + tau.name, safe_log(static_cast<double>(tau.support_size())),
                      -kInf, cap));
    }
    r.add(log_check("CP3", safe_log(static_cast<double>(weights->max_involvement(profile.n))),
                    -kInf, cap));
    r.add(log_check("CP4", static_cast<double>(k) * lx, -kInf, (1 - params.delta) * logD));
  }
  return r;
}

ChompResult run_chomp(const Hypergraph& h, const ChompParams& params,
                      const RegularityProfile& profile, const WeightFamily* weights) {
  if (!(params.x > 1.0)) throw std::invalid_argument("x must exceed 1");
  if (h.uniformity_bound() < 2) throw std::invalid_argument("edges must have at least 2 vertices");
  const std::size_t k = h.uniformity_bound() - 1;
  for (std::size_t j : params.jstar)
    if (j < 2 || j > k) throw std::invalid_argument("J* must be a subset of {2..k}");

  ChompResult res;
  ChompTrace& tr = res.trace;
  const double D = profile.D;
  const double eps = profile.eps;
  tr.theta_overridden = params.theta_override.has_value();
  tr.theta = tr.theta_overridden ? *params.theta_override : chomp_theta(D);
  if (!(tr.theta > 0.0 && tr.theta < 1.0))
    throw std::invalid_argument("theta must lie in (0,1); D too small for 1/log^2 D");
  tr.T_overridden = params.T_override.has_value();
  if (tr.T_overridden)
    tr.T = *params.T_override;
  else if (tr.theta_overridden)
    tr.T = static_cast<std::size_t>(std::max(0.0, std::floor(std::log(params.x) / tr.theta)));
  else
    tr.T = chomp_length(D, params.x);
  if (tr.T < 1) throw std::invalid_argument("chomp length T is 0; increase x");

  std::vector<double> Dj = params.codegree_bounds;
  if (Dj.empty()) {
    Dj.resize(k);
    for (std::size_t j = 2; j <= k + 1; ++j)
      Dj[j - 2] = static_cast<double>(max_codegree(h, j, params.entry_cap));
  }
  if (Dj.size() != k) throw std::invalid_argument("need D_j for j = 2..k+1");

  tr.hypotheses = check_chomp_hypotheses(profile, k, params, Dj, weights);
  if (params.mode == Mode::Strict && !tr.hypotheses.all_passed(CheckKind::Hypothesis)) {
    const Check* c = tr.hypotheses.first_failure(CheckKind::Hypothesis);
    throw HypothesisFailure("chomp hypothesis " + c->name + " fails", to_json(tr.hypotheses));
  }

  const double th = tr.theta;
  const double th32 = std::pow(th, 1.5);
  const double kd = static_cast<double>(k);
  const double n0 = static_cast<double>(h.num_vertices());

  std::vector<double> tau0;
  if (weights != nullptr)
    for (const auto& t : *weights) tau0.push_back(t.total);

  const Hypergraph* cur = &h;
  Hypergraph owned;
  WeightFamily w_cur;
  if (weights != nullptr) w_cur = *weights;
  std::shared_ptr<const CodegreeTable> table;
  double D_i = D;

  auto sched_Dj = [&](std::size_t i, std::size_t j) {
    return Dj[j - 2] * std::pow(1 - (kd - static_cast<double>(j) + 1) * th + th32,
                                static_cast<double>(i));
  };
  auto record = [&](std::size_t i, const Hypergraph& g, const WeightFamily& wf,
                    const std::vector<std::uint64_t>& measured) {
    ChompIteration it;
    const double id = static_cast<double>(i);
    it.i = i;
    it.active = g.num_vertices();
    it.n = it.active + res.parked.size();
    it.edges = g.num_edges();
    it.n_lower = n0 * std::pow(1 - th - 2 * th32, id);
    it.n_upper = n0 * std::pow(1 - th + 2 * th32, id);
    it.D = D_i;
    it.D_lower = D * std::pow(1 - kd * th - th32, id);
    it.D_upper = D * std::pow(1 - kd * th + th32, id);
    it.eps = eps * std::pow(1 + th, id);
    it.min_degree = g.min_degree();
    it.max_degree = g.max_degree();
    it.jstar = params.jstar;
    for (std::size_t j : params.jstar) {
      it.Dj.push_back(sched_Dj(i, j));
      it.measured_Cj.push_back(measured.empty() ? 0 : measured[j - 2]);
    }
    for (std::size_t q = 0; q < tau0.size(); ++q) {
      it.tau_total.push_back(wf[q].total + 0.0);
      it.tau_lower.push_back(tau0[q] * std::pow(1 - th - th32, id));
      it.tau_upper.push_back(tau0[q] * std::pow(1 - th + th32, id));
    }
    tr.iterations.push_back(std::move(it));
  };

  std::vector<std::uint64_t> measured(k, 0);
  if (!params.jstar.empty()) {
    std::vector<std::size_t> sizes;
    for (std::size_t j = 2; j <= k; ++j) sizes.push_back(j);
    if (CodegreeTable::required_entries(h, sizes) <= params.entry_cap) {
      auto t = std::make_shared<CodegreeTable>(h, sizes, params.entry_cap);
      for (std::size_t j : params.jstar) measured[j - 2] = t->max_count(j);
      table = t;
    }
  }
  record(0, h, w_cur, measured);

  // Parked vertices keep their weight; it counts towards tau(V(H_i)).
  std::vector<double> parked_tau(tau0.size(), 0.0);

  for (std::size_t i = 0; i < tr.T; ++i) {
    if (params.park_isolated && cur->num_vertices() > 0 && cur->min_degree() == 0) {
      std::vector<Vertex> keep;
      std::vector<char> gone(cur->num_vertices(), 0);
      for (Vertex v = 0; v < cur->num_vertices(); ++v) {
        if (cur->degree(v) > 0) {
          keep.push_back(v);
        } else {
          res.parked.push_back(cur->root_vertex(v));
          gone[v] = 1;
        }
      }
      for (std::size_t q = 0; q < tau0.size(); ++q) parked_tau[q] += w_cur[q].total_on(gone);
      WeightFamily w_next = w_cur.restrict_to(keep, cur->num_vertices());
      Hypergraph next = induce(*cur, keep);
      owned = std::move(next);
      cur = &owned;
      w_cur = std::move(w_next);
      table.reset();
    }
    if (cur->num_vertices() == 0 || cur->num_edges() == 0) {
      tr.stopped_early = true;
      tr.stop_reason = cur->num_vertices() == 0 ? "survivor empty" : "survivor has no edges";
      break;
    }
    if (static_cast<double>(cur->min_degree()) <= th) {
      tr.stopped_early = true;
      tr.stop_reason = "minimum degree at most theta";
      break;
    }

    NibblePlan plan = plan_nibble(*cur, th, params.entry_cap, table.get());
    NibbleParams np;
    np.theta = th;
    np.jstar = params.jstar;
    np.codegree_bounds = Dj;
    for (std::size_t j : params.jstar) np.codegree_bounds[j - 2] = sched_Dj(i, j);
    np.mode = params.mode;
    np.max_retries = params.max_retries_per_nibble;
    np.seed = derive_seed(params.seed, i);
    np.entry_cap = params.entry_cap;
    RegularityProfile prof{cur->num_vertices(), D_i, eps * std::pow(1 + th, static_cast<double>(i))};

    const double next_i = static_cast<double>(i + 1);
    const std::size_t parked_now = res.parked.size();
    ExtraChecks bands = [&](const NibbleOutcome& o, ConclusionReport& rep) {
      rep.add(band_check("chomp_n", CheckKind::Conclusion,
                         static_cast<double>(o.n_prime + parked_now),
                         n0 * std::pow(1 - th - 2 * th32, next_i),
                         n0 * std::pow(1 - th + 2 * th32, next_i)));
      rep.add(band_check("chomp_D", CheckKind::Conclusion, o.D_prime,
                         D * std::pow(1 - kd * th - th32, next_i),
                         D * std::pow(1 - kd * th + th32, next_i)));
      for (std::size_t q = 0; q < o.tau_totals.size(); ++q)
        rep.add(band_check("chomp_tau_" + o.tau_totals[q].name, CheckKind::Conclusion,
                           o.tau_totals[q].survivor + parked_tau[q],
                           tau0[q] * std::pow(1 - th - th32, next_i),
                           tau0[q] * std::pow(1 - th + th32, next_i)));
    };

    NibbleOutcome out =
        nibble_with_retry(*cur, np, prof, weights != nullptr ? &w_cur : nullptr, bands, &plan);

    for (EdgeId e : out.M.edge_ids) res.matching.edge_ids.push_back(cur->root_edge(e));
    for (Vertex v : out.W) res.waste.push_back(cur->root_vertex(v));
    D_i = out.D_prime;
    tr.nibble_reports.push_back(to_json(out));

    WeightFamily w_next;
    if (weights != nullptr) w_next = w_cur.restrict_to(out.kept, cur->num_vertices());
    const std::size_t matched_edges = out.M.edge_ids.size();
    const std::size_t waste = out.W.size();
    const double p_star = out.p_star;
    const std::size_t attempt = out.attempt;
    const std::size_t failed = out.report.failed();
    table = out.survivor_table;
    std::vector<std::uint64_t> next_measured = out.survivor_codegrees;
    owned = std::move(out.survivor);
    cur = &owned;
    w_cur = std::move(w_next);

    record(i + 1, *cur, w_cur, next_measured);
    auto& it = tr.iterations.back();
    it.n = cur->num_vertices() + res.parked.size();
    for (std::size_t q = 0; q < tau0.size(); ++q) it.tau_total[q] += parked_tau[q];
    it.matched_edges = matched_edges;
    it.waste = waste;
    it.p_star = p_star;
    it.attempt = attempt;
    it.failed_checks = failed;
    it.passed = failed == 0;
  }

  tr.parked = res.parked.size();
  std::sort(res.waste.begin(), res.waste.end());
  std::sort(res.parked.begin(), res.parked.end());

  // Lemma-level conclusions against the initial parameters.
  const double e2 = std::exp(2.0), e3 = std::exp(3.0);
  const double x = params.x;
  const double lx = std::log(x);
  const double xk = std::pow(x, kd);
  const double n_final = static_cast<double>(res.leftover());
  ConclusionReport& c = tr.conclusions;
  c.add(band_check("lemma_vertex_count", CheckKind::Conclusion, n_final, n0 / (e3 * x),
                   e3 * n0 / x));
  c.add(band_check("lemma_degree", CheckKind::Conclusion, D_i, D / (e2 * xk), e2 * D / xk));
  c.add(band_check("lemma_waste", CheckKind::Conclusion, static_cast<double>(res.waste.size()),
                   -kInf, 10 * e2 * eps * n0 * lx));
  const bool nonempty = cur->num_vertices() > 0;
  c.add(band_check("lemma_regularity_min", CheckKind::Conclusion,
                   nonempty ? static_cast<double>(cur->min_degree()) : 0.0,
                   (1 - eps * x) * D_i, kInf, nonempty));
  c.add(band_check("lemma_regularity_max", CheckKind::Conclusion,
                   nonempty ? static_cast<double>(cur->max_degree()) : 0.0, -kInf,
                   (1 + eps * x) * D_i, nonempty));
  const auto& last = tr.iterations.back();
  for (std::size_t q = 0; q < params.jstar.size(); ++q) {
    const std::size_t j = params.jstar[q];
    c.add(band_check("lemma_codegree_" + std::to_string(j), CheckKind::Conclusion,
                     static_cast<double>(last.measured_Cj[q]), -kInf,
                     e2 * Dj[j - 2] / std::pow(x, kd - static_cast<double>(j) + 1)));
  }
  if (weights != nullptr) {
    for (std::size_t q = 0; q < tau0.size(); ++q) {
      const std::string& name = (*weights)[q].name;
      const double surv = w_cur[q].total + parked_tau[q];
      c.add(band_check("lemma_tau_" + name, CheckKind::Conclusion, surv, tau0[q] / (e2 * x),
                       e2 * tau0[q] / x));
    }
    // Waste is kept in root ids; weights are indexed by the input's ids.
    std::vector<char> wmask(h.num_vertices(), 0);
    {
      std::vector<std::pair<Vertex, Vertex>> pairs;
      for (Vertex v = 0; v < h.num_vertices(); ++v) pairs.emplace_back(h.root_vertex(v), v);
      std::sort(pairs.begin(), pairs.end());
      for (Vertex r : res.waste) {
        auto it = std::lower_bound(pairs.begin(), pairs.end(), std::make_pair(r, Vertex{0}));
        if (it != pairs.end() && it->first == r) wmask[it->second] = 1;
      }
    }
    for (std::size_t q = 0; q < tau0.size(); ++q) {
      const auto& tau = (*weights)[q];
      c.add(band_check("lemma_tau_waste_" + tau.name, CheckKind::Conclusion,
                       tau.total_on(wmask), -kInf, 10 * e2 * eps * tau0[q] * lx));
    }
  }

  res.survivor = (cur == &h) ? h : std::move(owned);
  return res;
}

void write_trace_csv(const ChompTrace& trace, std::ostream& out) {
  std::size_t ntau = 0;
  std::vector<std::size_t> js;
  if (!trace.iterations.empty()) {
    ntau = trace.iterations.front().tau_total.size();
    js = trace.iterations.front().jstar;
  }
  out << "i,n,active,edges,n_lower,n_upper,D,D_lower,D_upper,eps,min_degree,max_degree,"
         "matched_edges,waste,p_star,attempt,failed_checks,passed";
  for (std::size_t j : js) out << ",C" << j << ",D" << j << "_sched";
  for (std::size_t q = 0; q < ntau; ++q) out << ",tau" << q << ",tau" << q << "_lower,tau" << q << "_upper";
  out << '\n';
  out.precision(17);
  for (const auto& it : trace.iterations) {
    out << it.i << ',' << it.n << ',' << it.active << ',' << it.edges << ',' << it.n_lower << ','
        << it.n_upper << ',' << it.D << ',' << it.D_lower << ',' << it.D_upper << ',' << it.eps
        << ',' << it.min_degree << ',' << it.max_degree << ',' << it.matched_edges << ','
        << it.waste << ',' << it.p_star << ',' << it.attempt << ',' << it.failed_checks << ','
        << (it.passed ? 1 : 0);
    for (std::size_t q = 0; q < js.size(); ++q) out << ',' << it.measured_Cj[q] << ',' << it.Dj[q];
    for (std::size_t q = 0; q < ntau; ++q)
      out << ',' << it.tau_total[q] << ',' << it.tau_lower[q] << ',' << it.tau_upper[q];
    out << '\n';
  }
}

nlohmann::json to_json(const ChompTrace& trace) {
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : trace.iterations) {
    iters.push_back({{"i", it.i},
                     {"n", it.n},
                     {"active", it.active},
                     {"edges", it.edges},
                     {"n_lower", it.n_lower},
                     {"n_upper", it.n_upper},
                     {"D", it.D},
                     {"D_lower", it.D_lower},
                     {"D_upper", it.D_upper},
                     {"eps", it.eps},
                     {"min_degree", it.min_degree},
                     {"max_degree", it.max_degree},
                     {"jstar", it.jstar},
                     {"Dj", it.Dj},
                     {"measured_Cj", it.measured_Cj},
                     {"tau_total", it.tau_total},
                     {"tau_lower", it.tau_lower},
                     {"tau_upper", it.tau_upper},
                     {"matched_edges", it.matched_edges},
                     {"waste", it.waste},
                     {"p_star", it.p_star},
                     {"attempt", it.attempt},
                     {"failed_checks", it.failed_checks},
                     {"passed", it.passed}});
  }
  return {{"theta", trace.theta},
          {"T", trace.T},
          {"theta_overridden", trace.theta_overridden},
          {"T_overridden", trace.T_overridden},
          {"stopped_early", trace.stopped_early},
          {"stop_reason", trace.stop_reason},
          {"parked", trace.parked},
          {"hypotheses", to_json(trace.hypotheses)},
          {"conclusions", to_json(trace.conclusions)},
          {"iterations", iters},
          {"nibbles", trace.nibble_reports}};
}

}  // namespace nforge
