// nibble-forge: generate instances, run nibble/chomp/MCWA, replay schedules,
// verify artefacts.
//
// Exit codes: 0 success, 1 usage or general error, 2 strict-mode hypothesis
// failure, 3 retry exhaustion.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nibble_forge/chomp.hpp"
#include "nibble_forge/errors.hpp"
#include "nibble_forge/hypergraph.hpp"
#include "nibble_forge/instances.hpp"
#include "nibble_forge/ledger.hpp"
#include "nibble_forge/mcwa.hpp"
#include "nibble_forge/nibble.hpp"
#include "nibble_forge/weights.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nforge;

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
bool is_set(double x) { return !std::isnan(x); }

constexpr int kExitError = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitRetry = 3;

void write_json(const fs::path& p, const json& j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << j.dump(2) << '\n';
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  return json::parse(f);
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    if constexpr (std::is_floating_point_v<T>)
      out.push_back(static_cast<T>(std::stod(item, &pos)));
    else
      out.push_back(static_cast<T>(std::stoull(item, &pos)));
    if (pos != item.size()) throw std::invalid_argument("bad list entry '" + item + "'");
  }
  return out;
}

fs::path roles_path(const fs::path& instance) { return fs::path(instance.string() + ".roles.json"); }

json profile_json(const Hypergraph& h, std::size_t jcap, std::size_t cap) {
  json j = {{"n", h.num_vertices()},
            {"m", h.num_edges()},
            {"uniformity", h.uniformity_bound()},
            {"min_degree", h.min_degree()},
            {"max_degree", h.max_degree()}};
  if (h.num_edges() > 0 && h.min_degree() > 0) {
    const RegularityProfile p = fit_regularity(h);
    j["D"] = p.D;
    j["eps"] = p.eps;
  }
  json cj = json::object();
  for (std::size_t s = 2; s <= std::min(h.uniformity_bound(), jcap); ++s) {
    try {
      cj[std::to_string(s)] = max_codegree(h, s, cap);
    } catch (const MemoryGuardError&) {
      cj[std::to_string(s)] = "over cap";
    }
  }
  j["C"] = cj;
  return j;
}

// Bounds from the triangle-instance claim; name -> (value, bound, passed).
std::vector<std::tuple<std::string, double, double, bool>> triangle_claims(const DesignInstance& inst,
                                                                           std::size_t cap) {
  const double n = static_cast<double>(inst.n);
  const Hypergraph& h = inst.hypergraph;
  const double np = static_cast<double>(h.num_vertices());
  const double s = 1.0 / std::sqrt(n);
  std::vector<std::tuple<std::string, double, double, bool>> out;
  out.emplace_back("n_prime_lower", np, (1 - s) * 2 * n, np >= (1 - s) * 2 * n);
  out.emplace_back("n_prime_upper", np, (1 + s) * 2 * n, np <= (1 + s) * 2 * n);
  const double deg_bound = (1 + 10 * s) * n * n;
  out.emplace_back("max_degree", static_cast<double>(h.max_degree()), deg_bound,
                   static_cast<double>(h.max_degree()) <= deg_bound);
  const double bounds[] = {0, 0, 3 * n, 3 * n, 6, 6, 2};
  for (std::size_t j = 2; j <= 6; ++j) {
    const double c = static_cast<double>(max_codegree(h, j, cap));
    out.emplace_back("C" + std::to_string(j), c, bounds[j], c <= bounds[j]);
  }
  return out;
}

struct RunOptions {
  std::string stage;
  std::string instance;
  std::string out = "out";
  std::uint64_t seed = 0;
  std::string mode = "lenient";
  double theta = kUnset;
  double x = kUnset;
  double gamma = 0.2;
  double eps = kUnset;
  std::string jstar;
  bool jstar_given = false;
  std::string weights;
  std::string codegree_bounds;
  std::size_t retries = 1;
  std::size_t trials = 1;
  std::size_t jobs = 1;
  std::size_t cap = 100'000'000;
  std::string mcwa_mode = "empirical";
  std::size_t min_nibbles = 4;
  std::size_t T = 0;
  bool states = false;
};

json params_json(const RunOptions& o) {
  auto num = [](double x) { return is_set(x) ? json(x) : json(nullptr); };
  return {{"stage", o.stage},
          {"instance", o.instance},
          {"seed", o.seed},
          {"mode", o.mode},
          {"theta", num(o.theta)},
          {"x", num(o.x)},
          {"gamma", o.gamma},
          {"eps", num(o.eps)},
          {"jstar", o.jstar},
          {"weights", o.weights},
          {"codegree_bounds", o.codegree_bounds},
          {"retries", o.retries},
          {"codegree_cap", o.cap},
          {"mcwa_mode", o.mcwa_mode},
          {"min_nibbles", o.min_nibbles},
          {"T", o.T}};
}

json matching_json(const Matching& m) { return {{"edge_ids", m.edge_ids}}; }

std::vector<std::size_t> resolve_jstar(const RunOptions& o, std::size_t k) {
  if (o.jstar_given) return parse_list<std::size_t>(o.jstar);
  std::vector<std::size_t> all;
  for (std::size_t j = 2; j <= k; ++j) all.push_back(j);
  return all;
}

// One seeded run of a stage; writes its files under dir and returns the exit code.
int run_once(const RunOptions& o, const Hypergraph& h, const WeightFamily* w, std::uint64_t seed,
             const fs::path& dir, json& summary) {
  json report = {{"build_id", build_id()}, {"params", params_json(o)}};
  report["params"]["seed"] = seed;
  const Mode mode = mode_from_string(o.mode);
  const std::size_t k = h.uniformity_bound() - 1;
  const std::vector<double> bounds = parse_list<double>(o.codegree_bounds);
  try {
    if (o.stage == "nibble") {
      const RegularityProfile prof = fit_regularity(h);
      NibbleParams np;
      np.theta = is_set(o.theta) ? o.theta : chomp_theta(prof.D);
      np.jstar = resolve_jstar(o, k);
      np.codegree_bounds = bounds;
      np.mode = mode;
      np.max_retries = o.retries;
      np.seed = seed;
      np.entry_cap = o.cap;
      RegularityProfile p = prof;
      if (is_set(o.eps)) p.eps = o.eps;
      if (mode == Mode::Strict) {
        const ConclusionReport hyp = check_nibble_hypotheses(h, np, p, w);
        if (const Check* c = hyp.first_failure(CheckKind::Hypothesis))
          throw HypothesisFailure("nibble hypothesis " + c->name + " fails", to_json(hyp));
      }
      NibbleOutcome out = nibble_with_retry(h, np, p, w);
      report["outcome"] = to_json(out);
      Matching root;
      for (EdgeId e : out.M.edge_ids) root.edge_ids.push_back(h.root_edge(e));
      write_json(dir / "matching.json", matching_json(root));
      {
        std::ofstream csv(dir / "trace.csv");
        csv << "check,kind,applicable,passed,value,lower,upper\n";
        for (const auto& c : out.report.checks)
          csv << c.name << ',' << to_string(c.kind) << ',' << c.applicable << ',' << c.passed
              << ',' << c.value << ',' << c.lower << ',' << c.upper << '\n';
      }
      summary = {{"matched_edges", out.M.edge_ids.size()},
                 {"waste", out.W.size()},
                 {"survivors", out.n_prime},
                 {"failed_checks", out.report.failed()}};
    } else if (o.stage == "chomp") {
      const RegularityProfile prof = fit_regularity(h);
      ChompParams cp;
      cp.x = is_set(o.x) ? o.x : 2.0;
      cp.jstar = resolve_jstar(o, k);
      cp.codegree_bounds = bounds;
      cp.mode = mode;
      cp.max_retries_per_nibble = o.retries;
      cp.seed = seed;
      if (is_set(o.theta)) cp.theta_override = o.theta;
      if (o.T > 0) cp.T_override = o.T;
      cp.entry_cap = o.cap;
      RegularityProfile p = prof;
      if (is_set(o.eps)) p.eps = o.eps;
      ChompResult res = run_chomp(h, cp, p, w);
      const auto mv = matched_vertices(h, res.matching);
      report["result"] = {{"matched_edges", res.matching.edge_ids.size()},
                          {"matched_vertices", mv.size()},
                          {"waste", res.waste.size()},
                          {"parked", res.parked.size()},
                          {"survivor", res.survivor.num_vertices()},
                          {"leftover", res.leftover()},
                          {"leftover_fraction", static_cast<double>(res.leftover()) /
                                                    static_cast<double>(h.num_vertices())}};
      report["trace"] = to_json(res.trace);
      std::ofstream csv(dir / "trace.csv");
      write_trace_csv(res.trace, csv);
      write_json(dir / "matching.json", matching_json(res.matching));
      summary = report["result"];
    } else if (o.stage == "mcwa") {
      McwaOptions mo;
      mo.gamma = o.gamma;
      mo.codegree_bounds = bounds;
      if (is_set(o.eps)) mo.eps = o.eps;
      mo.mode = mcwa_mode_from_string(o.mcwa_mode);
      mo.check_mode = mode;
      mo.max_retries_per_nibble = o.retries;
      mo.seed = seed;
      mo.min_nibbles = o.min_nibbles;
      mo.entry_cap = o.cap;
      McwaResult res = run_mcwa(h, mo, w);
      report["report"] = to_json(res.report, o.states);
      write_json(dir / "matching.json", matching_json(res.matching));
      {
        std::ofstream csv(dir / "trace.csv");
        csv << "t_begin,t_end,logx,theta,T,n_before,n_after,matched_edges,waste,parked,failed_checks\n";
        for (const auto& s : res.report.per_step)
          csv << s.t_begin << ',' << s.t_end << ',' << s.logx << ',' << s.theta << ',' << s.T << ','
              << s.n_before << ',' << s.n_after << ',' << s.matched_edges << ',' << s.waste << ','
              << s.parked << ',' << s.failed_checks << '\n';
      }
      if (o.states) {
        write_json(dir / "schedule_executed.json", to_json(res.report.executed));
        write_json(dir / "schedule_theoretical.json", to_json(res.report.theoretical));
      }
      summary = {{"matched_vertices", res.report.matched_vertices},
                 {"leftover", res.report.leftover},
                 {"t_reached", res.report.t_reached},
                 {"stop_reason", res.report.stop_reason}};
    } else {
      throw std::invalid_argument("unknown stage '" + o.stage + "'");
    }
    write_json(dir / "report.json", report);
    return 0;
  } catch (const HypothesisFailure& e) {
    report["error"] = {{"kind", "hypothesis"}, {"message", e.what()}, {"hypotheses", e.report()}};
    write_json(dir / "report.json", report);
    summary = {{"error", e.what()}, {"exit", kExitHypothesis}};
    std::cerr << "hypothesis failure: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const RetryExhausted& e) {
    report["error"] = {{"kind", "retry_exhausted"},
                       {"message", e.what()},
                       {"best_report", to_json(e.best_report())}};
    write_json(dir / "report.json", report);
    summary = {{"error", e.what()}, {"exit", kExitRetry}};
    std::cerr << "retries exhausted: " << e.what() << '\n';
    return kExitRetry;
  }
}

int cmd_run(const RunOptions& o) {
  const Hypergraph h = load_hypergraph(o.instance);
  WeightFamily w;
  if (!o.weights.empty()) w = load_weights(o.weights);
  const WeightFamily* wp = o.weights.empty() ? nullptr : &w;
  const fs::path out(o.out);
  fs::create_directories(out);
  if (o.trials <= 1) {
    json summary;
    return run_once(o, h, wp, o.seed, out, summary);
  }
  std::vector<int> codes(o.trials, 0);
  std::vector<json> summaries(o.trials);
  std::vector<std::string> errors(o.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < o.trials; i = next++) {
      const std::uint64_t s = o.seed + i;
      const fs::path dir = out / ("seed-" + std::to_string(s));
      try {
        fs::create_directories(dir);
        codes[i] = run_once(o, h, wp, s, dir, summaries[i]);
      } catch (const std::exception& e) {
        codes[i] = kExitError;
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < std::max<std::size_t>(1, std::min(o.jobs, o.trials)); ++j)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  json agg = {{"build_id", build_id()}, {"params", params_json(o)}, {"trials", json::object()}};
  int code = 0;
  for (std::size_t i = 0; i < o.trials; ++i) {
    json entry = summaries[i].is_null() ? json::object() : summaries[i];
    entry["exit"] = codes[i];
    if (!errors[i].empty()) entry["error"] = errors[i];
    agg["trials"][std::to_string(o.seed + i)] = entry;
    code = std::max(code, codes[i]);
  }
  write_json(out / "summary.json", agg);
  return code;
}

struct GenOptions {
  std::string kind;
  std::size_t n = 0, u = 3, t = 2, r = 3, jcap = 6, cap = 100'000'000;
  std::string out;
  std::string coloring;
};

int cmd_gen(const GenOptions& o) {
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  json summary = {{"kind", o.kind}, {"build_id", build_id()}};
  if (o.kind == "cyclic-coloring") {
    const ColoredDigraph g = gen_cyclic_coloring(o.n);
    write_json(out, {{"n", g.n}, {"colors", g.colors}});
    summary["proper"] = validate_proper(g).proper;
    std::cout << summary.dump(2) << '\n';
    return 0;
  }
  Hypergraph h;
  std::optional<DesignInstance> inst;
  if (o.kind == "complete") {
    h = gen_complete_uniform(o.n, o.u, o.cap);
  } else if (o.kind == "sts") {
    h = gen_steiner_triple_system(o.n);
  } else if (o.kind == "design") {
    inst = gen_design_hypergraph(o.n, o.t, o.r, o.cap);
  } else if (o.kind == "triangle-aux") {
    ColoredDigraph g;
    if (!o.coloring.empty()) {
      const json c = read_json(o.coloring);
      g.n = c.at("n").get<std::size_t>();
      g.colors = c.at("colors").get<std::vector<std::uint32_t>>();
    } else {
      g = gen_cyclic_coloring(o.n);
    }
    inst = gen_triangle_aux(g);
  } else {
    throw std::invalid_argument("unknown kind '" + o.kind + "'");
  }
  if (inst) {
    h = inst->hypergraph;
    write_json(roles_path(out), role_map_json(*inst));
  }
  save_hypergraph(h, o.out);
  summary["profile"] = profile_json(h, o.jcap, o.cap);
  if (inst && inst->kind == "triangle-aux") {
    summary["bad_triangle_colors"] = inst->bad_triangle_colors;
    summary["bad_loop_colors"] = inst->bad_loop_colors;
    json claims = json::object();
    for (const auto& [name, value, bound, ok] : triangle_claims(*inst, o.cap))
      claims[name] = {{"value", value}, {"bound", bound}, {"passed", ok}};
    summary["claims"] = claims;
  }
  std::cout << summary.dump(2) << '\n';
  return 0;
}

struct ScheduleOptions {
  std::size_t k = 2;
  double logD = kUnset;
  std::string logDj;
  double log_eps = kUnset;
  double logB = kUnset;
  double gamma = 0.2;
  std::string instance;
  std::string out = "schedule.json";
  bool assert_obs = false;
  bool lenient_ct1 = false;
  std::size_t cap = 100'000'000;
};

int cmd_schedule(const ScheduleOptions& o) {
  std::size_t k = o.k;
  double logD = o.logD;
  std::vector<double> logDj = parse_list<double>(o.logDj);
  double log_eps = o.log_eps;
  if (!o.instance.empty()) {
    const Hypergraph h = load_hypergraph(o.instance);
    const RegularityProfile p = fit_regularity(h);
    k = h.uniformity_bound() - 1;
    if (!is_set(logD)) logD = std::log(p.D);
    if (!is_set(log_eps)) log_eps = std::log(p.eps);
    if (logDj.empty()) {
      auto c = measure_codegrees(h, o.cap);
      if (!c) throw std::invalid_argument("codegree tables exceed the cap; pass --logDj");
      for (auto v : *c) logDj.push_back(std::log(static_cast<double>(std::max<std::uint64_t>(v, 1))));
    }
  }
  if (!is_set(logD) || logDj.size() != k)
    throw std::invalid_argument("need --logD and k values in --logDj (or --instance)");
  const double logB = is_set(o.logB) ? o.logB : compute_log_B(logD, logDj, is_set(log_eps) ? log_eps : 0.0);
  CodegreeLedger ledger(k, logD, logDj, logB, o.gamma);
  const ScheduleTrajectory tr = run_schedule(ledger, o.assert_obs, !o.lenient_ct1);
  write_json(o.out, to_json(tr));
  std::cout << json{{"k", k},
                    {"logB", log_to_string(logB)},
                    {"t_star", ledger.t_star()},
                    {"t_end", tr.t_end},
                    {"termination", tr.termination},
                    {"ct1_failures", tr.ct1_failures},
                    {"violations", tr.violations.size()}}
                   .dump(2)
            << '\n';
  return 0;
}

struct VerifyOptions {
  std::string instance;
  std::string matching;
  std::string roles;
  std::string trajectory;
  std::size_t cap = 100'000'000;
};

int cmd_verify(const VerifyOptions& o) {
  int failures = 0;
  auto line = [&](const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : ": " + detail) << '\n';
    if (!ok) ++failures;
  };
  if (!o.trajectory.empty()) {
    const ScheduleTrajectory tr = trajectory_from_json(read_json(o.trajectory));
    const auto viol = check_observations(tr, 1);
    if (viol.empty()) {
      line("observations", true);
    } else {
      const auto& v = viol.front();
      line("observations", false,
           v.observation + " violated at t=" + std::to_string(v.t) + " j=" + std::to_string(v.j) +
               " margin=" + log_to_string(v.margin));
    }
    const auto mm = compare_replay(tr);
    if (!mm) {
      line("replay", true);
    } else {
      line("replay", false,
           "t=" + std::to_string(mm->t) + " j=" + std::to_string(mm->j) + " recorded " +
               log_to_string(mm->recorded) + " recomputed " + log_to_string(mm->recomputed));
    }
  }
  if (!o.instance.empty()) {
    const Hypergraph h = load_hypergraph(o.instance);
    std::uint64_t deg_sum = 0, size_sum = 0;
    for (Vertex v = 0; v < h.num_vertices(); ++v) deg_sum += h.degree(v);
    for (EdgeId e = 0; e < h.num_edges(); ++e) size_sum += h.edge_size(e);
    line("degree_sum", deg_sum == size_sum,
         std::to_string(deg_sum) + " vs " + std::to_string(size_sum));
    if (h.num_edges() > 0 && h.min_degree() > 0)
      line("profile", profile_valid(h, fit_regularity(h)));
    std::optional<DesignInstance> inst;
    const fs::path rp = o.roles.empty() ? roles_path(o.instance) : fs::path(o.roles);
    if (fs::exists(rp)) inst = instance_from_role_map(read_json(rp), h);
    if (inst && inst->kind == "design") {
      const std::uint64_t d = binomial(inst->n - inst->t, inst->r - inst->t);
      line("design_regular", h.min_degree() == d && h.max_degree() == d,
           "degrees in [" + std::to_string(h.min_degree()) + ", " + std::to_string(h.max_degree()) +
               "], expected " + std::to_string(d));
    }
    if (inst && inst->kind == "triangle-aux")
      for (const auto& [name, value, bound, ok] : triangle_claims(*inst, o.cap)) {
        std::ostringstream s;
        s << value << " vs bound " << bound;
        line("triangle_" + name, ok, s.str());
      }
    if (!o.matching.empty()) {
      Matching m;
      m.edge_ids = read_json(o.matching).at("edge_ids").get<std::vector<EdgeId>>();
      const MatchingCheck mc = verify_matching(h, m);
      line("matching", mc.valid,
           mc.valid ? std::to_string(m.edge_ids.size()) + " edges, " + std::to_string(mc.uncovered) +
                          " uncovered"
                    : "edges " + std::to_string(mc.first) + " and " + std::to_string(mc.second) +
                          " intersect");
      if (inst && inst->kind == "triangle-aux") {
        const TriangleFactor f = extract_triangle_factor(*inst, m);
        line("triangle_factor", f.valid,
             f.valid ? std::to_string(f.triangles.size()) + " triangles" : f.problem);
      }
      if (inst && inst->kind == "design") {
        const PartialSteiner p = extract_partial_steiner(*inst, m);
        line("partial_steiner", p.valid,
             p.valid ? std::to_string(p.blocks.size()) + " blocks" : p.problem);
      }
    }
  }
  if (o.instance.empty() && o.trajectory.empty())
    throw std::invalid_argument("verify needs --instance or --trajectory");
  return failures == 0 ? 0 : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nibble-forge: semi-random hypergraph matching toolkit"};
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.require_subcommand(1);

  GenOptions g;
  auto* gen = app.add_subcommand("gen", "generate an instance");
  gen->add_option("--kind", g.kind, "complete | design | sts | triangle-aux | cyclic-coloring")
      ->required()
      ->check(CLI::IsMember({"complete", "design", "sts", "triangle-aux", "cyclic-coloring"}));
  gen->add_option("--n", g.n, "ground set size")->required();
  gen->add_option("--u", g.u, "edge size for complete");
  gen->add_option("--t", g.t, "t for design");
  gen->add_option("--r", g.r, "r for design");
  gen->add_option("--coloring", g.coloring, "colouring JSON for triangle-aux");
  gen->add_option("--out", g.out, "output path")->required();
  gen->add_option("--jcap", g.jcap, "largest j for printed C_j");
  gen->add_option("--codegree-cap", g.cap, "entry cap for codegree tables");

  RunOptions r;
  auto* run = app.add_subcommand("run", "run nibble, chomp or mcwa");
  run->add_option("stage", r.stage, "nibble | chomp | mcwa")
      ->required()
      ->check(CLI::IsMember({"nibble", "chomp", "mcwa"}));
  run->add_option("--instance", r.instance, "hypergraph file")->required();
  run->add_option("--out", r.out, "output directory");
  run->add_option("--seed", r.seed, "base seed")->envname("NIBBLE_FORGE_SEED");
  run->add_option("--mode", r.mode, "strict | lenient")->check(CLI::IsMember({"strict", "lenient"}));
  run->add_option("--theta", r.theta, "nibble size (default 1/log^2 D)");
  run->add_option("--x", r.x, "chomp shrink factor");
  run->add_option("--gamma", r.gamma, "MCWA gamma");
  run->add_option("--eps", r.eps, "regularity eps (default fitted)");
  auto* js = run->add_option("--jstar", r.jstar, "comma list of tracked codegree indices");
  run->add_option("--weights", r.weights, "weight family JSON");
  run->add_option("--codegree-bounds", r.codegree_bounds, "comma list D_2..D_{k+1}");
  run->add_option("--retries", r.retries, "attempts per nibble");
  run->add_option("--trials", r.trials, "independent seeded runs");
  run->add_option("--jobs", r.jobs, "worker threads for --trials");
  run->add_option("--codegree-cap", r.cap, "entry cap for codegree tables");
  run->add_option("--mcwa-mode", r.mcwa_mode, "theoretical | empirical")
      ->check(CLI::IsMember({"theoretical", "empirical"}));
  run->add_option("--min-nibbles", r.min_nibbles, "MCWA nibbles per chomp");
  run->add_option("--T", r.T, "chomp length override");
  run->add_flag("--states", r.states, "include full schedule states in MCWA output");

  ScheduleOptions s;
  auto* sched = app.add_subcommand("schedule", "run the codegree schedule in log space");
  sched->add_option("--k", s.k, "k (edges have at most k+1 vertices)");
  sched->add_option("--logD", s.logD, "log D");
  sched->add_option("--logDj", s.logDj, "comma list log D_2..log D_{k+1}");
  sched->add_option("--log-eps", s.log_eps, "log eps");
  sched->add_option("--logB", s.logB, "log B (default from the other inputs)");
  sched->add_option("--gamma", s.gamma, "gamma");
  sched->add_option("--instance", s.instance, "derive inputs from a hypergraph");
  sched->add_option("--out", s.out, "trajectory JSON");
  sched->add_flag("--assert-observations", s.assert_obs, "fail on the first observation violation");
  sched->add_flag("--lenient-ct1", s.lenient_ct1, "continue past (Ct1) failures");
  sched->add_option("--codegree-cap", s.cap, "entry cap for codegree tables");

  VerifyOptions v;
  auto* ver = app.add_subcommand("verify", "check invariants of saved artefacts");
  ver->add_option("--instance", v.instance, "hypergraph file");
  ver->add_option("--matching", v.matching, "matching JSON");
  ver->add_option("--roles", v.roles, "role map (default <instance>.roles.json)");
  ver->add_option("--trajectory", v.trajectory, "schedule trajectory JSON");
  ver->add_option("--codegree-cap", v.cap, "entry cap for codegree tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }
  r.jstar_given = js->count() > 0 || !r.jstar.empty();

  try {
    if (gen->parsed()) return cmd_gen(g);
    if (run->parsed()) return cmd_run(r);
    if (sched->parsed()) return cmd_schedule(s);
    if (ver->parsed()) return cmd_verify(v);
  } catch (const ObservationViolation& e) {
    std::cerr << "observation violation: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
