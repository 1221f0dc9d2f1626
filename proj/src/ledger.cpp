#include "nibble_forge/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "nibble_forge/errors.hpp"

namespace nforge {

namespace {

constexpr double kTieTol = 1e-12;
constexpr double kObsTol = 1e-9;

// a < b with ties (within kTieTol relative) counted as not less.
bool strictly_below(double a, double b) {
  return a < b - kTieTol * std::max(1.0, std::abs(b));
}

bool has(IndexMask m, std::size_t j) { return (m >> j) & 1u; }

IndexClassification classify_values(std::size_t k, const std::vector<double>& logDj,
                                    double logB, double gamma) {
  IndexClassification c;
  c.k = k;
  const double g3 = gamma * gamma * gamma;
  const double super_thr = 2.0 * static_cast<double>(k) * g3 * gamma * logB;
  const double semi_thr = g3 * logB;
  for (std::size_t j = 2; j <= k; ++j) {
    const double gap = logDj[j - 2] - logDj[j - 1];
    if (strictly_below(gap, super_thr)) c.super_stuck |= IndexMask{1} << j;
    if (strictly_below(gap, semi_thr)) c.semi_stuck |= IndexMask{1} << j;
  }
  return c;
}

std::vector<std::size_t> mask_to_set(IndexMask m, std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t j = lo; j <= hi; ++j)
    if (has(m, j)) out.push_back(j);
  return out;
}

void check_nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) throw std::logic_error("codegree logs stopped being nonincreasing");
}

}  // namespace

struct LedgerAccess {
  static void restore(CodegreeLedger& l, std::vector<double> cur, double log_eps, std::size_t t,
                      bool terminated) {
    l.logDj_ = std::move(cur);
    l.log_eps_ = log_eps;
    l.t_ = t;
    l.terminated_ = terminated;
    l.cache_.reset();
  }
  static void step(CodegreeLedger& l, IndexMask jstar) {
    const double lx = l.logx();
    const double kd = static_cast<double>(l.k_);
    for (std::size_t j = 2; j <= l.k_; ++j)
      if (has(jstar, j)) l.logDj_[j - 2] += 2.0 - (kd - static_cast<double>(j) + 1.0) * lx;
    l.log_eps_ += lx;
    ++l.t_;
    l.cache_.reset();
  }
  static void terminate(CodegreeLedger& l) { l.terminated_ = true; }
  static bool clamp(CodegreeLedger& l) {
    bool changed = false;
    for (std::size_t i = 1; i < l.logDj_.size(); ++i)
      if (l.logDj_[i] > l.logDj_[i - 1]) {
        l.logDj_[i] = l.logDj_[i - 1];
        changed = true;
      }
    if (changed) l.cache_.reset();
    return changed;
  }
};

std::vector<std::size_t> IndexClassification::super_stuck_set() const {
  return mask_to_set(super_stuck, 2, k);
}
std::vector<std::size_t> IndexClassification::semi_stuck_set() const {
  return mask_to_set(semi_stuck, 2, k);
}

std::vector<std::vector<std::size_t>> IndexClassification::clusters() const {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  for (std::size_t j = 2; j <= k + 1; ++j) {
    cur.push_back(j);
    if (j == k + 1 || !has(semi_stuck, j)) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  return out;
}

std::vector<std::size_t> IndexClassification::slowpokes() const {
  return mask_to_set(slowpoke_mask(), 2, k + 1);
}

IndexMask IndexClassification::slowpoke_mask() const {
  IndexMask m = IndexMask{1} << (k + 1);
  for (std::size_t j = 2; j <= k; ++j)
    if (!has(semi_stuck, j)) m |= IndexMask{1} << j;
  return m;
}

std::size_t IndexClassification::slowpoke_of(std::size_t j) const {
  while (j <= k && has(semi_stuck, j)) ++j;
  return j;
}

std::vector<std::size_t> IndexClassification::dormant_cluster() const {
  auto cl = clusters();
  return cl.back();
}

double compute_log_B(double logD, const std::vector<double>& logDj, double log_eps) {
  if (logDj.empty()) throw std::invalid_argument("need log D_j for j = 2..k+1");
  check_nonincreasing(logDj);
  double b = (logD - logDj[0]) / 2.0;
  const std::size_t k = logDj.size();
  for (std::size_t j = 4; j <= k + 1; ++j)
    b = std::min(b, (logD - logDj[j - 2]) / static_cast<double>(j - 1));
  b = std::min(b, -log_eps);
  return std::max(b, 0.0);
}

std::size_t schedule_length(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
  const double g = 1.0 / gamma;
  const double g2 = g * g;
  const double v = g2 * g2 - g2;
  return static_cast<std::size_t>(std::floor(v * (1.0 + kTieTol)));
}

CodegreeLedger::CodegreeLedger(std::size_t k, double logD, std::vector<double> logDj,
                               double logB, double gamma)
    : k_(k), logD_(logD), logDj_(std::move(logDj)), logB_(logB), gamma_(gamma) {
  if (k < 1 || k > 60) throw std::invalid_argument("k must lie in 1..60");
  if (logDj_.size() != k) throw std::invalid_argument("need log D_j for j = 2..k+1");
  for (double v : logDj_)
    if (!(v >= 0.0)) throw std::invalid_argument("log D_j must be >= 0");
  check_nonincreasing(logDj_);
  if (!(logB_ > 0.0)) throw std::invalid_argument("log B must be positive");
  t_star_ = schedule_length(gamma);
  initial_ = logDj_;
  log_eps_ = log_eps_star();
}

double CodegreeLedger::log_D_lower() const {
  const double t = static_cast<double>(t_);
  return logD_ - t * (2.0 + static_cast<double>(k_) * logx());
}

const IndexClassification& CodegreeLedger::status() const {
  if (!cache_) cache_ = classify_values(k_, logDj_, logB_, gamma_);
  return *cache_;
}

void CodegreeLedger::set_logDj(std::vector<double> v) {
  if (v.size() != k_) throw std::invalid_argument("need log D_j for j = 2..k+1");
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::max(v[i], 0.0);
    if (i > 0) v[i] = std::min(v[i], v[i - 1]);
  }
  logDj_ = std::move(v);
  cache_.reset();
}

IndexClassification classify(const CodegreeLedger& ledger) { return ledger.status(); }

std::vector<std::size_t> select_jstar(const IndexClassification& cls) {
  return mask_to_set(jstar_mask(cls), 2, cls.k);
}

IndexMask jstar_mask(const IndexClassification& cls) {
  IndexMask m = 0;
  for (std::size_t j = 2; j <= cls.k; ++j)
    if (!has(cls.super_stuck, j)) m |= IndexMask{1} << j;
  return m;
}

StepResult advance(CodegreeLedger& ledger, bool enforce_ct1, bool clamp_order) {
  if (ledger.terminated()) throw TerminatedLedger("ledger already terminated");
  StepResult r;
  r.t = ledger.t();
  r.classification = ledger.status();
  if (ledger.t() == ledger.t_star()) {
    LedgerAccess::terminate(ledger);
    r.status = StepStatus::Terminated;
    return r;
  }
  const double kd = static_cast<double>(ledger.k());
  const double g4 = ledger.eta();
  r.jstar = select_jstar(r.classification);
  r.ct1_margin = 2.0 * ledger.log_eps() + ledger.log_D_lower() - ledger.logDj(2) -
                 2.0 * kd * g4 * ledger.logB();
  const bool ct1 = !strictly_below(r.ct1_margin + 2.0 * kd * g4 * ledger.logB(),
                                   2.0 * kd * g4 * ledger.logB());
  if (!ct1 && enforce_ct1) {
    LedgerAccess::terminate(ledger);
    r.status = StepStatus::Ct1Failed;
    return r;
  }
  if (!ct1) r.status = StepStatus::Ct1Failed;
  LedgerAccess::step(ledger, jstar_mask(r.classification));
  if (clamp_order)
    r.reordered = LedgerAccess::clamp(ledger);
  else
    check_nonincreasing(ledger.logDj_all());
  return r;
}

ScheduleTrajectory run_schedule(CodegreeLedger ledger, bool assert_observations,
                                bool enforce_ct1, bool clamp_order) {
  ScheduleTrajectory tr;
  tr.k = ledger.k();
  tr.logD = ledger.logD();
  tr.logB = ledger.logB();
  tr.gamma = ledger.gamma();
  tr.initial_logDj = ledger.logDj_all();
  tr.enforce_ct1 = enforce_ct1;
  tr.clamp_order = clamp_order;
  tr.states.reserve(ledger.t_star() + 1);
  while (true) {
    TrajectoryState s;
    s.t = ledger.t();
    s.logDj = ledger.logDj_all();
    s.log_eps = ledger.log_eps();
    StepResult r = advance(ledger, enforce_ct1, clamp_order);
    if (r.reordered) ++tr.reorders;
    s.super_stuck = r.classification.super_stuck;
    s.semi_stuck = r.classification.semi_stuck;
    s.jstar = jstar_mask(r.classification);
    s.ct1_margin = r.ct1_margin;
    tr.states.push_back(std::move(s));
    if (r.status == StepStatus::Terminated) {
      tr.termination = "t_star";
      break;
    }
    if (r.status == StepStatus::Ct1Failed) {
      ++tr.ct1_failures;
      if (ledger.terminated()) {
        tr.termination = "ct1";
        break;
      }
    }
  }
  tr.t_end = tr.states.back().t;
  const std::size_t keep = assert_observations ? 1 : 64;
  tr.violations = check_observations(tr, keep);
  if (assert_observations && !tr.violations.empty()) {
    const auto& v = tr.violations.front();
    throw ObservationViolation(v.observation, v.t, v.j, v.margin);
  }
  return tr;
}

std::vector<ObservationRecord> check_observations(const ScheduleTrajectory& tr,
                                                  std::size_t max_records) {
  std::vector<ObservationRecord> out;
  const std::size_t k = tr.k;
  const double kd = static_cast<double>(k);
  const double g3 = tr.gamma * tr.gamma * tr.gamma;
  const double lx = tr.gamma * g3 * tr.logB;
  auto tol = [](double x) { return kObsTol * std::max(1.0, std::abs(x)); };
  auto report = [&](const char* name, std::size_t t, std::size_t j, double margin) {
    if (out.size() < max_records) out.push_back({name, t, j, margin});
    return out.size() >= max_records;
  };
  IndexMask prev_slow = ~IndexMask{0};
  for (std::size_t idx = 0; idx < tr.states.size(); ++idx) {
    const auto& s = tr.states[idx];
    if (s.logDj.size() != k) throw std::invalid_argument("trajectory state has wrong length");
    IndexClassification c;
    c.k = k;
    c.super_stuck = s.super_stuck;
    c.semi_stuck = s.semi_stuck;
    const double t = static_cast<double>(s.t);
    auto L = [&](std::size_t j) { return s.logDj[j - 2]; };
    auto L0 = [&](std::size_t j) { return tr.initial_logDj[j - 2]; };

    for (std::size_t j = 2; j <= k + 1; ++j) {
      const double rhs = L(c.slowpoke_of(j)) + kd * g3 * tr.logB;
      if (L(j) > rhs + tol(rhs) && report("O1", s.t, j, L(j) - rhs)) return out;
    }
    if (idx + 1 < tr.states.size()) {
      const auto& nx = tr.states[idx + 1];
      for (std::size_t j = 2; j <= k; ++j)
        if (has(s.semi_stuck, j) && !has(nx.semi_stuck, j) &&
            report("O2", s.t, j, nx.logDj[j - 2] - nx.logDj[j - 1] - g3 * tr.logB))
          return out;
    }
    const IndexMask slow = c.slowpoke_mask();
    for (std::size_t j = 2; j <= k + 1; ++j)
      if (has(slow, j) && !has(prev_slow, j) && report("O3", s.t, j, 0.0)) return out;
    prev_slow = slow;
    for (std::size_t j = 2; j <= k; ++j) {
      if (!has(slow, j)) continue;
      const double expect = L0(j) + t * (2.0 - (kd - static_cast<double>(j) + 1.0) * lx);
      if (std::abs(L(j) - expect) > tol(expect) && report("O4", s.t, j, L(j) - expect))
        return out;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 2; j <= k + 1; ++j)
      best = std::max(best, L0(j) - t * (kd - static_cast<double>(j) + 1.0) * lx);
    const double rhs5 = 2.0 * kd * g3 * tr.logB + best;
    if (L(2) > rhs5 + tol(rhs5) && report("O5", s.t, 2, L(2) - rhs5)) return out;
  }
  return out;
}

std::vector<double> replay_jstar(const ScheduleTrajectory& tr) {
  CodegreeLedger l(tr.k, tr.logD, tr.initial_logDj, tr.logB, tr.gamma);
  for (std::size_t i = 0; i + 1 < tr.states.size(); ++i) {
    LedgerAccess::step(l, tr.states[i].jstar);
    if (tr.clamp_order) LedgerAccess::clamp(l);
  }
  return l.logDj_all();
}

std::optional<ReplayMismatch> compare_replay(const ScheduleTrajectory& tr) {
  CodegreeLedger l(tr.k, tr.logD, tr.initial_logDj, tr.logB, tr.gamma);
  ScheduleTrajectory fresh = run_schedule(l, false, tr.enforce_ct1, tr.clamp_order);
  const std::size_t n = std::min(fresh.states.size(), tr.states.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < tr.k; ++j)
      if (fresh.states[i].logDj[j] != tr.states[i].logDj[j])
        return ReplayMismatch{tr.states[i].t, j + 2, tr.states[i].logDj[j],
                              fresh.states[i].logDj[j]};
  if (fresh.states.size() != tr.states.size())
    return ReplayMismatch{n, 0, static_cast<double>(tr.states.size()),
                          static_cast<double>(fresh.states.size())};
  return std::nullopt;
}

std::string log_to_string(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double log_from_string(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad decimal '" + s + "'");
  return v;
}

namespace {

nlohmann::json logs_json(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(log_to_string(x));
  return a;
}

std::vector<double> logs_from(const nlohmann::json& a) {
  std::vector<double> v;
  for (const auto& x : a) v.push_back(log_from_string(x.get<std::string>()));
  return v;
}

}  // namespace

nlohmann::json to_json(const CodegreeLedger& l) {
  const auto& c = l.status();
  return {{"k", l.k()},
          {"logD", log_to_string(l.logD())},
          {"logB", log_to_string(l.logB())},
          {"gamma", log_to_string(l.gamma())},
          {"eta", log_to_string(l.eta())},
          {"logx", log_to_string(l.logx())},
          {"A", log_to_string(l.A())},
          {"log_eps_star", log_to_string(l.log_eps_star())},
          {"log_eps_t", log_to_string(l.log_eps())},
          {"t", l.t()},
          {"t_star", l.t_star()},
          {"terminated", l.terminated()},
          {"initial_logDj", logs_json(l.initial_logDj())},
          {"logDj", logs_json(l.logDj_all())},
          {"super_stuck", c.super_stuck_set()},
          {"semi_stuck", c.semi_stuck_set()},
          {"slowpokes", c.slowpokes()},
          {"clusters", c.clusters()}};
}

CodegreeLedger ledger_from_json(const nlohmann::json& j) {
  CodegreeLedger l(j.at("k").get<std::size_t>(), log_from_string(j.at("logD")),
                   logs_from(j.at("initial_logDj")), log_from_string(j.at("logB")),
                   log_from_string(j.at("gamma")));
  LedgerAccess::restore(l, logs_from(j.at("logDj")), log_from_string(j.at("log_eps_t")),
                        j.at("t").get<std::size_t>(), j.at("terminated").get<bool>());
  return l;
}

nlohmann::json to_json(const ScheduleTrajectory& tr) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : tr.states)
    states.push_back({{"t", s.t},
                      {"logDj", logs_json(s.logDj)},
                      {"log_eps", log_to_string(s.log_eps)},
                      {"super_stuck", s.super_stuck},
                      {"semi_stuck", s.semi_stuck},
                      {"jstar", s.jstar},
                      {"ct1_margin", log_to_string(s.ct1_margin)}});
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : tr.violations)
    viol.push_back({{"observation", v.observation}, {"t", v.t}, {"j", v.j},
                    {"margin", log_to_string(v.margin)}});
  return {{"k", tr.k},
          {"logD", log_to_string(tr.logD)},
          {"logB", log_to_string(tr.logB)},
          {"gamma", log_to_string(tr.gamma)},
          {"initial_logDj", logs_json(tr.initial_logDj)},
          {"t_end", tr.t_end},
          {"termination", tr.termination},
          {"enforce_ct1", tr.enforce_ct1},
          {"clamp_order", tr.clamp_order},
          {"ct1_failures", tr.ct1_failures},
          {"reorders", tr.reorders},
          {"violations", viol},
          {"states", states}};
}

ScheduleTrajectory trajectory_from_json(const nlohmann::json& j) {
  ScheduleTrajectory tr;
  tr.k = j.at("k").get<std::size_t>();
  tr.logD = log_from_string(j.at("logD"));
  tr.logB = log_from_string(j.at("logB"));
  tr.gamma = log_from_string(j.at("gamma"));
  tr.initial_logDj = logs_from(j.at("initial_logDj"));
  tr.t_end = j.at("t_end").get<std::size_t>();
  tr.termination = j.at("termination").get<std::string>();
  tr.enforce_ct1 = j.value("enforce_ct1", true);
  tr.clamp_order = j.value("clamp_order", false);
  tr.ct1_failures = j.value("ct1_failures", std::size_t{0});
  tr.reorders = j.value("reorders", std::size_t{0});
  for (const auto& v : j.at("violations"))
    tr.violations.push_back({v.at("observation").get<std::string>(), v.at("t").get<std::size_t>(),
                             v.at("j").get<std::size_t>(), log_from_string(v.at("margin"))});
  for (const auto& s : j.at("states")) {
    TrajectoryState st;
    st.t = s.at("t").get<std::size_t>();
    st.logDj = logs_from(s.at("logDj"));
    st.log_eps = log_from_string(s.at("log_eps"));
    st.super_stuck = s.at("super_stuck").get<IndexMask>();
    st.semi_stuck = s.at("semi_stuck").get<IndexMask>();
    st.jstar = s.at("jstar").get<IndexMask>();
    st.ct1_margin = log_from_string(s.at("ct1_margin"));
    tr.states.push_back(std::move(st));
  }
  return tr;
}

}  // namespace nforge
