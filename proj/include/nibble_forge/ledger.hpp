#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace nforge {

// Indices run over {2, ..., k+1}; bit j of a mask stands for index j.
using IndexMask = std::uint64_t;

struct IndexClassification {
  std::size_t k = 0;
  IndexMask super_stuck = 0;
  IndexMask semi_stuck = 0;

  std::vector<std::size_t> super_stuck_set() const;
  std::vector<std::size_t> semi_stuck_set() const;
  // Consecutive runs of {2..k+1}: each run is semi-stuck indices closed by
  // the first index that is not.
  std::vector<std::vector<std::size_t>> clusters() const;
  std::vector<std::size_t> slowpokes() const;
  IndexMask slowpoke_mask() const;
  // Largest index of the cluster containing j.
  std::size_t slowpoke_of(std::size_t j) const;
  // The cluster containing k+1.
  std::vector<std::size_t> dormant_cluster() const;
};

// log B = max(0, min{(logD - logD_2)/2, (logD - logD_j)/(j-1) for j = 4..k+1,
// -log eps}). logDj lists j = 2..k+1.
double compute_log_B(double logD, const std::vector<double>& logDj, double log_eps);

// floor(1/gamma^4 - 1/gamma^2), with a 1e-12 relative guard against values
// that are integers in exact arithmetic.
std::size_t schedule_length(double gamma);

// Log-space state of the codegree schedule.
class CodegreeLedger {
 public:
  CodegreeLedger() = default;
  // logDj lists j = 2..k+1 and must be nonincreasing and >= 0.
  CodegreeLedger(std::size_t k, double logD, std::vector<double> logDj, double logB,
                 double gamma);

  std::size_t k() const { return k_; }
  double logD() const { return logD_; }
  double logB() const { return logB_; }
  double gamma() const { return gamma_; }
  double eta() const { return gamma_ * gamma_ * gamma_ * gamma_; }
  double logx() const { return eta() * logB_; }
  double A() const { return 10.0 / eta(); }
  double log_eps_star() const { return (-1.0 + 10.0 * static_cast<double>(k_) * gamma_ * gamma_ * gamma_) * logB_; }
  double log_eps() const { return log_eps_; }
  std::size_t t() const { return t_; }
  std::size_t t_star() const { return t_star_; }
  bool terminated() const { return terminated_; }

  double logDj(std::size_t j) const { return logDj_.at(j - 2); }
  const std::vector<double>& logDj_all() const { return logDj_; }
  const std::vector<double>& initial_logDj() const { return initial_; }

  // log D^{(t,-)} = logD - t(2 + k logx).
  double log_D_lower() const;
  // Classification at the current t (cached).
  const IndexClassification& status() const;

  // Replace the current D_j^{(t)} with measured values (clamped to be
  // nonincreasing and >= 0).
  void set_logDj(std::vector<double> logDj);

 private:
  friend struct LedgerAccess;
  std::size_t k_ = 0;
  double logD_ = 0;
  std::vector<double> logDj_;
  std::vector<double> initial_;
  double logB_ = 0;
  double gamma_ = 0;
  double log_eps_ = 0;
  std::size_t t_ = 0;
  std::size_t t_star_ = 0;
  bool terminated_ = false;
  mutable std::optional<IndexClassification> cache_;
};

IndexClassification classify(const CodegreeLedger& ledger);

// {2..k} minus the super-stuck indices.
std::vector<std::size_t> select_jstar(const IndexClassification& cls);
IndexMask jstar_mask(const IndexClassification& cls);

enum class StepStatus { Advanced, Terminated, Ct1Failed };

struct StepResult {
  StepStatus status = StepStatus::Advanced;
  std::size_t t = 0;  // time at which the step was taken
  IndexClassification classification;
  std::vector<std::size_t> jstar;
  // 2 log eps_(t) + log D^{(t,-)} - log D_2^{(t)} - 2k gamma^4 log B.
  double ct1_margin = 0;
  // The update broke the ordering and was clamped (clamp_order only).
  bool reordered = false;
};

// One step. With enforce_ct1 a failing (Ct1) terminates with t* = t; without
// it the failure is recorded in the result and the update still happens.
// An update that leaves logDj out of order throws std::logic_error, unless
// clamp_order, in which case each logD_{j+1} is lowered to logD_j (valid
// because C_{j+1} <= C_j). Throws TerminatedLedger once terminated.
StepResult advance(CodegreeLedger& ledger, bool enforce_ct1 = true, bool clamp_order = false);

// Per-time record; classification is that of the state at time t.
struct TrajectoryState {
  std::size_t t = 0;
  std::vector<double> logDj;
  double log_eps = 0;
  IndexMask super_stuck = 0;
  IndexMask semi_stuck = 0;
  IndexMask jstar = 0;   // J*_t (unused for the terminal state)
  double ct1_margin = 0;  // (unused for the terminal state)
};

struct ObservationRecord {
  std::string observation;
  std::size_t t = 0;
  std::size_t j = 0;
  double margin = 0;
};

struct ScheduleTrajectory {
  std::size_t k = 0;
  double logD = 0;
  double logB = 0;
  double gamma = 0;
  std::vector<double> initial_logDj;
  std::vector<TrajectoryState> states;  // t = 0..t_end
  std::size_t t_end = 0;
  std::string termination;  // "t_star" or "ct1"
  bool enforce_ct1 = true;
  bool clamp_order = false;
  std::size_t ct1_failures = 0;
  std::size_t reorders = 0;
  std::vector<ObservationRecord> violations;
};

// Runs to termination. Observations are always evaluated; with
// assert_observations the first violation throws ObservationViolation,
// otherwise violations are collected in the trajectory.
ScheduleTrajectory run_schedule(CodegreeLedger ledger, bool assert_observations,
                                bool enforce_ct1 = true, bool clamp_order = false);

// Evaluates Observations 1-5 on recorded states (tolerance 1e-9 relative).
std::vector<ObservationRecord> check_observations(const ScheduleTrajectory& traj,
                                                  std::size_t max_records = 16);

// Applies the recorded J*_t updates from the initial values; returns the
// final logDj.
std::vector<double> replay_jstar(const ScheduleTrajectory& traj);

// First index where the recorded states differ from a fresh run, if any.
struct ReplayMismatch {
  std::size_t t = 0;
  std::size_t j = 0;
  double recorded = 0;
  double recomputed = 0;
};
std::optional<ReplayMismatch> compare_replay(const ScheduleTrajectory& traj);

// Logs are written as decimal strings with round-trip precision.
std::string log_to_string(double x);
double log_from_string(const std::string& s);
nlohmann::json to_json(const CodegreeLedger& ledger);
CodegreeLedger ledger_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScheduleTrajectory& traj);
ScheduleTrajectory trajectory_from_json(const nlohmann::json& j);

}  // namespace nforge
