#include "nibble_forge/report.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifndef NIBBLE_FORGE_BUILD_ID
#define NIBBLE_FORGE_BUILD_ID "unknown"
#endif

namespace nforge {

std::string to_string(Mode m) { return m == Mode::Strict ? "strict" : "lenient"; }

Mode mode_from_string(const std::string& s) {
  if (s == "strict") return Mode::Strict;
  if (s == "lenient") return Mode::Lenient;
  throw std::invalid_argument("mode must be strict or lenient, got '" + s + "'");
}

std::string to_string(CheckKind k) {
  switch (k) {
    case CheckKind::Hypothesis: return "hypothesis";
    case CheckKind::Conclusion: return "conclusion";
    case CheckKind::Analytic: return "analytic";
  }
  return "?";
}

double Check::violation() const {
  if (std::isnan(value)) return std::numeric_limits<double>::infinity();
  if (value < lower) return (lower - value) / std::max(std::abs(lower), 1.0);
  if (value > upper) return (value - upper) / std::max(std::abs(upper), 1.0);
  return 0.0;
}

Check band_check(std::string name, CheckKind kind, double value, double lower, double upper,
                 bool applicable) {
  Check c;
  c.name = std::move(name);
  c.kind = kind;
  c.applicable = applicable;
  c.value = value;
  c.lower = lower;
  c.upper = upper;
  c.passed = !std::isnan(value) && value >= lower && value <= upper;
  return c;
}

std::size_t ConclusionReport::failed(CheckKind kind) const {
  std::size_t n = 0;
  for (const auto& c : checks)
    if (c.kind == kind && c.applicable && !c.passed) ++n;
  return n;
}

double ConclusionReport::max_violation(CheckKind kind) const {
  double worst = 0.0;
  for (const auto& c : checks)
    if (c.kind == kind && c.applicable && !c.passed) worst = std::max(worst, c.violation());
  return worst;
}

const Check* ConclusionReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

const Check* ConclusionReport::first_failure(CheckKind kind) const {
  for (const auto& c : checks)
    if (c.kind == kind && c.applicable && !c.passed) return &c;
  return nullptr;
}

nlohmann::json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

nlohmann::json to_json(const Check& c) {
  return {{"name", c.name},          {"kind", to_string(c.kind)},
          {"applicable", c.applicable}, {"passed", c.passed},
          {"value", json_number(c.value)}, {"lower", json_number(c.lower)},
          {"upper", json_number(c.upper)}};
}

nlohmann::json to_json(const ConclusionReport& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : r.checks) arr.push_back(to_json(c));
  return {{"failed_conclusions", r.failed(CheckKind::Conclusion)},
          {"failed_hypotheses", r.failed(CheckKind::Hypothesis)},
          {"failed_analytic", r.failed(CheckKind::Analytic)},
          {"checks", arr}};
}

const char* build_id() { return NIBBLE_FORGE_BUILD_ID; }

}  // namespace nforge
