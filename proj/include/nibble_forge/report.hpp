#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace nforge {

enum class Mode { Strict, Lenient };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

enum class CheckKind { Hypothesis, Conclusion, Analytic };

std::string to_string(CheckKind k);

// One named inequality evaluated on a run: lower <= value <= upper.
// Non-applicable checks are reported but never count as failures.
struct Check {
  std::string name;
  CheckKind kind = CheckKind::Conclusion;
  bool applicable = true;
  bool passed = true;
  double value = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  // Relative distance outside [lower, upper]; 0 when inside.
  double violation() const;
};

// Builds a check and sets passed from the band.
Check band_check(std::string name, CheckKind kind, double value, double lower, double upper,
                 bool applicable = true);

struct ConclusionReport {
  std::vector<Check> checks;

  void add(Check c) { checks.push_back(std::move(c)); }
  // Failed applicable checks of the given kind.
  std::size_t failed(CheckKind kind = CheckKind::Conclusion) const;
  // Largest violation among failed applicable checks of the kind.
  double max_violation(CheckKind kind = CheckKind::Conclusion) const;
  bool all_passed(CheckKind kind = CheckKind::Conclusion) const { return failed(kind) == 0; }
  const Check* find(const std::string& name) const;
  // First failed applicable check of the kind, or nullptr.
  const Check* first_failure(CheckKind kind = CheckKind::Conclusion) const;
};

// JSON numbers cannot hold infinities or NaN; these become strings.
nlohmann::json json_number(double x);
nlohmann::json to_json(const Check& c);
nlohmann::json to_json(const ConclusionReport& r);

// Build identifier baked in at configure time.
const char* build_id();

}  // namespace nforge
