#pragma once

// Generator for randomized scheduler inputs inside the proved regime:
// gamma <= min(1/(4k), 0.2), log B >= (10/gamma^4) log(log D), log B no
// larger than the codegree-ratio bound, and e^(2 t*) <= B^(k gamma^3) (the
// inequality the growth bound on D_2 needs; it follows from log D >=
// e^(2/gamma^4), which is too large to represent directly).

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nibble_forge/ledger.hpp"

namespace nftest {

struct LedgerInput {
  std::size_t k = 0;
  double gamma = 0;
  double logD = 0;
  double logB = 0;
  std::vector<double> logDj;
};

inline LedgerInput random_admissible_ledger(std::mt19937_64& rng, std::size_t k_lo = 2,
                                            std::size_t k_hi = 6, double gamma_lo = 0.04) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  LedgerInput in;
  in.k = k_lo + rng() % (k_hi - k_lo + 1);
  const double kd = static_cast<double>(in.k);
  const double gmax = std::min(1.0 / (4.0 * kd), 0.2);
  const double glo = std::min(gamma_lo, gmax);
  in.gamma = glo + (gmax - glo) * u01(rng);
  const double g4 = std::pow(in.gamma, 4);
  const double slack = u01(rng);
  const double a = (kd + 1.0) * (1.0 + 2.0 * u01(rng));
  double logB = 1.0;
  const double floor_B = 2.0 * static_cast<double>(nforge::schedule_length(in.gamma)) /
                        (kd * in.gamma * in.gamma * in.gamma);
  for (int it = 0; it < 200; ++it)
    logB = std::max((10.0 / g4) * std::log(a * logB), floor_B) * (1.0 + slack);
  in.logB = logB;
  in.logD = a * logB;
  // Upper caps from the B bound: D_2 <= D/B^2, D_j <= D/B^(j-1) for j >= 4.
  const bool clustered = rng() % 3 == 0;
  double prev = in.logD - 2.0 * logB;
  for (std::size_t j = 2; j <= in.k + 1; ++j) {
    double cap = prev;
    if (j >= 4) cap = std::min(cap, in.logD - static_cast<double>(j - 1) * logB);
    cap = std::max(cap, 0.0);
    double v;
    if (clustered && j > 2 && rng() % 2 == 0)
      v = std::max(0.0, cap - u01(rng) * in.gamma * in.gamma * in.gamma * logB);
    else
      v = cap * (0.3 + 0.7 * u01(rng));
    in.logDj.push_back(v);
    prev = v;
  }
  return in;
}

inline nforge::CodegreeLedger make_ledger(const LedgerInput& in) {
  return nforge::CodegreeLedger(in.k, in.logD, in.logDj, in.logB, in.gamma);
}

}  // namespace nftest
