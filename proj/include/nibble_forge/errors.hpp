#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace nforge {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Raised when a bulk table would exceed the configured entry cap.
class MemoryGuardError : public Error {
 public:
  MemoryGuardError(std::size_t requested, std::size_t cap)
      : Error("codegree table needs " + std::to_string(requested) +
              " entries, cap is " + std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}
  std::size_t requested() const { return requested_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

// Nibble cannot run at all (no positive probability, isolated vertex, ...).
class InadmissibleNibble : public Error {
 public:
  using Error::Error;
};

// Strict-mode hypothesis failure; carries the hypothesis report as JSON.
class HypothesisFailure : public Error {
 public:
  explicit HypothesisFailure(const std::string& what, nlohmann::json report = nullptr)
      : Error(what), report_(std::move(report)) {}
  const nlohmann::json& report() const { return report_; }

 private:
  nlohmann::json report_;
};

class ObservationViolation : public Error {
 public:
  ObservationViolation(std::string observation, std::size_t t, std::size_t j,
                       double margin)
      : Error(observation + " violated at t=" + std::to_string(t) +
              " j=" + std::to_string(j) + " margin=" + std::to_string(margin)),
        observation_(std::move(observation)),
        t_(t),
        j_(j),
        margin_(margin) {}
  const std::string& observation() const { return observation_; }
  std::size_t t() const { return t_; }
  std::size_t j() const { return j_; }
  double margin() const { return margin_; }

 private:
  std::string observation_;
  std::size_t t_;
  std::size_t j_;
  double margin_;
};

class TerminatedLedger : public Error {
 public:
  using Error::Error;
};

}  // namespace nforge
