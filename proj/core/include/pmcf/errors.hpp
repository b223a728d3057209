#ifndef PMCF_ERRORS_HPP
#define PMCF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pmcf {

// Base class for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation point violates the chart domain r > sigma.
struct DomainError : Error {
  using Error::Error;
};

// Metric lost positive definiteness (perturbation too large).
struct MetricDefinitenessError : Error {
  using Error::Error;
};

// Surface stopped being a radial graph, or left the chart domain.
struct GraphConditionError : Error {
  using Error::Error;
};

// Mixing fields that live on different grids.
struct GridMismatchError : Error {
  using Error::Error;
};

// Linear solve failed; carries the smallest singular value of the operator.
struct SingularOperatorError : Error {
  double smallest_singular_value;
  SingularOperatorError(const std::string& msg, double sv)
      : Error(msg), smallest_singular_value(sv) {}
};

// Newton iteration exhausted its budget.
struct ConvergenceError : Error {
  using Error::Error;
};

// Continuation could not cross a kappa-segment; carries the last good knot.
struct ContinuationError : Error {
  double last_good_h;
  double last_good_tau;
  ContinuationError(const std::string& msg, double h, double tau)
      : Error(msg), last_good_h(h), last_good_tau(tau) {}
};

enum class ConfigErrorKind { Parse, Schema, Range };

// Configuration problems; `key` names the offending entry when known.
struct ConfigError : Error {
  ConfigErrorKind kind;
  std::string key;
  ConfigError(ConfigErrorKind k, const std::string& key_, const std::string& msg)
      : Error(msg), kind(k), key(key_) {}
};

}  // namespace pmcf

#endif
