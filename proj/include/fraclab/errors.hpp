#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fraclab {

/// Grid too coarse to resolve an oscillation scale (h > eps/2).
class ResolutionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A lemma/theorem hypothesis is violated (e.g. s <= 1/p where s > 1/p is required).
class HypothesisError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Too few admissible data points for a fit.
class InsufficientDataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Factorization/eigensolver breakdown, residual out of tolerance, and similar.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative minimizer exhausted its budget. Carries the last iterate and the
/// Rayleigh-quotient history so callers can inspect the trajectory.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate,
                     std::vector<double> quotient_history)
        : std::runtime_error(what),
          last_iterate_(std::move(last_iterate)),
          quotient_history_(std::move(quotient_history)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    const std::vector<double>& quotient_history() const noexcept { return quotient_history_; }

private:
    std::vector<double> last_iterate_;
    std::vector<double> quotient_history_;
};

}  // namespace fraclab
