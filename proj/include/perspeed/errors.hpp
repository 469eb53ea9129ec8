#pragma once

#include <stdexcept>
#include <string>

namespace perspeed {

/// Malformed input: bad coefficient data, bad config field. Carries the
/// dotted path of the offending field (e.g. "competition.a11").
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Grid too coarse for the requested operator: the discrete off-diagonals
/// would change sign. Reports the smallest node count that is admissible.
class GridRefinementError : public std::runtime_error {
public:
    GridRefinementError(int n_current, int n_min, const std::string& what)
        : std::runtime_error(what), n_current_(n_current), n_min_(n_min) {}
    int n_current() const { return n_current_; }
    int n_min() const { return n_min_; }

private:
    int n_current_;
    int n_min_;
};

/// Principal eigenvalue nonpositive where positivity is required
/// ("extinction: no positive steady state", "no positive speed: ...").
class HypothesisError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iteration cap hit before the requested tolerance.
class ConvergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Resolvent shift at or below the spectral bound of the operator.
class SpectralBoundError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A simulation run produced output that cannot be trusted
/// (boundary contamination, collapsed front, excessive clipping).
class SimulationQualityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Internal consistency failure that indicates a bug, not bad input.
class InternalError : public std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace perspeed
