#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace dlneb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when an operation needs the width or excluded-lambda assumption and the instance violates it.
class AssumptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Internal invariant broken (non-monotone refinement, non-critical output, ...).
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::vector<Matrix> last_finite, long iteration)
        : std::runtime_error(what), last_finite_(std::move(last_finite)), iteration_(iteration) {}
    const std::vector<Matrix>& last_finite() const { return last_finite_; }
    long iteration() const { return iteration_; }

private:
    std::vector<Matrix> last_finite_;
    long iteration_;
};

enum class Target { F, G };

} // namespace dlneb
