#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rkbs {

// Caller misuse (bad shapes, bad configs, points outside the domain) and
// mathematical failures (singular Grams, no convergence) are kept apart so the
// CLI can map them to different exit codes.

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public UsageError {
public:
    using UsageError::UsageError;
};

class DuplicateCenterError : public UsageError {
public:
    using UsageError::UsageError;
};

class OrderError : public UsageError {
public:
    using UsageError::UsageError;
};

class ShapeError : public UsageError {
public:
    using UsageError::UsageError;
};

class MathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gram (or Schur complement) could not be factorized. Signals an A1 violation
/// when raised during Gram assembly; `centers` holds the offending set if known.
class SingularError : public MathError {
public:
    explicit SingularError(const std::string& what, std::vector<double> centers = {})
        : MathError(what), centers_(std::move(centers)) {}

    const std::vector<double>& centers() const noexcept { return centers_; }

private:
    std::vector<double> centers_;
};

class RankError : public MathError {
public:
    using MathError::MathError;
};

class NonconvergenceError : public MathError {
public:
    NonconvergenceError(const std::string& what, std::size_t iterations,
                        double primal_residual, double dual_residual)
        : MathError(what),
          iterations_(iterations),
          primal_residual_(primal_residual),
          dual_residual_(dual_residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double primal_residual() const noexcept { return primal_residual_; }
    double dual_residual() const noexcept { return dual_residual_; }

private:
    std::size_t iterations_;
    double primal_residual_;
    double dual_residual_;
};

}  // namespace rkbs
