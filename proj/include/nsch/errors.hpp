#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nsch {

/// Violation of a documented precondition (unset boundary kind, grid
/// mismatch, invalid parameter range, ...).
class contract_error : public std::invalid_argument {
public:
    explicit contract_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A time step larger than the scheme admits. Carries the largest
/// admissible dt so the caller can retry.
class cfl_error : public std::runtime_error {
public:
    cfl_error(const std::string& what, double admissible)
        : std::runtime_error(what), admissible_dt(admissible) {}
    double admissible_dt;
};

struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;  // relative l2
    bool converged = false;
    std::vector<double> residual_history;
};

/// Linear solver breakdown or non-convergence. Carries the report of the
/// failed solve.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, SolveReport rep = {})
        : std::runtime_error(what), report(std::move(rep)) {}
    SolveReport report;
};

/// Configuration file problem; message names the offending key or line.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nsch
