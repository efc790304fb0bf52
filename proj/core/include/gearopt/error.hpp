#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gearopt {

// Every error raised by the library derives from Error. The CLI maps the
// concrete types onto its exit-code contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (CSV/JSON). `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Input parsed but violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Loss-model fitting could not be carried out (e.g. too few contour samples).
class FitError : public Error {
public:
    using Error::Error;
};

// No design/control satisfies the constraints. `step` names the offending
// time step when one is known.
class InfeasibleError : public Error {
public:
    static constexpr std::size_t no_step = static_cast<std::size_t>(-1);

    explicit InfeasibleError(const std::string& what, std::size_t step = no_step)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// Operating point outside a motor map or a loss model's power hull.
class EnvelopeError : public Error {
public:
    static constexpr std::size_t no_step = static_cast<std::size_t>(-1);

    explicit EnvelopeError(const std::string& what, std::size_t step = no_step)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// Brute-force enumeration would exceed its work budget.
class BudgetError : public Error {
public:
    BudgetError(const std::string& what, double required)
        : Error(what), required_(required) {}
    double required() const noexcept { return required_; }

private:
    double required_;
};

// Broken internal contract, e.g. the iterative MGT solver increasing J.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace gearopt
