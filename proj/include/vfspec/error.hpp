#pragma once

// Exception hierarchy. Every library failure derives from Error so the CLI
// can map any library exception to a usage-error exit in one catch clause.

#include <stdexcept>
#include <string>

namespace vfspec {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression or specification string. `position` is the byte
/// offset into the source text where parsing failed.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Evaluation hit a hard domain error (division by zero, log of a
/// non-positive value, and so on). `subexpression` prints the offending node.
class EvalError : public Error {
public:
    EvalError(const std::string& what, std::string subexpression)
        : Error(what + " in '" + subexpression + "'"),
          subexpression_(std::move(subexpression)) {}

    const std::string& subexpression() const { return subexpression_; }

private:
    std::string subexpression_;
};

/// A flow map was requested past the point where the trajectory leaves the
/// domain. The bracket [t_inside, t_outside] localizes the exit time.
class FlowExitError : public Error {
public:
    FlowExitError(double t_inside, double t_outside)
        : Error("trajectory exits the domain between t=" + std::to_string(t_inside) +
                " and t=" + std::to_string(t_outside)),
          t_inside_(t_inside),
          t_outside_(t_outside) {}

    double t_inside() const { return t_inside_; }
    double t_outside() const { return t_outside_; }

private:
    double t_inside_;
    double t_outside_;
};

/// Caller passed arguments that are structurally invalid (dimension
/// mismatch, empty grid, out-of-range option).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace vfspec
