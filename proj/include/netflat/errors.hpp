#pragma once

#include <stdexcept>
#include <string>

namespace netflat {

// Error taxonomy; the CLI maps kinds onto distinct exit codes.
enum class ErrorKind {
    Validation,     // bad config, bad graph description, precondition violated
    InvalidVertex,  // vertex id does not resolve in the graph
    Inconclusive,   // search/series exhausted without a definite answer
    Unbounded,      // operation requires a bounded operator
    Resource,       // work cap exceeded (series plan explosion etc.)
    Solver,         // iteration failed to converge / state left its box
    Numeric,        // eigensolver or other numeric backend failure
    Io,             // file system problems
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Distance search ran out of budget; carries the best proven lower bound.
class InconclusiveDistance : public Error {
public:
    InconclusiveDistance(const std::string& message, double lower_bound)
        : Error(ErrorKind::Inconclusive, message), lower_bound_(lower_bound) {}

    double lower_bound() const noexcept { return lower_bound_; }

private:
    double lower_bound_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation: return "validation";
        case ErrorKind::InvalidVertex: return "invalid-vertex";
        case ErrorKind::Inconclusive: return "inconclusive";
        case ErrorKind::Unbounded: return "unbounded";
        case ErrorKind::Resource: return "resource";
        case ErrorKind::Solver: return "solver";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace netflat
