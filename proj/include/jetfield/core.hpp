#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace jetfield {

// Dimensions of the jet space J^1(T, M): p = dim T (temporal), n = dim M
// (spatial). Vertical coordinates x^i_alpha form an n x p family.
struct Dims {
    int p = 1;
    int n = 1;

    bool operator==(const Dims&) const = default;
};

inline void validate_dims(const Dims& d) {
    if (d.p < 1 || d.n < 1)
        throw std::invalid_argument("dimensions must be positive, got p=" + std::to_string(d.p) +
                                    ", n=" + std::to_string(d.n));
}

// A single evaluation point (t^alpha, x^i, x^i_alpha).
// y[i][a] stores the vertical coordinate x^i_alpha (i in 0..n-1, a in 0..p-1).
struct JetPoint {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<std::vector<double>> y;

    static JetPoint zero(const Dims& d) {
        JetPoint pt;
        pt.t.assign(static_cast<size_t>(d.p), 0.0);
        pt.x.assign(static_cast<size_t>(d.n), 0.0);
        pt.y.assign(static_cast<size_t>(d.n), std::vector<double>(static_cast<size_t>(d.p), 0.0));
        return pt;
    }

    bool matches(const Dims& d) const {
        if (static_cast<int>(t.size()) != d.p || static_cast<int>(x.size()) != d.n ||
            static_cast<int>(y.size()) != d.n)
            return false;
        for (const auto& row : y)
            if (static_cast<int>(row.size()) != d.p) return false;
        return true;
    }
};

// Base class for all errors raised by the library.
struct JetfieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an expression cannot be parsed.
struct ParseError : JetfieldError {
    ParseError(const std::string& msg, int line, int column)
        : JetfieldError(msg + " (line " + std::to_string(line) + ", column " +
                        std::to_string(column) + ")"),
          line(line),
          column(column) {}
    int line;
    int column;
};

// Raised when evaluation hits a domain problem (log of a non-positive value,
// division by zero, ...). Carries the offending subexpression.
struct EvalError : JetfieldError {
    using JetfieldError::JetfieldError;
};

// Raised when a metric is numerically degenerate at a sample point.
struct DegenerateMetricError : JetfieldError {
    using JetfieldError::JetfieldError;
};

}  // namespace jetfield
