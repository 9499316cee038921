#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace bsctrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Three-valued verdict used wherever a numerical test can fail to decide.
enum class Tristate { yes, no, indeterminate };

[[nodiscard]] constexpr const char* to_string(Tristate t) noexcept {
    switch (t) {
        case Tristate::yes: return "yes";
        case Tristate::no: return "no";
        case Tristate::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

[[nodiscard]] constexpr bool is_determinate(Tristate t) noexcept {
    return t != Tristate::indeterminate;
}

[[nodiscard]] constexpr Tristate to_tristate(bool b) noexcept {
    return b ? Tristate::yes : Tristate::no;
}

/// Shape or argument violations on entry to an operation.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A dense eigensolver failed to converge.
class EigensolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A Lyapunov-type linear solve hit a (numerically) singular operator.
class SingularOperatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values appeared during an integration.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mathematically guaranteed search came back empty; indicates a
/// tolerance failure rather than a property of the input.
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void check_square(const Matrix& m, const char* name) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(name) + " must be square, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

inline void check_finite(const Matrix& m, const char* name) {
    if (!m.allFinite()) {
        throw DimensionError(std::string(name) + " contains non-finite entries");
    }
}

}  // namespace bsctrl
