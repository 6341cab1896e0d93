#ifndef LPH_ERRORS_HPP
#define LPH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lph {

/// Base class for all errors thrown by this library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands have incompatible or invalid shapes.
class dimension_error : public error {
public:
    using error::error;
};

/// A computation produced non-finite values (overflow, invalid input).
class numeric_error : public error {
public:
    using error::error;
};

/// A linear system is singular to working tolerance.  Carries the smallest
/// pivot magnitude encountered during factorization.
class singular_error : public error {
public:
    singular_error(const std::string& msg, double pivot)
        : error(msg + " (smallest pivot magnitude " + std::to_string(pivot) + ")"),
          pivot_(pivot) {}
    double pivot() const noexcept { return pivot_; }

private:
    double pivot_;
};

/// Input to the symmetric eigensolver is not symmetric within tolerance.
class symmetry_error : public error {
public:
    using error::error;
};

/// Argument outside the mathematical domain of the operation.
class domain_error : public error {
public:
    using error::error;
};

/// Structurally invalid argument (empty list, out-of-range index, ...).
class argument_error : public error {
public:
    using error::error;
};

/// A value failed its construction invariants.  The message names the
/// violated condition.
class construction_error : public error {
public:
    using error::error;
};

/// Degenerate (zero) or mismatched affine slopes.
class slope_error : public error {
public:
    using error::error;
};

/// Moment-generating function evaluated outside its convergence region.
class divergence_error : public error {
public:
    using error::error;
};

/// An iterative fit failed to converge or broke down numerically.
class fit_error : public error {
public:
    using error::error;
};

/// File could not be read, written or parsed.
class io_error : public error {
public:
    using error::error;
};

} // namespace lph

#endif
