#ifndef LPH_BSPLINE_HPP
#define LPH_BSPLINE_HPP

#include <vector>

#include <nlohmann/json.hpp>

#include "lph/linalg.hpp"

namespace lph {

/// Cubic B-spline basis on [0, 1] with equally spaced interior knots and a
/// difference penalty on the coefficients.  Convention: dimension equals
/// interior_knots + 4 (the spline order), so the default 20-dimensional
/// basis has 16 interior knots.
struct BasisSpec {
    int dimension = 20;
    int interior_knots = 16;
    double penalty_lambda = 0.5;
    int penalty_order = 2;

    void validate() const; // throws construction_error on inconsistency

    nlohmann::json to_json() const;
    static BasisSpec from_json(const nlohmann::json& j);
};

class BSplineBasis {
public:
    explicit BSplineBasis(const BasisSpec& spec);

    const BasisSpec& spec() const { return spec_; }
    int size() const { return spec_.dimension; }

    /// All basis values at u in [0, 1] (at most 4 are nonzero).
    Vector eval_all(double u) const;
    double eval_coefs(const Vector& coefs, double u) const;

    /// Design matrix: one row of basis values per abscissa.
    Matrix design(const std::vector<double>& u) const;

    /// Gram matrix int B_i B_j, exact via 5-point Gauss-Legendre per knot span.
    const Matrix& gram() const { return gram_; }
    /// int_0^1 B_b(u) du per basis function.
    const Vector& integrals() const { return integrals_; }
    /// Greville abscissae: coefficients linear in these sites represent
    /// exactly linear functions.
    Vector greville_sites() const;

    /// D^T D for the difference penalty of spec().penalty_order, with
    /// divided differences over the Greville sites so the null space is the
    /// degree penalty_order - 1 polynomials.
    Matrix penalty() const;

private:
    BasisSpec spec_;
    std::vector<double> knots_; // clamped knot vector of length dimension + 4
    Matrix gram_;
    Vector integrals_;
};

} // namespace lph

#endif
