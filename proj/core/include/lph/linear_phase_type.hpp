#ifndef LPH_LINEAR_PHASE_TYPE_HPP
#define LPH_LINEAR_PHASE_TYPE_HPP

#include <vector>

#include "lph/phase_type.hpp"

namespace lph {

/// Law of a variable X such that Y = a + bX is phase-type, b != 0.  The
/// interchange representation is the 4-tuple (a, b, beta, S) with
/// beta = alpha e^{Ta} and S = bT; internally the canonical (alpha, T, a, b)
/// is stored and every quantity is evaluated through the underlying
/// phase-type law plus the affine change of variables.  The support boundary
/// is -a/b: X lives above it for b > 0 and below it for b < 0.
class LinearPhaseType {
public:
    LinearPhaseType(PhaseType underlying, double a, double b);

    /// Recovers alpha = beta e^{-Ta}, T = S/b and validates.
    static LinearPhaseType from_representation(double a, double b, const Vector& beta,
                                               const Matrix& S);

    double a() const { return a_; }
    double b() const { return b_; }
    const PhaseType& underlying() const { return ph_; }
    /// beta = alpha e^{Ta}, computed on demand: for stiff subgenerators and
    /// negative a the 4-tuple entries can exceed floating-point range even
    /// though the law itself evaluates fine through the canonical form.
    Vector beta() const;
    Matrix S() const { return b_ * ph_.subgenerator(); }
    /// S0 = -S e = b T0.
    Vector exit() const { return b_ * ph_.exit_rates(); }
    double support_boundary() const { return -a_ / b_; }

    double reliability(double x) const;
    double cdf(double x) const { return 1.0 - reliability(x); }
    /// |b| f_Y(a + bx) on the support side of -a/b, zero elsewhere.
    double density(double x) const;

    /// Moment-generating function of the absolutely continuous part,
    /// e^{-ta/b} alpha (-(T + (t/b)I))^{-1} T0; equals sum(alpha) at t = 0.
    /// Arguments outside the convergence region throw divergence_error.
    double mgf(double t) const;

    /// E[X^n] for n in {1, 2} through the affine transform of the
    /// underlying phase-type moments.
    double moment(int n) const;
    double mean() const { return moment(1); }
    double variance() const;

    /// gamma X for gamma != 0: representation (|gamma| a, b sgn(gamma),
    /// beta, S / gamma).
    LinearPhaseType scaled_by(double gamma) const;
    /// X + c: representation (a - bc, b, alpha e^{T(a-bc)}, S).
    LinearPhaseType shifted_by(double c) const;

    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    /// {"a": , "b": , "beta": [...], "S": [[...]]}
    nlohmann::json to_json() const;
    static LinearPhaseType from_json(const nlohmann::json& j);

private:
    double a_;
    double b_;
    PhaseType ph_;
};

/// Sum of independent parts sharing the same slope b (within
/// tol::slope_match): representation (sum a_i, b, rho e^{L sum a_i}, b L)
/// built on the phase-type sum (rho, L).
LinearPhaseType sum_of(const std::vector<LinearPhaseType>& parts);

/// One-dimensional law of a truncated expansion at a fixed point t: the
/// weighted score sum plus the mean.
struct ProcessPointLaw {
    double t;
    double mean_shift;       // mu(t), already folded into rep
    LinearPhaseType rep;     // law of X(t) itself
    std::vector<int> dropped; // components with |f_j(t)| < tol::zero_weight

    nlohmann::json to_json() const;
};

/// Builds the law of mu(t) + sum_j f_j(t) xi_j.  Each weighted component is
/// rescaled (scaled_by) and the parts summed (sum_of); zero-weight
/// components are dropped and recorded.  Requires every score's slope to
/// align with sign(f_j(t)) so the rescaled parts share one slope; mismatches
/// throw slope_error.
ProcessPointLaw process_point_law(const std::vector<LinearPhaseType>& scores,
                                  const std::vector<double>& eigenfunctions_at_t,
                                  double mean_at_t, double t);

} // namespace lph

#endif
