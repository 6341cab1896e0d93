#ifndef LPH_PHASE_TYPE_HPP
#define LPH_PHASE_TYPE_HPP

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "lph/linalg.hpp"

namespace lph {

/// Distribution of the absorption time of a finite absorbing Markov chain,
/// represented by a substochastic start vector alpha over the m transient
/// states and the m x m subgenerator T.  sum(alpha) < 1 puts an atom at
/// zero (immediate absorption).  Immutable once constructed.
class PhaseType {
public:
    /// Validates the representation: alpha >= 0 with sum <= 1, negative
    /// diagonal, nonnegative off-diagonal, nonpositive row sums, invertible
    /// subgenerator.  Violations throw construction_error naming the
    /// condition.  Entries within tol::entry_slack below zero are clamped.
    PhaseType(Vector alpha, Matrix subgenerator);

    int order() const { return static_cast<int>(alpha_.size()); }
    const Vector& alpha() const { return alpha_; }
    const Matrix& subgenerator() const { return T_; }
    /// Exit rate vector T0 = -T e.
    const Vector& exit_rates() const { return exit_; }
    double alpha_sum() const { return alpha_sum_; }

    /// R(x) = P{X > x} = alpha e^{Tx} e, x >= 0.
    double reliability(double x) const;
    /// f(x) = alpha e^{Tx} T0, x >= 0.
    double density(double x) const;
    /// P{X <= x}; zero for x < 0.
    double cdf(double x) const;
    /// E[X^n] = (-1)^n n! alpha T^{-n} e, via repeated solves.
    double moment(int n) const;
    double mean() const { return moment(1); }
    double variance() const;

    /// gamma * X for gamma > 0: representation (alpha, T / gamma).
    PhaseType scaled_by(double gamma) const;

    /// n absorption times of the underlying chain, deterministic in seed.
    /// Starts in the absorbing state (draw = 0) with probability
    /// 1 - sum(alpha).
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    /// {"alpha": [...], "T": [[...]]}
    nlohmann::json to_json() const;
    static PhaseType from_json(const nlohmann::json& j);

private:
    Vector alpha_;
    Matrix T_;
    Vector exit_;
    double alpha_sum_ = 0.0;
};

/// Distribution of the sum of independent phase-type variables: start vector
/// (alpha_1, 0) and the block upper-bidiagonal subgenerator with diagonal
/// blocks T_i and super-diagonal blocks T_i^0 (x) alpha_{i+1}.
PhaseType sum_of(const std::vector<PhaseType>& parts);

} // namespace lph

#endif
