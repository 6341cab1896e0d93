#ifndef LPH_EM_FIT_HPP
#define LPH_EM_FIT_HPP

#include <cstdint>
#include <vector>

#include "lph/phase_type.hpp"

namespace lph {

struct EmConfig {
    int phases = 2;          // transient states m >= 1
    int max_iter = 2000;
    double rel_tol = 1e-8;   // relative log-likelihood change
    std::uint64_t seed = 0;
    int restarts = 1;        // independent random initializations, best logL wins

    void validate() const;
};

struct EmTrace {
    std::vector<double> loglik_per_iter; // non-decreasing up to rounding
    int iterations = 0;
    bool converged = false;

    nlohmann::json to_json() const;
};

/// Conditional sufficient-statistic building blocks for one observation:
/// the convolution integral int_0^x e^{Tu} T0 alpha e^{T(x-u)} du (computed
/// as the top-right block of exp([[T, T0 alpha],[0, T]] x)), the start
/// weights alpha^T e^{Tx} and the exit weights e^{Tx} T0.
struct EStepIntegrals {
    Matrix convolution;
    Vector start_weights;
    Vector exit_weights;
};

EStepIntegrals estep_integrals(const PhaseType& ph, double x);

/// sum_i log f(x_i), densities floored at tol::density_floor.
double log_likelihood(const PhaseType& ph, const std::vector<double>& data);

struct EmResult {
    PhaseType model;
    EmTrace trace;
};

/// Maximum-likelihood fit of an m-phase representation with unrestricted
/// subgenerator structure by expectation-maximization.  Initialization is
/// random (Dirichlet-uniform alpha; uniform off-diagonal rates rescaled to
/// the sample mean); cfg.restarts independent starts are run and the model
/// with the best final log-likelihood is returned.  Deterministic given
/// (data, cfg.seed).
EmResult fit_phase_type(const std::vector<double>& data, const EmConfig& cfg);

} // namespace lph

#endif
