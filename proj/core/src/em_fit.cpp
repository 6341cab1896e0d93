#include "lph/em_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lph/rng.hpp"
#include "lph/serialize.hpp"

namespace lph {

void EmConfig::validate() const {
    if (phases < 1) throw argument_error("EmConfig: phases must be at least 1");
    if (max_iter < 1) throw argument_error("EmConfig: max_iter must be at least 1");
    if (!(rel_tol > 0.0)) throw argument_error("EmConfig: rel_tol must be positive");
    if (restarts < 1) throw argument_error("EmConfig: restarts must be at least 1");
}

nlohmann::json EmTrace::to_json() const {
    return {{"loglik_per_iter", loglik_per_iter},
            {"iterations", iterations},
            {"converged", converged}};
}

namespace {

struct Rep {
    Vector alpha;
    Matrix T;
    Vector exit; // -T e
};

// Top-right block of exp([[T, exit*alpha^T],[0,T]] x) together with the
// start/exit weight vectors; one augmented exponential per observation.
struct RawIntegrals {
    Matrix conv;
    Vector start;
    Vector exit;
};

RawIntegrals raw_integrals(const Rep& r, double x) {
    const Eigen::Index m = r.alpha.size();
    Matrix aug = Matrix::Zero(2 * m, 2 * m);
    aug.topLeftCorner(m, m) = r.T;
    aug.bottomRightCorner(m, m) = r.T;
    aug.topRightCorner(m, m) = r.exit * r.alpha.transpose();
    const Matrix big = mat_exp(aug, x);
    const Matrix etx = big.topLeftCorner(m, m);
    return {big.topRightCorner(m, m), etx.transpose() * r.alpha, etx * r.exit};
}

struct SuffStats {
    Vector starts;   // expected starts per state
    Vector exits;    // expected absorptions per state
    Vector holding;  // expected total time per state
    Matrix jumps;    // integral weights, jump counts are T(i,j)*jumps(i,j)
    double loglik = 0.0;
};

SuffStats accumulate(const Rep& r, const std::vector<double>& data) {
    const Eigen::Index m = r.alpha.size();
    SuffStats s{Vector::Zero(m), Vector::Zero(m), Vector::Zero(m), Matrix::Zero(m, m), 0.0};
    for (std::size_t k = 0; k < data.size(); ++k) {
        RawIntegrals ri;
        try {
            ri = raw_integrals(r, data[k]);
        } catch (const numeric_error& e) {
            throw fit_error("E-step overflow at observation " + std::to_string(k) + " (x = " +
                            std::to_string(data[k]) + "): " + e.what());
        }
        const double f = r.alpha.dot(ri.exit);
        if (!(f > tol::density_floor) || !ri.conv.allFinite())
            throw fit_error("E-step breakdown at observation " + std::to_string(k) +
                            " (density underflow, x = " + std::to_string(data[k]) + ")");
        s.starts += r.alpha.cwiseProduct(ri.exit) / f;
        s.exits += r.exit.cwiseProduct(ri.start) / f;
        // conv(j,i) = int (alpha e^{Tu})_i (e^{T(x-u)} T0)_j du
        s.jumps += ri.conv.transpose() / f;
        s.loglik += std::log(f);
    }
    s.holding = s.jumps.diagonal();
    return s;
}

// A state whose expected occupancy falls below this fraction of the total
// observed time keeps its previous rate row.  Rowwise the complete-data
// likelihood separates, so retaining a row is an admissible partial M-step
// (generalized EM) and the log-likelihood stays monotone; without the guard
// a redundant state degenerates into an instantaneous transition whose rate
// grows without bound and overflows the exponentials.
constexpr double kFreezeOccupancy = 1e-6;

Rep m_step(const Rep& prev, const SuffStats& s, std::size_t n, double total_time) {
    const Eigen::Index m = prev.alpha.size();
    Rep next{s.starts / static_cast<double>(n), Matrix::Zero(m, m), Vector::Zero(m)};
    for (Eigen::Index i = 0; i < m; ++i) next.alpha(i) = std::max(next.alpha(i), 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double z = s.holding(i);
        if (!(z > kFreezeOccupancy * total_time)) {
            next.T.row(i) = prev.T.row(i);
            next.exit(i) = prev.exit(i);
            continue;
        }
        double total = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) continue;
            // expected jump count is T(i,j) * jumps(i,j), rate = count / time
            const double rate = std::max(prev.T(i, j) * s.jumps(i, j) / z, 0.0);
            next.T(i, j) = rate;
            total += rate;
        }
        const double exit_rate = std::max(s.exits(i) / z, 0.0); // exits already weighted
        next.exit(i) = exit_rate;
        total += exit_rate;
        if (!(total > 1e-290)) { // isolated state, keep previous rates
            next.T.row(i) = prev.T.row(i);
            next.exit(i) = prev.exit(i);
            continue;
        }
        next.T(i, i) = -total;
    }
    return next;
}

Rep random_init(int m, double sample_mean, Rng& rng) {
    Vector alpha(m);
    for (int i = 0; i < m; ++i) alpha(i) = rng.exponential(1.0);
    alpha /= alpha.sum();

    Matrix T = Matrix::Zero(m, m);
    Vector exit(m);
    for (int i = 0; i < m; ++i) {
        double total = 0.0;
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            T(i, j) = rng.uniform();
            total += T(i, j);
        }
        exit(i) = 0.1 + rng.uniform(); // keep absorption reachable
        T(i, i) = -(total + exit(i));
    }
    // Rescale rates so the initial mean matches the sample mean.
    const double mean0 = PhaseType(alpha, T).mean();
    const double c = mean0 / sample_mean;
    T *= c;
    exit *= c;
    return {std::move(alpha), std::move(T), std::move(exit)};
}

struct RunOutcome {
    Rep rep;
    EmTrace trace;
};

RunOutcome run_em(const std::vector<double>& data, const EmConfig& cfg, Rep rep) {
    const double total_time = std::accumulate(data.begin(), data.end(), 0.0);
    EmTrace trace;
    SuffStats s = accumulate(rep, data); // log-likelihood of the initialization
    trace.loglik_per_iter.push_back(s.loglik);
    for (int it = 0; it < cfg.max_iter; ++it) {
        rep = m_step(rep, s, data.size(), total_time);
        SuffStats next = accumulate(rep, data);
        trace.loglik_per_iter.push_back(next.loglik);
        trace.iterations = it + 1;
        const bool settled =
            std::abs(next.loglik - s.loglik) < cfg.rel_tol * (std::abs(s.loglik) + 1.0);
        s = std::move(next);
        if (settled) {
            trace.converged = true;
            break;
        }
    }
    return {std::move(rep), std::move(trace)};
}

} // namespace

EStepIntegrals estep_integrals(const PhaseType& ph, double x) {
    if (x < 0.0)
        throw domain_error("estep_integrals: x must be nonnegative");
    RawIntegrals ri = raw_integrals({ph.alpha(), ph.subgenerator(), ph.exit_rates()}, x);
    return {std::move(ri.conv), std::move(ri.start), std::move(ri.exit)};
}

double log_likelihood(const PhaseType& ph, const std::vector<double>& data) {
    if (data.empty())
        throw argument_error("log_likelihood: empty data");
    double ll = 0.0;
    for (double x : data) ll += std::log(std::max(ph.density(x), tol::density_floor));
    return ll;
}

EmResult fit_phase_type(const std::vector<double>& data, const EmConfig& cfg) {
    cfg.validate();
    for (std::size_t i = 0; i < data.size(); ++i)
        if (!(data[i] > 0.0))
            throw domain_error("fit_phase_type: observation " + std::to_string(i) +
                               " is not strictly positive");
    if (data.size() < static_cast<std::size_t>(cfg.phases) + 1)
        throw argument_error("fit_phase_type: need at least phases + 1 observations");

    const double sample_mean =
        std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());

    RunOutcome best;
    bool have_best = false;
    std::string last_failure;
    for (int r = 0; r < cfg.restarts; ++r) {
        Rng rng = Rng::derived(cfg.seed, static_cast<std::uint64_t>(r));
        RunOutcome out;
        try {
            out = run_em(data, cfg, random_init(cfg.phases, sample_mean, rng));
            (void)PhaseType(out.rep.alpha, out.rep.T); // reject degenerate end states
        } catch (const error& e) {
            last_failure = e.what(); // discard the broken restart
            continue;
        }
        if (!have_best ||
            out.trace.loglik_per_iter.back() > best.trace.loglik_per_iter.back()) {
            best = std::move(out);
            have_best = true;
        }
    }
    if (!have_best)
        throw fit_error("fit_phase_type: every restart failed; last diagnostic: " +
                        last_failure);
    return {PhaseType(best.rep.alpha, best.rep.T), std::move(best.trace)};
}

} // namespace lph
