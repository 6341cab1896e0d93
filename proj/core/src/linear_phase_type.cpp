#include "lph/linear_phase_type.hpp"

#include <algorithm>
#include <cmath>

#include "lph/serialize.hpp"

namespace lph {

LinearPhaseType::LinearPhaseType(PhaseType underlying, double a, double b)
    : a_(a), b_(b), ph_(std::move(underlying)) {
    if (b_ == 0.0)
        throw slope_error("LinearPhaseType: slope b must be nonzero");
    if (!std::isfinite(a_) || !std::isfinite(b_))
        throw construction_error("LinearPhaseType: non-finite affine constants");
}

Vector LinearPhaseType::beta() const {
    return (ph_.alpha().transpose() * mat_exp(ph_.subgenerator(), a_)).transpose();
}

LinearPhaseType LinearPhaseType::from_representation(double a, double b, const Vector& beta,
                                                     const Matrix& S) {
    if (b == 0.0)
        throw slope_error("LinearPhaseType: slope b must be nonzero");
    const Matrix T = S / b;
    const Vector alpha = (beta.transpose() * mat_exp(T, -a)).transpose();
    return LinearPhaseType(PhaseType(alpha, T), a, b);
}

double LinearPhaseType::reliability(double x) const {
    const double y = a_ + b_ * x;
    if (b_ > 0.0)
        return y < 0.0 ? 1.0 : ph_.reliability(y);
    return y <= 0.0 ? 0.0 : 1.0 - ph_.reliability(y);
}

double LinearPhaseType::density(double x) const {
    const double y = a_ + b_ * x;
    if (y < 0.0) return 0.0;
    return std::abs(b_) * ph_.density(y);
}

double LinearPhaseType::mgf(double t) const {
    if (!std::isfinite(t))
        throw domain_error("mgf: argument must be finite");
    const int m = ph_.order();
    const double s = t / b_;
    const Matrix neg = -(ph_.subgenerator() + s * Matrix::Identity(m, m));
    Matrix inv;
    try {
        inv = inverse(neg);
    } catch (const singular_error&) {
        throw divergence_error("mgf: argument outside the convergence region");
    }
    // Inside the convergence strip -(T + sI) is a nonsingular M-matrix, so
    // its inverse is entrywise nonnegative; negative entries expose the
    // analytic continuation beyond the strip.
    const double span = inv.cwiseAbs().maxCoeff();
    if (inv.minCoeff() < -1e-10 * span)
        throw divergence_error("mgf: argument outside the convergence region");
    const double part = ph_.alpha().dot(inv * ph_.exit_rates());
    return std::exp(-t * a_ / b_) * part;
}

double LinearPhaseType::moment(int n) const {
    if (n != 1 && n != 2)
        throw argument_error("moment: only orders 1 and 2 are defined for this law");
    const double m1 = ph_.moment(1);
    if (n == 1) return (m1 - a_) / b_;
    const double m2 = ph_.moment(2);
    return (m2 - 2.0 * a_ * m1 + a_ * a_) / (b_ * b_);
}

double LinearPhaseType::variance() const {
    const double m1 = moment(1);
    return moment(2) - m1 * m1;
}

LinearPhaseType LinearPhaseType::scaled_by(double gamma) const {
    if (gamma == 0.0)
        throw slope_error("scaled_by: gamma must be nonzero");
    const double mag = std::abs(gamma);
    const double sign = gamma > 0.0 ? 1.0 : -1.0;
    return LinearPhaseType(PhaseType(ph_.alpha(), ph_.subgenerator() / mag), mag * a_,
                           b_ * sign);
}

LinearPhaseType LinearPhaseType::shifted_by(double c) const {
    return LinearPhaseType(ph_, a_ - b_ * c, b_);
}

std::vector<double> LinearPhaseType::sample(std::size_t n, std::uint64_t seed) const {
    std::vector<double> ys = ph_.sample(n, seed);
    for (double& y : ys) y = (y - a_) / b_;
    return ys;
}

nlohmann::json LinearPhaseType::to_json() const {
    return {{"a", a_}, {"b", b_}, {"beta", vector_to_json(beta())}, {"S", matrix_to_json(S())}};
}

LinearPhaseType LinearPhaseType::from_json(const nlohmann::json& j) {
    for (const char* field : {"a", "b", "beta", "S"})
        if (!j.contains(field))
            throw io_error(std::string("LinearPhaseType JSON must contain field '") + field +
                           "'");
    return from_representation(j["a"].get<double>(), j["b"].get<double>(),
                               json_to_vector(j["beta"]), json_to_matrix(j["S"]));
}

LinearPhaseType sum_of(const std::vector<LinearPhaseType>& parts) {
    if (parts.empty())
        throw argument_error("sum_of: empty list of parts");
    if (parts.size() == 1)
        return parts.front();

    const double b = parts.front().b();
    double a_total = 0.0;
    std::vector<PhaseType> phs;
    phs.reserve(parts.size());
    for (const auto& p : parts) {
        if (std::abs(p.b() - b) > tol::slope_match)
            throw slope_error("sum_of: parts have incompatible slopes " + std::to_string(b) +
                              " and " + std::to_string(p.b()));
        a_total += p.a();
        phs.push_back(p.underlying());
    }
    return LinearPhaseType(sum_of(phs), a_total, b);
}

nlohmann::json ProcessPointLaw::to_json() const {
    return {{"t", t},
            {"mean_shift", mean_shift},
            {"rep", rep.to_json()},
            {"dropped", dropped}};
}

ProcessPointLaw process_point_law(const std::vector<LinearPhaseType>& scores,
                                  const std::vector<double>& eigenfunctions_at_t,
                                  double mean_at_t, double t) {
    if (scores.size() != eigenfunctions_at_t.size())
        throw dimension_error("process_point_law: one weight per score is required");
    if (scores.empty())
        throw argument_error("process_point_law: no score components");
    if (t < 0.0 || t > 1.0)
        throw domain_error("process_point_law: t must lie in [0, 1]");

    std::vector<LinearPhaseType> parts;
    std::vector<int> dropped;
    for (std::size_t j = 0; j < scores.size(); ++j) {
        const double w = eigenfunctions_at_t[j];
        if (std::abs(w) < tol::zero_weight) {
            // Zero weight contributes a point mass at 0; the component is
            // dropped from the sum and recorded.
            dropped.push_back(static_cast<int>(j));
            continue;
        }
        parts.push_back(scores[j].scaled_by(w));
    }
    if (parts.empty())
        throw argument_error(
            "process_point_law: all eigenfunction weights vanish at t; the law is a point "
            "mass at the mean");

    LinearPhaseType total = sum_of(parts).shifted_by(mean_at_t);
    return ProcessPointLaw{t, mean_at_t, std::move(total), std::move(dropped)};
}

} // namespace lph
