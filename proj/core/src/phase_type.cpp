#include "lph/phase_type.hpp"

#include <algorithm>
#include <cmath>

#include "lph/rng.hpp"
#include "lph/serialize.hpp"

namespace lph {

PhaseType::PhaseType(Vector alpha, Matrix subgenerator)
    : alpha_(std::move(alpha)), T_(std::move(subgenerator)) {
    const Eigen::Index m = alpha_.size();
    if (m == 0)
        throw dimension_error("PhaseType: empty representation");
    if (T_.rows() != m || T_.cols() != m)
        throw dimension_error("PhaseType: alpha has length " + std::to_string(m) +
                              " but T is " + std::to_string(T_.rows()) + "x" +
                              std::to_string(T_.cols()));
    if (!alpha_.allFinite() || !T_.allFinite())
        throw construction_error("PhaseType: non-finite entries in representation");

    for (Eigen::Index i = 0; i < m; ++i) {
        if (alpha_(i) < -tol::entry_slack)
            throw construction_error("PhaseType: alpha has a negative entry at index " +
                                     std::to_string(i));
        alpha_(i) = std::max(alpha_(i), 0.0);
    }
    alpha_sum_ = alpha_.sum();
    if (alpha_sum_ > 1.0 + tol::stochastic_slack)
        throw construction_error("PhaseType: sum(alpha) = " + std::to_string(alpha_sum_) +
                                 " exceeds one");

    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(T_(i, i) < 0.0))
            throw construction_error("PhaseType: diagonal entry T(" + std::to_string(i) + "," +
                                     std::to_string(i) + ") must be negative");
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) continue;
            if (T_(i, j) < -tol::entry_slack)
                throw construction_error("PhaseType: off-diagonal entry T(" + std::to_string(i) +
                                         "," + std::to_string(j) + ") is negative");
            T_(i, j) = std::max(T_(i, j), 0.0);
        }
        if (T_.row(i).sum() > tol::row_sum_slack)
            throw construction_error("PhaseType: row " + std::to_string(i) +
                                     " of T has positive sum");
    }

    exit_ = -T_ * Vector::Ones(m);
    for (Eigen::Index i = 0; i < m; ++i) exit_(i) = std::max(exit_(i), 0.0);

    try {
        (void)solve(T_, Vector(Vector::Ones(m)));
    } catch (const singular_error& e) {
        throw construction_error(std::string("PhaseType: subgenerator is not invertible: ") +
                                 e.what());
    }
}

double PhaseType::reliability(double x) const {
    if (x < 0.0)
        throw domain_error("reliability: x must be nonnegative");
    const double r = alpha_.dot(mat_exp(T_, x) * Vector::Ones(order()));
    return std::clamp(r, 0.0, 1.0);
}

double PhaseType::density(double x) const {
    if (x < 0.0)
        throw domain_error("density: x must be nonnegative");
    const double f = alpha_.dot(mat_exp(T_, x) * exit_);
    return std::max(f, 0.0);
}

double PhaseType::cdf(double x) const {
    if (x < 0.0) return 0.0;
    return 1.0 - reliability(x);
}

double PhaseType::moment(int n) const {
    if (n < 1)
        throw argument_error("moment: order must be at least 1");
    Vector v = Vector::Ones(order());
    double factor = 1.0;
    for (int k = 1; k <= n; ++k) {
        v = solve(T_, v);
        factor *= -static_cast<double>(k);
    }
    return factor * alpha_.dot(v);
}

double PhaseType::variance() const {
    const double m1 = moment(1);
    return moment(2) - m1 * m1;
}

PhaseType PhaseType::scaled_by(double gamma) const {
    if (!(gamma > 0.0))
        throw domain_error("scaled_by: gamma must be positive");
    return PhaseType(alpha_, T_ / gamma);
}

std::vector<double> PhaseType::sample(std::size_t n, std::uint64_t seed) const {
    if (n < 1)
        throw argument_error("sample: need at least one draw");
    const int m = order();
    std::vector<double> out;
    out.reserve(n);
    Rng rng(seed);
    for (std::size_t k = 0; k < n; ++k) {
        double u = rng.uniform();
        int state = -1;
        for (int i = 0; i < m; ++i) {
            if (u < alpha_(i)) { state = i; break; }
            u -= alpha_(i);
        }
        double t = 0.0;
        while (state >= 0) {
            const double rate = -T_(state, state);
            t += rng.exponential(rate);
            double v = rng.uniform() * rate;
            int next = -1; // absorption unless a jump wins
            for (int j = 0; j < m; ++j) {
                if (j == state) continue;
                if (v < T_(state, j)) { next = j; break; }
                v -= T_(state, j);
            }
            state = next;
        }
        out.push_back(t);
    }
    return out;
}

nlohmann::json PhaseType::to_json() const {
    return {{"alpha", vector_to_json(alpha_)}, {"T", matrix_to_json(T_)}};
}

PhaseType PhaseType::from_json(const nlohmann::json& j) {
    if (!j.contains("alpha") || !j.contains("T"))
        throw io_error("PhaseType JSON must contain fields 'alpha' and 'T'");
    return PhaseType(json_to_vector(j["alpha"]), json_to_matrix(j["T"]));
}

PhaseType sum_of(const std::vector<PhaseType>& parts) {
    if (parts.empty())
        throw argument_error("sum_of: empty list of phase-type parts");
    if (parts.size() == 1)
        return parts.front();

    Eigen::Index total = 0;
    for (const auto& p : parts) total += p.order();

    Vector rho = Vector::Zero(total);
    rho.head(parts.front().order()) = parts.front().alpha();

    Matrix L = Matrix::Zero(total, total);
    Eigen::Index offset = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Eigen::Index mi = parts[i].order();
        L.block(offset, offset, mi, mi) = parts[i].subgenerator();
        if (i + 1 < parts.size()) {
            const Eigen::Index mn = parts[i + 1].order();
            // T_i^0 (x) alpha_{i+1}: column vector times row vector.
            L.block(offset, offset + mi, mi, mn) =
                kron(parts[i].exit_rates(), parts[i + 1].alpha().transpose());
        }
        offset += mi;
    }
    return PhaseType(std::move(rho), std::move(L));
}

} // namespace lph
