#include "lph/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace lph {

namespace {
constexpr int kOrder = 4; // cubic

// 5-point Gauss-Legendre on [-1, 1]; exact for degree <= 9, enough for
// products of cubics.
constexpr double kGaussNode[5] = {-0.906179845938664, -0.5384693101056831, 0.0,
                                  0.5384693101056831, 0.906179845938664};
constexpr double kGaussWeight[5] = {0.23692688505618908, 0.47862867049936647,
                                    0.5688888888888889, 0.47862867049936647,
                                    0.23692688505618908};
} // namespace

void BasisSpec::validate() const {
    if (interior_knots < 0)
        throw construction_error("BasisSpec: interior knot count must be nonnegative");
    if (dimension != interior_knots + kOrder)
        throw construction_error("BasisSpec: dimension " + std::to_string(dimension) +
                                 " does not equal interior knots + 4 (= " +
                                 std::to_string(interior_knots + kOrder) + ")");
    if (penalty_lambda < 0.0)
        throw construction_error("BasisSpec: penalty_lambda must be nonnegative");
    if (penalty_order < 1 || penalty_order >= dimension)
        throw construction_error("BasisSpec: penalty_order out of range");
}

nlohmann::json BasisSpec::to_json() const {
    return {{"kind", "cubic-bspline"},
            {"dimension", dimension},
            {"interior_knots", interior_knots},
            {"penalty_lambda", penalty_lambda},
            {"penalty_order", penalty_order}};
}

BasisSpec BasisSpec::from_json(const nlohmann::json& j) {
    BasisSpec s;
    s.dimension = j.value("dimension", s.dimension);
    s.interior_knots = j.value("interior_knots", s.interior_knots);
    s.penalty_lambda = j.value("penalty_lambda", s.penalty_lambda);
    s.penalty_order = j.value("penalty_order", s.penalty_order);
    s.validate();
    return s;
}

BSplineBasis::BSplineBasis(const BasisSpec& spec) : spec_(spec) {
    spec_.validate();
    const int k = spec_.interior_knots;
    knots_.reserve(k + 2 * kOrder);
    for (int i = 0; i < kOrder; ++i) knots_.push_back(0.0);
    for (int i = 1; i <= k; ++i) knots_.push_back(static_cast<double>(i) / (k + 1));
    for (int i = 0; i < kOrder; ++i) knots_.push_back(1.0);

    // Gram matrix and basis integrals, span by span.
    const int p = spec_.dimension;
    gram_ = Matrix::Zero(p, p);
    integrals_ = Vector::Zero(p);
    const int spans = k + 1;
    for (int s = 0; s < spans; ++s) {
        const double lo = static_cast<double>(s) / spans;
        const double hi = static_cast<double>(s + 1) / spans;
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (int g = 0; g < 5; ++g) {
            const double u = mid + half * kGaussNode[g];
            const double w = half * kGaussWeight[g];
            const Vector bu = eval_all(u);
            gram_.noalias() += w * bu * bu.transpose();
            integrals_ += w * bu;
        }
    }
}

Vector BSplineBasis::eval_all(double u) const {
    if (u < 0.0 || u > 1.0)
        throw domain_error("BSplineBasis: abscissa " + std::to_string(u) +
                           " outside [0, 1]");
    const int k = spec_.interior_knots;
    const int spans = k + 1;
    // Index of the knot interval [t_span, t_{span+1}) containing u.
    int span = std::min(static_cast<int>(u * spans), spans - 1) + kOrder - 1;

    // Cox-de Boor recursion for the kOrder nonzero values at u.
    double vals[kOrder] = {1.0, 0.0, 0.0, 0.0};
    double left[kOrder], right[kOrder];
    for (int j = 1; j < kOrder; ++j) {
        left[j] = u - knots_[span + 1 - j];
        right[j] = knots_[span + j] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = vals[r] / (right[r + 1] + left[j - r]);
            vals[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        vals[j] = saved;
    }

    Vector out = Vector::Zero(spec_.dimension);
    for (int j = 0; j < kOrder; ++j) out(span - kOrder + 1 + j) = vals[j];
    return out;
}

double BSplineBasis::eval_coefs(const Vector& coefs, double u) const {
    if (coefs.size() != spec_.dimension)
        throw dimension_error("BSplineBasis: coefficient vector has wrong length");
    return coefs.dot(eval_all(u));
}

Matrix BSplineBasis::design(const std::vector<double>& u) const {
    Matrix d(static_cast<Eigen::Index>(u.size()), spec_.dimension);
    for (std::size_t i = 0; i < u.size(); ++i)
        d.row(static_cast<Eigen::Index>(i)) = eval_all(u[i]).transpose();
    return d;
}

Vector BSplineBasis::greville_sites() const {
    Vector g(spec_.dimension);
    for (int b = 0; b < spec_.dimension; ++b)
        g(b) = (knots_[b + 1] + knots_[b + 2] + knots_[b + 3]) / 3.0;
    return g;
}

Matrix BSplineBasis::penalty() const {
    const int p = spec_.dimension;
    const int d = spec_.penalty_order;
    // Divided differences on the Greville abscissae, normalized so rows over
    // equally spaced sites reduce to plain binomial differences.  On clamped
    // knot vectors the boundary sites are unequally spaced; plain differences
    // there would leave a null space that is not polynomial in u, and the
    // heavy-penalty limit would miss the least-squares polynomial.
    const Vector greville = greville_sites();
    const double h = 1.0 / (spec_.interior_knots + 1);

    Matrix diff = Matrix::Identity(p, p);
    for (int step = 1; step <= d; ++step) {
        const Eigen::Index rows = diff.rows() - 1;
        Matrix next(rows, p);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double gap = greville(i + step) - greville(i);
            next.row(i) = (diff.row(i + 1) - diff.row(i)) * (step * h / gap);
        }
        diff = std::move(next);
    }
    return diff.transpose() * diff;
}

} // namespace lph
