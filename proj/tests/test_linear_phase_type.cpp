#include "doctest.h"

#include "lph/em_fit.hpp"
#include "lph/linear_phase_type.hpp"
#include "oracles.hpp"

using namespace lph;

namespace {

PhaseType exponential(double rate) {
    Vector a(1);
    a << 1.0;
    Matrix t(1, 1);
    t << -rate;
    return PhaseType(a, t);
}

PhaseType erlang(int k, double rate) {
    Vector a = Vector::Zero(k);
    a(0) = 1.0;
    Matrix t = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        t(i, i) = -rate;
        if (i + 1 < k) t(i, i + 1) = rate;
    }
    return PhaseType(a, t);
}

// X = (Y - 1) / 2 with Y ~ Exp(1)
LinearPhaseType half_shifted_exp() { return LinearPhaseType(exponential(1.0), 1.0, 2.0); }

} // namespace

TEST_CASE("representation fields follow the 4-tuple definition") {
    const LinearPhaseType same(exponential(1.0), 0.0, 1.0);
    CHECK(same.beta()(0) == doctest::Approx(1.0));
    CHECK(same.S()(0, 0) == doctest::Approx(-1.0));

    const LinearPhaseType big(exponential(1.0), 1.0, 1000.0);
    CHECK(big.beta()(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(big.S()(0, 0) == doctest::Approx(-1000.0));
    CHECK(big.exit()(0) == doctest::Approx(1000.0));
    CHECK(big.support_boundary() == doctest::Approx(-1.0 / 1000.0));

    CHECK_THROWS_AS(LinearPhaseType(exponential(1.0), 0.0, 0.0), slope_error);
}

TEST_CASE("from_representation recovers the canonical form") {
    const LinearPhaseType d = half_shifted_exp();
    const LinearPhaseType back = LinearPhaseType::from_representation(d.a(), d.b(), d.beta(), d.S());
    CHECK((back.underlying().alpha() - d.underlying().alpha()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.underlying().subgenerator() - d.underlying().subgenerator())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("reliability branches on the sign of the slope") {
    const LinearPhaseType d = half_shifted_exp(); // support (-1/2, inf)
    CHECK(d.reliability(-0.5) == doctest::Approx(1.0));
    CHECK(d.reliability(-0.6) == doctest::Approx(1.0));
    CHECK(d.reliability(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    // X = 1 - Y with Y ~ Exp(1): support (-inf, 1)
    const LinearPhaseType flipped(exponential(1.0), 1.0, -1.0);
    CHECK(flipped.reliability(0.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(flipped.reliability(1.0) == doctest::Approx(0.0));
    CHECK(flipped.reliability(1.5) == doctest::Approx(0.0));
}

TEST_CASE("change-of-variables identity against the underlying law") {
    Rng rng(15);
    const PhaseType y(oracles::random_alpha(rng, 3), oracles::random_subgenerator(rng, 3));
    const LinearPhaseType pos(y, 0.8, 2.5);
    const LinearPhaseType neg(y, 0.8, -2.5);
    for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform(-3.0, 3.0);
        const double yy = 0.8 + 2.5 * x;
        if (yy >= 0.0)
            CHECK(pos.reliability(x) == doctest::Approx(y.reliability(yy)).epsilon(1e-12));
        const double yn = 0.8 - 2.5 * x;
        if (yn > 0.0)
            CHECK(neg.reliability(x) ==
                  doctest::Approx(1.0 - y.reliability(yn)).epsilon(1e-12));
    }
}

TEST_CASE("density transforms with the Jacobian and vanishes off the support") {
    const LinearPhaseType d = half_shifted_exp();
    CHECK(d.density(-0.6) == 0.0);
    CHECK(d.density(0.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));

    const LinearPhaseType same(erlang(2, 1.0), 0.0, 1.0);
    const PhaseType raw = erlang(2, 1.0);
    for (double x : {0.0, 0.3, 1.0, 2.5})
        CHECK(std::abs(same.density(x) - raw.density(x)) < 1e-14);
}

TEST_CASE("density integrates to the start mass over the support") {
    Rng rng(16);
    const PhaseType y(oracles::random_alpha(rng, 3), oracles::random_subgenerator(rng, 3));
    const LinearPhaseType d(y, 0.5, -1.7); // support below 0.5/1.7
    const double lo = d.support_boundary() - 60.0 * y.mean() / 1.7;
    const double mass =
        oracles::simpson([&](double x) { return d.density(x); }, lo, d.support_boundary(), 6000);
    CHECK(mass == doctest::Approx(y.alpha_sum()).epsilon(1e-6));
}

TEST_CASE("moment generating function closed form and derivatives") {
    const LinearPhaseType d = half_shifted_exp();
    CHECK(d.mgf(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // e^{-t a / b} * lambda / (lambda - t/b) at t = 0.5
    const double expected = std::exp(-0.25) / (1.0 - 0.25);
    CHECK(d.mgf(0.5) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(d.mgf(0.5) == doctest::Approx(1.0384010440952065).epsilon(1e-10));

    const double h = 1e-4;
    const double second = oracles::central_second_derivative(
        [&](double t) { return d.mgf(t); }, 0.0, h);
    CHECK(std::abs(second - d.moment(2)) / std::abs(d.moment(2)) < 1e-5);
}

TEST_CASE("mgf throws outside the convergence region") {
    const LinearPhaseType same(exponential(1.0), 0.0, 1.0);
    CHECK_NOTHROW(same.mgf(0.9));
    CHECK_THROWS_AS(same.mgf(1.5), divergence_error);
    const LinearPhaseType d = half_shifted_exp(); // t/b beyond the rate of Y
    CHECK_THROWS_AS(d.mgf(2.5), divergence_error);
}

TEST_CASE("first two moments through the affine transform") {
    const LinearPhaseType same(erlang(2, 1.0), 0.0, 1.0);
    CHECK(same.moment(1) == doctest::Approx(erlang(2, 1.0).moment(1)).epsilon(1e-12));

    const LinearPhaseType d(erlang(2, 1.0), 1.0, 2.0); // X = (Y-1)/2
    CHECK(d.mean() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(d.variance() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK_THROWS_AS(d.moment(3), argument_error);
}

TEST_CASE("affine moment identities hold for random laws") {
    Rng rng(17);
    for (int rep = 0; rep < 5; ++rep) {
        const PhaseType y(oracles::random_alpha(rng, 3), oracles::random_subgenerator(rng, 3));
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(0.5, 3.0) * (rep % 2 ? -1.0 : 1.0);
        const LinearPhaseType d(y, a, b);
        CHECK(d.mean() == doctest::Approx((y.mean() - a) / b).epsilon(1e-10));
        CHECK(d.variance() == doctest::Approx(y.variance() / (b * b)).epsilon(1e-10));
    }
}

TEST_CASE("sums require a common slope and add offsets") {
    const LinearPhaseType x1(exponential(1.0), 1.0, 2.0);
    const LinearPhaseType x2(exponential(2.0), 0.5, 2.0);
    const LinearPhaseType s = sum_of(std::vector<LinearPhaseType>{x1, x2});
    CHECK(s.a() == doctest::Approx(1.5));
    CHECK(s.b() == doctest::Approx(2.0));
    CHECK(s.mean() == doctest::Approx(x1.mean() + x2.mean()).epsilon(1e-9));

    const LinearPhaseType single = sum_of(std::vector<LinearPhaseType>{x1});
    CHECK(single.a() == x1.a());

    const LinearPhaseType other(exponential(1.0), 0.0, 3.0);
    CHECK_THROWS_AS(sum_of(std::vector<LinearPhaseType>{x1, other}), slope_error);
    CHECK_THROWS_AS(sum_of(std::vector<LinearPhaseType>{}), argument_error);
}

TEST_CASE("sum law matches a Monte-Carlo oracle") {
    const LinearPhaseType x1(exponential(1.0), 1.0, 2.0);
    const LinearPhaseType x2(exponential(2.0), 0.5, 2.0);
    const LinearPhaseType s = sum_of(std::vector<LinearPhaseType>{x1, x2});

    const std::size_t n = 100000;
    auto d1 = x1.sample(n, 500);
    const auto d2 = x2.sample(n, 501);
    for (std::size_t i = 0; i < n; ++i) d1[i] += d2[i];
    const double d = oracles::ks_distance(d1, [&](double x) { return s.cdf(x); });
    CHECK(d < 0.01);
}

TEST_CASE("homothecy follows the scaled 4-tuple exactly") {
    const LinearPhaseType d = half_shifted_exp();

    const LinearPhaseType same = d.scaled_by(1.0);
    CHECK(same.a() == doctest::Approx(d.a()));
    CHECK(same.b() == doctest::Approx(d.b()));

    for (double gamma : {2.0, -1.0, -0.4}) {
        const LinearPhaseType g = d.scaled_by(gamma);
        CHECK(g.a() == doctest::Approx(std::abs(gamma) * d.a()).epsilon(1e-14));
        CHECK(g.b() == doctest::Approx(d.b() * (gamma > 0 ? 1.0 : -1.0)).epsilon(1e-14));
        CHECK((g.beta() - d.beta()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((g.S() - Matrix(d.S() / gamma)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(g.mean() == doctest::Approx(gamma * d.mean()).epsilon(1e-10));
    }

    // reflection: P(-X > 0) = P(X < 0) = P(Y < 1)
    const LinearPhaseType neg = d.scaled_by(-1.0);
    CHECK(neg.reliability(0.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(d.scaled_by(0.0), slope_error);
}

TEST_CASE("scaled laws match Monte Carlo") {
    Rng rng(18);
    const PhaseType y(oracles::random_alpha(rng, 2), oracles::random_subgenerator(rng, 2));
    const LinearPhaseType d(y, 1.0, 4.0);
    for (double gamma : {2.0, -2.0}) {
        const LinearPhaseType g = d.scaled_by(gamma);
        auto draws = d.sample(100000, 600 + static_cast<int>(gamma));
        for (double& v : draws) v *= gamma;
        CHECK(oracles::ks_distance(draws, [&](double x) { return g.cdf(x); }) < 0.01);
    }
}

TEST_CASE("shifting keeps the underlying variable") {
    const LinearPhaseType d = half_shifted_exp();

    const LinearPhaseType same = d.shifted_by(0.0);
    CHECK(same.a() == doctest::Approx(d.a()));

    const LinearPhaseType up = d.shifted_by(0.7);
    CHECK(up.a() == doctest::Approx(d.a() - d.b() * 0.7).epsilon(1e-14));
    CHECK(up.b() == doctest::Approx(d.b()));
    CHECK(up.mean() == doctest::Approx(d.mean() + 0.7).epsilon(1e-12));

    const LinearPhaseType back = up.shifted_by(-0.7);
    for (int i = 0; i < 20; ++i) {
        const double x = -0.5 + 0.2 * i;
        CHECK(back.reliability(x) == doctest::Approx(d.reliability(x)).epsilon(1e-12));
    }
}

TEST_CASE("sampling transforms the underlying draws") {
    const LinearPhaseType d = half_shifted_exp();
    const auto draws = d.sample(200000, 71);
    CHECK(std::abs(oracles::mean_of(draws) - d.mean()) < 0.01);
    CHECK(oracles::ks_distance(draws, [&](double x) { return d.cdf(x); }) < 0.01);
}

TEST_CASE("JSON round trip uses the 4-tuple field names") {
    const LinearPhaseType d = half_shifted_exp();
    const nlohmann::json j = d.to_json();
    for (const char* f : {"a", "b", "beta", "S"}) CHECK(j.contains(f));
    const LinearPhaseType back = LinearPhaseType::from_json(j);
    CHECK(back.a() == doctest::Approx(d.a()));
    CHECK(back.b() == doctest::Approx(d.b()));
    CHECK(back.mean() == doctest::Approx(d.mean()).epsilon(1e-12));
}

TEST_CASE("process point law with a single unit weight is the score law") {
    const LinearPhaseType score = half_shifted_exp();
    const ProcessPointLaw law = process_point_law({score}, {1.0}, 0.0, 0.5);
    CHECK(law.dropped.empty());
    for (double x : {-0.4, 0.0, 0.5, 2.0})
        CHECK(law.rep.reliability(x) == doctest::Approx(score.reliability(x)).epsilon(1e-12));
}

TEST_CASE("process point law reproduces the single-component workflow representation") {
    // Score xi with Y = 1 + 1000 xi, Y a 2-phase law; weight f1, mean mu.
    Vector alpha(2);
    alpha << 0.6, 0.4;
    Matrix T(2, 2);
    T << -2.0, 1.0, 0.5, -3.0;
    const PhaseType y(alpha, T);
    const LinearPhaseType score(y, 1.0, 1000.0);

    for (double f1 : {0.3, -0.3}) {
        const double mu = 0.002;
        const ProcessPointLaw law = process_point_law({score}, {f1}, mu, 0.25);
        const double sgn = f1 > 0 ? 1.0 : -1.0;
        CHECK(law.rep.a() ==
              doctest::Approx(std::abs(f1) - 1000.0 * mu * sgn).epsilon(1e-12));
        CHECK(law.rep.b() == doctest::Approx(1000.0 * sgn));
        const Matrix expected_S = Matrix(1000.0 / f1 * T);
        CHECK((law.rep.S() - expected_S).cwiseAbs().maxCoeff() < 1e-9);
        const Vector expected_beta =
            (alpha.transpose() * mat_exp(T, 1.0 - 1000.0 / f1 * mu)).transpose();
        CHECK((law.rep.beta() - expected_beta).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(law.mean_shift == doctest::Approx(mu));
    }
}

TEST_CASE("process point law drops zero weights and records them") {
    const LinearPhaseType s1(exponential(1.0), 1.0, 10.0);
    const LinearPhaseType s2(exponential(2.0), 0.5, 10.0);
    const ProcessPointLaw law = process_point_law({s1, s2}, {0.8, 0.0}, 0.1, 0.5);
    CHECK(law.dropped == std::vector<int>{1});
    // with the second component dropped the law is the scaled first plus mean
    const LinearPhaseType direct = s1.scaled_by(0.8).shifted_by(0.1);
    for (double x : {-0.2, 0.0, 0.4})
        CHECK(law.rep.reliability(x) == doctest::Approx(direct.reliability(x)).epsilon(1e-12));

    CHECK_THROWS_AS(process_point_law({s1}, {0.0}, 0.0, 0.5), argument_error);
    CHECK_THROWS_AS(process_point_law({s1, s2}, {0.5}, 0.0, 0.5), dimension_error);
    CHECK_THROWS_AS(process_point_law({s1}, {1.0}, 0.0, 1.5), domain_error);
}

TEST_CASE("process point law requires slope alignment with the weight signs") {
    const LinearPhaseType plus(exponential(1.0), 1.0, 10.0);
    const LinearPhaseType also_plus(exponential(2.0), 0.5, 10.0);
    // both slopes +10 but the second weight is negative: scaled slopes differ
    CHECK_THROWS_AS(process_point_law({plus, also_plus}, {0.5, -0.5}, 0.0, 0.5), slope_error);

    const LinearPhaseType minus(exponential(2.0), 0.5, -10.0);
    CHECK_NOTHROW(process_point_law({plus, minus}, {0.5, -0.5}, 0.0, 0.5));
}

TEST_CASE("two-component point law matches Monte Carlo") {
    const LinearPhaseType s1(erlang(2, 3.0), 1.0, 10.0);
    const LinearPhaseType s2(exponential(2.0), 0.5, -10.0);
    const double f1 = 1.0, f2 = -0.7, mu = 0.3, t = 0.5;
    const ProcessPointLaw law = process_point_law({s1, s2}, {f1, f2}, mu, t);

    const std::size_t n = 100000;
    auto d1 = s1.sample(n, 800);
    const auto d2 = s2.sample(n, 801);
    for (std::size_t i = 0; i < n; ++i) d1[i] = mu + f1 * d1[i] + f2 * d2[i];
    CHECK(oracles::ks_distance(d1, [&](double x) { return law.rep.cdf(x); }) < 0.01);
    CHECK(law.rep.mean() == doctest::Approx(mu + f1 * s1.mean() + f2 * s2.mean()).epsilon(1e-9));
}

TEST_CASE("fitted laws approach a shifted target as phases increase") {
    // Sample a shifted Erlang (support above c), fit the positive part with
    // growing phase counts and check the distance never increases beyond fit
    // noise.
    const double c = 0.5;
    Rng rng(90);
    std::vector<double> shifted(400);
    for (double& v : shifted) v = c + rng.exponential(2.0) + rng.exponential(2.0);

    std::vector<double> positive = shifted;
    for (double& v : positive) v -= c;

    double prev = 1.0;
    for (int m : {2, 4, 8}) {
        EmConfig cfg;
        cfg.phases = m;
        cfg.max_iter = 300;
        cfg.restarts = 2;
        cfg.seed = 91;
        const EmResult fit = fit_phase_type(positive, cfg);
        const LinearPhaseType law(fit.model, -c, 1.0); // X = Y + c
        const double d = oracles::ks_distance(shifted, [&](double x) { return law.cdf(x); });
        CHECK(d <= prev + 0.005);
        prev = d;
    }
}
