#include "doctest.h"

#include "lph/phase_type.hpp"
#include "oracles.hpp"

#include <nlohmann/json.hpp>

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

PhaseType hypoexp12() { // stages with rates 1 then 2
    Vector a(2);
    a << 1.0, 0.0;
    Matrix t(2, 2);
    t << -1.0, 1.0, 0.0, -2.0;
    return PhaseType(a, t);
}

} // namespace

TEST_CASE("construction accepts valid representations") {
    CHECK_NOTHROW(exponential(1.0));
    CHECK_NOTHROW(hypoexp12());
    const PhaseType d = hypoexp12();
    CHECK(d.exit_rates()(0) == doctest::Approx(0.0));
    CHECK(d.exit_rates()(1) == doctest::Approx(2.0));
    CHECK(d.alpha_sum() == doctest::Approx(1.0));
}

TEST_CASE("construction rejects invariant violations by name") {
    Matrix t(2, 2);
    t << -1.0, 1.0, 0.0, -2.0;

    Vector heavy(2);
    heavy << 0.5, 0.6;
    CHECK_THROWS_WITH_AS(PhaseType(heavy, t), doctest::Contains("exceeds one"),
                         construction_error);

    Vector negative(2);
    negative << 1.1, -0.1;
    CHECK_THROWS_WITH_AS(PhaseType(negative, t), doctest::Contains("negative entry"),
                         construction_error);

    Vector ok(2);
    ok << 0.7, 0.3;
    Matrix posdiag = t;
    posdiag(0, 0) = 0.5;
    CHECK_THROWS_WITH_AS(PhaseType(ok, posdiag), doctest::Contains("diagonal"),
                         construction_error);

    Matrix negoff = t;
    negoff(0, 1) = -0.5;
    CHECK_THROWS_WITH_AS(PhaseType(ok, negoff), doctest::Contains("off-diagonal"),
                         construction_error);

    Matrix possum = t;
    possum(0, 1) = 2.0; // row sum +1
    CHECK_THROWS_WITH_AS(PhaseType(ok, possum), doctest::Contains("positive sum"),
                         construction_error);

    Matrix singular(2, 2);
    singular << -1.0, 1.0, 1.0, -1.0; // conservative rows, rank 1
    CHECK_THROWS_WITH_AS(PhaseType(ok, singular), doctest::Contains("invertible"),
                         construction_error);

    CHECK_THROWS_AS(PhaseType(ok, Matrix::Zero(3, 3)), dimension_error);
}

TEST_CASE("reliability closed forms") {
    const PhaseType e1 = exponential(1.0);
    CHECK(e1.reliability(0.0) == doctest::Approx(1.0));
    CHECK(e1.reliability(1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-12));

    const PhaseType erl = erlang(2, 1.0);
    CHECK(erl.reliability(1.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));

    CHECK_THROWS_AS(e1.reliability(-0.5), domain_error);
}

TEST_CASE("reliability is non-increasing and vanishes far out") {
    Rng rng(5);
    const PhaseType d(oracles::random_alpha(rng, 3), oracles::random_subgenerator(rng, 3));
    double prev = 1.0 + 1e-15;
    for (double x = 0.0; x <= 10.0; x += 0.25) {
        const double r = d.reliability(x);
        CHECK(r <= prev + 1e-12);
        prev = r;
    }
    CHECK(d.reliability(50.0 * d.mean()) < 1e-8);
}

TEST_CASE("density closed forms") {
    CHECK(exponential(2.0).density(0.0) == doctest::Approx(2.0));
    CHECK(exponential(1.0).density(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    const double expected = 2.0 * (std::exp(-1.0) - std::exp(-2.0));
    CHECK(hypoexp12().density(1.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(hypoexp12().density(-1e-9), domain_error);
}

TEST_CASE("density integrates to the start mass") {
    Rng rng(6);
    Vector alpha = oracles::random_alpha(rng, 3, /*stochastic=*/false);
    const PhaseType d(alpha, oracles::random_subgenerator(rng, 3));
    const double horizon = 40.0 * d.mean();
    const double mass =
        oracles::simpson([&](double x) { return d.density(x); }, 0.0, horizon, 4000);
    CHECK(mass + d.reliability(horizon) == doctest::Approx(d.alpha_sum()).epsilon(1e-6));
}

TEST_CASE("moments match closed-form Erlang values") {
    CHECK(exponential(1.0).moment(1) == doctest::Approx(1.0).epsilon(1e-12));
    const PhaseType erl = erlang(2, 1.0);
    CHECK(erl.moment(1) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(erl.moment(2) == doctest::Approx(6.0).epsilon(1e-10));
    CHECK(erl.variance() == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_THROWS_AS(erl.moment(0), argument_error);
}

TEST_CASE("sum of one part is returned unchanged") {
    const PhaseType d = hypoexp12();
    const PhaseType s = sum_of(std::vector<PhaseType>{d});
    CHECK((s.alpha() - d.alpha()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.subgenerator() - d.subgenerator()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sum of two exponentials matches the closed-form convolution") {
    const PhaseType s = sum_of({exponential(1.0), exponential(2.0)});
    CHECK(s.order() == 2);
    for (int i = 0; i <= 200; ++i) {
        const double x = 8.0 * i / 200.0;
        const double expected = 2.0 * (std::exp(-x) - std::exp(-2.0 * x));
        CHECK(std::abs(s.density(x) - expected) < 1e-10);
    }
}

TEST_CASE("sum of three exponentials matches a quadrature convolution oracle") {
    const PhaseType s = sum_of({exponential(1.0), exponential(2.0), exponential(3.0)});
    const auto f12 = [](double x) {
        return oracles::conv2_pdf([](double u) { return oracles::exp_pdf(1.0, u); },
                                  [](double u) { return oracles::exp_pdf(2.0, u); }, x, 600);
    };
    for (double x : {0.5, 1.0, 2.0, 4.0}) {
        const double expected = oracles::conv2_pdf(
            f12, [](double u) { return oracles::exp_pdf(3.0, u); }, x, 600);
        CHECK(std::abs(s.density(x) - expected) < 1e-6);
    }
}

TEST_CASE("sum handles substochastic parts and empty input") {
    CHECK_THROWS_AS(sum_of(std::vector<PhaseType>{}), argument_error);
    Rng rng(7);
    std::vector<PhaseType> parts;
    for (int i = 0; i < 3; ++i)
        parts.emplace_back(oracles::random_alpha(rng, 2 + i % 2, false),
                           oracles::random_subgenerator(rng, 2 + i % 2));
    CHECK_NOTHROW(sum_of(parts));
}

TEST_CASE("linearity of expectation for sums of stochastic parts") {
    Rng rng(8);
    std::vector<PhaseType> parts;
    double expected = 0.0;
    for (int i = 0; i < 3; ++i) {
        parts.emplace_back(oracles::random_alpha(rng, 2), oracles::random_subgenerator(rng, 2));
        expected += parts.back().moment(1);
    }
    CHECK(sum_of(parts).moment(1) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("scaling rewrites the subgenerator and matches the survival identity") {
    const PhaseType e1 = exponential(1.0);
    const PhaseType same = e1.scaled_by(1.0);
    CHECK(same.subgenerator()(0, 0) == doctest::Approx(-1.0));

    const PhaseType slow = e1.scaled_by(2.0); // Exp(1/2)
    CHECK(slow.reliability(2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    Rng rng(9);
    const PhaseType d(oracles::random_alpha(rng, 3), oracles::random_subgenerator(rng, 3));
    const PhaseType scaled = d.scaled_by(3.0);
    for (int i = 0; i < 50; ++i) {
        const double t = 0.1 + 0.3 * i;
        CHECK(scaled.reliability(t) == doctest::Approx(d.reliability(t / 3.0)).epsilon(1e-12));
    }
    CHECK(scaled.moment(1) == doctest::Approx(3.0 * d.moment(1)).epsilon(1e-10));
    CHECK_THROWS_AS(d.scaled_by(0.0), domain_error);
    CHECK_THROWS_AS(d.scaled_by(-1.0), domain_error);
}

TEST_CASE("sampling is seed-deterministic and matches the law") {
    const PhaseType e1 = exponential(1.0);
    const auto s1 = e1.sample(1000, 123);
    const auto s2 = e1.sample(1000, 123);
    CHECK(s1 == s2);

    const auto big = e1.sample(1000000, 77);
    CHECK(std::abs(oracles::mean_of(big) - 1.0) < 4e-3);

    const PhaseType erl = erlang(2, 1.0);
    const auto draws = erl.sample(1000000, 78);
    CHECK(oracles::variance_of(draws) == doctest::Approx(2.0).epsilon(0.01));

    // asymptotic 1% Kolmogorov band
    const auto med = erl.sample(100000, 79);
    const double d =
        oracles::ks_distance(med, [&](double x) { return oracles::erlang_cdf(2, 1.0, x); });
    CHECK(d < 1.63 / std::sqrt(100000.0));
}

TEST_CASE("start mass below one yields an atom of immediate absorptions") {
    Vector a(1);
    a << 0.0;
    Matrix t(1, 1);
    t << -1.0;
    const PhaseType degenerate(a, t);
    for (double x : degenerate.sample(50, 3)) CHECK(x == 0.0);

    Vector half(1);
    half << 0.5;
    const PhaseType atom(half, t);
    const auto draws = atom.sample(100000, 4);
    std::size_t zeros = 0;
    for (double x : draws) zeros += (x == 0.0);
    CHECK(static_cast<double>(zeros) / draws.size() == doctest::Approx(0.5).epsilon(0.02));
    CHECK(atom.reliability(0.0) == doctest::Approx(0.5));
}

TEST_CASE("JSON round trip uses the fixed field names") {
    const PhaseType d = hypoexp12();
    const nlohmann::json j = d.to_json();
    CHECK(j.contains("alpha"));
    CHECK(j.contains("T"));
    const PhaseType back = PhaseType::from_json(j);
    CHECK((back.alpha() - d.alpha()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.subgenerator() - d.subgenerator()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(PhaseType::from_json(nlohmann::json{{"alpha", {1.0}}}), io_error);
}
