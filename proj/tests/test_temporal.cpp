#include <doctest.h>

#include <cmath>

#include "fxmf/mfdfa.hpp"
#include "fxmf/rng.hpp"
#include "fxmf/synth.hpp"
#include "fxmf/temporal.hpp"
#include "oracles.hpp"

using namespace fxmf;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    return x;
}

AutocorrResult ac_of(const std::vector<double>& x, std::size_t max_lag) {
    return autocorrelation(std::span<const double>(x), max_lag);
}

}  // namespace

TEST_CASE("autocorrelation equals the double loop") {
    for (std::size_t n : {200u, 4096u, 10000u}) {
        auto x = noise(n, n);
        for (std::size_t i = 1; i < n; ++i) x[i] += 0.6 * x[i - 1];  // some structure
        const std::size_t L = n / 10 - 1;
        const auto fast = ac_of(x, L);
        const auto slow = oracle::naive_acf(x, L);
        double worst = 0.0;
        for (std::size_t t = 0; t <= L; ++t) worst = std::max(worst, std::fabs(fast.c[t] - slow[t]));
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("autocorrelation: bookkeeping, c(0) and bounds") {
    const auto x = noise(5000, 1);
    const auto ac = ac_of(x, 100);
    REQUIRE(ac.lags.size() == 101);
    CHECK(std::fabs(ac.c[0] - 1.0) <= 1e-12);
    for (std::size_t t = 0; t <= 100; ++t) {
        CHECK(ac.lags[t] == t);
        CHECK(ac.n_eff[t] == 5000 - t);
        CHECK(ac.confidence_95[t] == doctest::Approx(1.96 / std::sqrt(5000.0 - t)));
        CHECK(std::fabs(ac.c[t]) <= 1.0 + 1e-12);
    }
}

TEST_CASE("autocorrelation: white noise stays inside the band") {
    const auto x = noise(1000000, 2);
    const auto ac = ac_of(x, 100);
    int inside = 0;
    for (std::size_t t = 1; t <= 100; ++t) {
        CHECK(std::fabs(ac.c[t]) < 0.005);
        inside += std::fabs(ac.c[t]) <= ac.confidence_95[t];
    }
    CHECK(inside >= 93);
}

TEST_CASE("autocorrelation: AR(1) with phi = 0.5") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::ar1;
    spec.params.phi = 0.5;
    spec.length = 1000000;
    const auto ac = autocorrelation(generate(spec).returns[0], 10);
    for (int t = 1; t <= 5; ++t) CHECK(std::fabs(ac.c[t] - std::pow(0.5, t)) <= 0.02);
}

TEST_CASE("autocorrelation: alternating block noise has a negative first lag") {
    // each innovation enters with + then - sign: x_t = e_t - e_{t-1}
    const auto e = noise(100001, 3);
    std::vector<double> x(100000);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = e[t + 1] - e[t];
    const auto ac = ac_of(x, 10);
    CHECK(ac.c[1] < 0.0);
    CHECK(ac.c[1] == doctest::Approx(-0.5).epsilon(0.05));
    CHECK(std::fabs(ac.c[2]) < 0.02);
}

TEST_CASE("autocorrelation: sign flip invariance") {
    auto x = noise(3000, 4);
    for (std::size_t i = 1; i < x.size(); ++i) x[i] += 0.3 * x[i - 1];
    auto y = x;
    for (auto& v : y) v = -v;
    const auto a = ac_of(x, 200), b = ac_of(y, 200);
    for (std::size_t t = 0; t <= 200; ++t) CHECK(std::fabs(a.c[t] - b.c[t]) <= 1e-14);
}

TEST_CASE("autocorrelation: shuffling destroys correlation") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::ar1;
    spec.params.phi = 0.8;
    spec.length = 200000;
    const auto x = generate(spec).returns[0].values();
    const auto s = shuffle_surrogate(x, 9);
    const auto ac = ac_of(s, 100);
    double worst = 0.0;
    for (std::size_t t = 1; t <= 100; ++t) worst = std::max(worst, std::fabs(ac.c[t]) / ac.confidence_95[t]);
    CHECK(worst < 5.0);
}

TEST_CASE("autocorrelation: argument checks") {
    const auto x = noise(1000, 5);
    CHECK_THROWS_AS(ac_of(x, 100), UsageError);
    CHECK_NOTHROW(ac_of(x, 99));
    CHECK_THROWS_AS(ac_of(std::vector<double>(1000, 1.0), 10), DegenerateInputError);
}

TEST_CASE("power law: exact synthetic decay") {
    AutocorrResult ac;
    for (std::size_t t = 0; t <= 500; ++t) {
        ac.lags.push_back(t);
        ac.c.push_back(t == 0 ? 1.0 : std::pow(static_cast<double>(t), -0.4));
        ac.n_eff.push_back(10000 - t);
        ac.confidence_95.push_back(0.0);
    }
    const auto f = fit_power_law(ac, {1, 500});
    CHECK(std::fabs(f.exponent - 0.4) <= 1e-6);
    CHECK(f.amplitude == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.n_points == 500);

    ac.c[37] = -0.01;
    try {
        fit_power_law(ac, {10, 100});
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("37") != std::string::npos);
    }
    CHECK_NOTHROW(fit_power_law(ac, {40, 100}));
    CHECK_THROWS_AS(fit_power_law(ac, {1, 501}), UsageError);
}

TEST_CASE("power law: long-memory surrogate decays with exponent 0.4") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::long_memory_volatility;
    spec.params.decay = 0.4;
    spec.length = 1 << 20;
    const auto ac = autocorrelation(generate(spec).returns[0], 1024);
    const auto f = fit_power_law(ac, {4, 64});
    CHECK(std::fabs(f.exponent - 0.4) <= 0.05);
    CHECK(f.r_squared >= 0.0);
    CHECK(f.r_squared <= 1.0);
}
