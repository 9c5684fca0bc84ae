#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

#include "fxmf/qgaussian.hpp"
#include "fxmf/rng.hpp"
#include "fxmf/special.hpp"
#include "fxmf/synth.hpp"

using namespace fxmf;

namespace {

double rel(double got, double want) { return std::fabs(got - want) / std::max(std::fabs(want), 1e-300); }

// Student-t tail: X = mu + u has P(X >= mu + u) = I_w(beta - 1/2, 1/2) / 2 with w = 1 / (1 + kappa u^2).
double tail_oracle(double u, const QGaussianParams& p) {
    if (p.q == 1.0) return 0.5 * std::erfc(u * std::sqrt(p.B));
    const double beta = 1.0 / (p.q - 1.0);
    const double kappa = p.B * (p.q - 1.0);
    const double z = kappa * u * u;
    // 1 - w loses digits when w is near 1, so go through the complement there
    if (z < 1.0) return 0.5 * boost::math::ibetac(0.5, beta - 0.5, z / (1.0 + z));
    return 0.5 * boost::math::ibeta(beta - 0.5, 0.5, 1.0 / (1.0 + z));
}

double pdf_integral(const QGaussianParams& p) {
    if (p.q < 1.0) {
        boost::math::quadrature::tanh_sinh<double> ts;
        const double edge = 1.0 / std::sqrt(p.B * (1.0 - p.q));
        return ts.integrate([&](double x) { return pdf(x, p); }, p.mu - edge, p.mu + edge);
    }
    boost::math::quadrature::exp_sinh<double> es;
    const auto f = [&](double u) { return pdf(p.mu + u, p) + pdf(p.mu - u, p); };
    return es.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    return x;
}

}  // namespace

TEST_CASE("hyp2f1: z = 0 gives 1") {
    for (double a : {-2.5, 0.3, 4.0})
        for (double c : {0.5, 3.5}) CHECK(hyp2f1(a, 1.7, c, 0.0) == 1.0);
}

TEST_CASE("hyp2f1: b == c gives (1 - z)^-a") {
    CHECK(rel(hyp2f1(0.5, 2.0, 2.0, -3.0), 0.5) <= 1e-12);
    for (double z : {-50.0, -3.0, -0.95, -0.3, 0.2, 0.95, 0.999})
        CHECK(rel(hyp2f1(1.3, 2.2, 2.2, z), std::pow(1.0 - z, -1.3)) <= 1e-10);
}

TEST_CASE("hyp2f1: 2F1(1,1;2;z) = -ln(1-z)/z across every branch") {
    CHECK(rel(hyp2f1(1, 1, 2, -1.0), std::log(2.0)) <= 1e-12);
    for (double z : {-1e4, -200.0, -9.0, -0.95, -0.5, 0.3, 0.85, 0.9, 0.95, 0.999, 0.99999})
        CHECK(rel(hyp2f1(1, 1, 2, z), -std::log1p(-z) / z) <= 1e-10);
}

TEST_CASE("hyp2f1: arctan, arcsin and artanh identities") {
    for (double x : {0.1, 0.7, 1.5, 4.0, 30.0, 1e3})
        CHECK(rel(hyp2f1(0.5, 1.0, 1.5, -x * x), std::atan(x) / x) <= 1e-10);
    for (double x : {0.1, 0.5, 0.9, 0.97, 0.999})
        CHECK(rel(hyp2f1(0.5, 0.5, 1.5, x * x), std::asin(x) / x) <= 1e-10);
    for (double x : {0.2, 0.8, 0.96, 0.9999})
        CHECK(rel(hyp2f1(0.5, 1.0, 1.5, x * x), std::atanh(x) / x) <= 1e-10);
}

TEST_CASE("hyp2f1: trigonometric identity 2F1(a, 1-a; 3/2; sin^2 x)") {
    for (double a : {0.2, 0.75, 2.3})
        for (double x : {0.3, 1.0, 1.4}) {
            const double s = std::sin(x);
            const double want = std::sin((2.0 * a - 1.0) * x) / ((2.0 * a - 1.0) * s);
            CHECK(rel(hyp2f1(a, 1.0 - a, 1.5, s * s), want) <= 1e-10);
        }
}

TEST_CASE("hyp2f1: incomplete beta relation for tail-like parameters") {
    // 2F1(a, 1 - b; a + 1; x) = a B_x(a, b) / x^a
    for (double a : {0.5, 3.0, 12.0, 49.5})
        for (double b : {0.5, 2.5})
            for (double x : {0.05, 0.5, 0.93, 0.9995}) {
                const double want = a * boost::math::beta(a, b, x) / std::pow(x, a);
                CHECK(rel(hyp2f1(a, 1.0 - b, a + 1.0, x), want) <= 1e-10);
            }
}

TEST_CASE("hyp2f1: Gauss sum at z = 1 and terminating series") {
    const double a = 0.3, b = 0.8, c = 2.6;
    const double want = std::tgamma(c) * std::tgamma(c - a - b) / (std::tgamma(c - a) * std::tgamma(c - b));
    CHECK(rel(hyp2f1(a, b, c, 1.0), want) <= 1e-12);
    // 2F1(-3, b; c; z) is a cubic
    const double bb = 1.5, cc = 2.5, z = -7.0;
    double sum = 1.0, term = 1.0;
    for (int k = 0; k < 3; ++k) {
        term *= (-3.0 + k) * (bb + k) / ((cc + k) * (k + 1.0)) * z;
        sum += term;
    }
    CHECK(rel(hyp2f1(-3.0, bb, cc, z), sum) <= 1e-13);
}

TEST_CASE("hyp2f1: series entry point agrees inside the disc") {
    for (double z : {-0.8, -0.2, 0.4, 0.85}) CHECK(rel(hyp2f1_series(0.5, 2.7, 1.5, z), hyp2f1(0.5, 2.7, 1.5, z)) <= 1e-13);
    CHECK_THROWS_AS(hyp2f1_series(0.5, 2.7, 1.5, -1.5), DomainError);
}

TEST_CASE("hyp2f1: domain errors") {
    CHECK_THROWS_AS(hyp2f1(1.0, 1.0, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(hyp2f1(1.0, 1.0, -2.0, 0.5), DomainError);
    CHECK_THROWS_AS(hyp2f1(1.0, 1.0, 2.0, 1.5), DomainError);
    CHECK_THROWS_AS(hyp2f1(1.0, 1.0, 2.0, 1.0), DomainError);
}

TEST_CASE("q-exponential") {
    CHECK(q_exponential(1.0, 1.0) == doctest::Approx(std::numbers::e).epsilon(1e-15));
    CHECK(q_exponential(-1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    for (double q : {0.3, 1.0, 1.7, 2.9}) CHECK(q_exponential(0.0, q) == 1.0);
    CHECK(q_exponential(-3.0, 0.5) == 0.0);  // beyond the compact-support cutoff
    CHECK(q_exponential(1e-9, 1.0 + 1e-13) == doctest::Approx(std::exp(1e-9)).epsilon(1e-15));
}

TEST_CASE("pdf: Gaussian limit and power-law tail") {
    CHECK(pdf(0.0, {1.0, 0.5, 0.0}) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
    const QGaussianParams p{1.5, 1.0, 0.0};
    const double slope = (std::log(pdf(1e4, p)) - std::log(pdf(1e3, p))) / std::log(10.0);
    CHECK(std::fabs(slope + 4.0) <= 0.01);
    CHECK_THROWS_AS(pdf(0.0, {3.0, 1.0, 0.0}), UsageError);
    CHECK_THROWS_AS(pdf(0.0, {1.5, 0.0, 0.0}), UsageError);
}

TEST_CASE("pdf integrates to one") {
    for (double q : {0.5, 1.0, 1.2, 1.4, 1.6, 2.2}) {
        const QGaussianParams p{q, 1.7, 0.3};
        CHECK(std::fabs(pdf_integral(p) - 1.0) <= 1e-8);
    }
}

TEST_CASE("generalised sigma and B") {
    const auto p = QGaussianParams::from_sigma(1.4, 2.0, 0.5);
    CHECK(p.B == doctest::Approx(1.0 / ((3.0 - 1.4) * 4.0)));
    CHECK(p.sigma() == doctest::Approx(2.0));
    CHECK(p.mu == 0.5);
}

TEST_CASE("cdf_wing: half at the centre and complementary wings") {
    for (double q : {1.0, 1.01, 1.3, 1.5, 2.5}) {
        const QGaussianParams p{q, 0.8, -0.4};
        CHECK(cdf_wing(p.mu, p, Wing::right) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(cdf_wing(p.mu, p, Wing::left) == doctest::Approx(0.5).epsilon(1e-15));
        for (double x : {-30.0, -3.0, -0.5, 0.0, 0.2, 1.0, 4.0, 100.0})
            CHECK(std::fabs(cdf_wing(x, p, Wing::right) + cdf_wing(x, p, Wing::left) - 1.0) <= 1e-10);
    }
}

TEST_CASE("cdf_wing matches the incomplete beta function") {
    for (double q : {1.0, 1.01, 1.05, 1.2, 1.4, 1.5, 1.6, 2.0, 2.8}) {
        const QGaussianParams p{q, 1.3, 0.2};
        for (double u : {1e-6, 0.01, 0.3, 1.0, 2.0, 5.0, 20.0, 300.0, 1e5}) {
            const double want = tail_oracle(u, p);
            if (want < 1e-290) continue;
            CHECK(rel(cdf_wing(p.mu + u, p, Wing::right), want) <= 1e-12);
            CHECK(rel(cdf_wing(p.mu - u, p, Wing::left), want) <= 1e-12);
        }
    }
}

TEST_CASE("cdf_wing: inverse cubic tail at q = 1.5") {
    const QGaussianParams p{1.5, 1.0, 0.0};
    const double slope =
        (std::log(cdf_wing(1e4, p, Wing::right)) - std::log(cdf_wing(1e3, p, Wing::right))) / std::log(10.0);
    CHECK(std::fabs(slope + 3.0) <= 0.01);
}

TEST_CASE("cdf_wing: asymptotic slope 2/(1-q) + 1") {
    for (double q : {1.2, 1.4, 1.6}) {
        const QGaussianParams p{q, 1.0, 0.0};
        const double slope =
            (std::log(cdf_wing(1e4, p, Wing::right)) - std::log(cdf_wing(1e3, p, Wing::right))) / std::log(10.0);
        const double want = 2.0 / (1.0 - q) + 1.0;
        CHECK(std::fabs(slope / want - 1.0) <= 0.01);
    }
}

TEST_CASE("cdf_wing is strictly monotone") {
    for (double q : {1.0, 1.3, 1.9}) {
        const QGaussianParams p{q, 1.0, 0.0};
        double prev_r = 2.0, prev_l = -1.0;
        for (int i = -400; i <= 400; ++i) {
            const double x = i * 0.02;
            const double r = cdf_wing(x, p, Wing::right), l = cdf_wing(x, p, Wing::left);
            // strict until the wing saturates at 1 in double precision
            CHECK(r <= prev_r);
            CHECK(l >= prev_l);
            if (prev_r < 1.0 - 1e-12) CHECK(r < prev_r);
            if (l < 1.0 - 1e-12) CHECK(l > prev_l);
            prev_r = r;
            prev_l = l;
        }
    }
}

TEST_CASE("derivative of the right wing is minus the pdf") {
    Rng rng(17);
    for (double q : {1.0, 1.2, 1.5, 2.0}) {
        const QGaussianParams p{q, 0.9, 0.1};
        for (int k = 0; k < 25; ++k) {
            const double x = p.mu + 6.0 * (rng.uniform01() - 0.5) * (1.0 + 3.0 * (q - 1.0));
            const double h = 1e-4 * std::max(1.0, std::fabs(x));
            // fourth-order central difference
            const auto P = [&](double t) { return cdf_wing(t, p, Wing::right); };
            const double d = (-P(x + 2 * h) + 8 * P(x + h) - 8 * P(x - h) + P(x - 2 * h)) / (12 * h);
            CHECK(rel(-d, pdf(x, p)) <= 1e-6);
        }
    }
}

TEST_CASE("cdf_wing rejects q < 1") { CHECK_THROWS_AS(cdf_wing(0.5, {0.8, 1.0, 0.0}, Wing::right), UsageError); }

TEST_CASE("quantile inverts the right wing") {
    for (double q : {1.0, 1.3, 1.5, 2.4}) {
        const QGaussianParams p{q, 0.7, 0.3};
        for (double prob : {0.999, 0.6, 0.5, 0.2, 1e-3, 1e-9, 1e-15}) {
            const double x = quantile_right(prob, p);
            CHECK(rel(cdf_wing(x, p, Wing::right), prob) <= 1e-10);
        }
    }
    CHECK_THROWS_AS(quantile_right(0.0, {1.5, 1.0, 0.0}), UsageError);
}

TEST_CASE("empirical CDF tail probabilities and wing points") {
    const std::vector<double> x{-3, -1, 0, 2, 5};
    const EmpiricalCdf e(x);
    CHECK(e.tail_probability(2.0, Wing::right) == 0.4);
    CHECK(e.tail_probability(-1.0, Wing::left) == 0.4);
    CHECK(e.tail_probability(6.0, Wing::right) == 0.0);
    const auto big = normal_sample(10000, 3);
    const EmpiricalCdf eb(big);
    const auto pts = eb.wing_points(Wing::right, 0.5, 3.0, 100, 1);
    CHECK(pts.size() > 50);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].x <= pts[i - 1].x);
        CHECK(pts[i].probability > pts[i - 1].probability);
    }
    for (const auto& pt : pts) {
        CHECK(pt.x >= 0.5);
        CHECK(pt.x <= 3.0);
        CHECK(pt.probability > 0.0);
        CHECK(pt.probability <= 1.0);
    }
}

TEST_CASE("fit: a million standard normals give q close to one") {
    const auto x = normal_sample(1000000, 21);
    const auto f = fit(EmpiricalCdf(x));
    CHECK(std::fabs(f.left.params.q - 1.0) <= 0.03);
    CHECK(std::fabs(f.right.params.q - 1.0) <= 0.03);
    CHECK(f.right.converged);
    CHECK(f.right.n_points >= 50);
}

TEST_CASE("fit: recovers q and B from q-Gaussian samples") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::q_gaussian_iid;
    spec.params.q = 1.5;
    spec.length = 300000;
    spec.seed = 8;
    const auto x = generate(spec).returns[0].values();
    // unbounded, the few extreme order statistics dominate the log objective
    FitOptions opt;
    opt.range_hi = 10.0;
    const auto f = fit(EmpiricalCdf(x), opt);
    const double B = 1.0 / (3.0 - 1.5);
    for (const auto& w : {f.left, f.right}) {
        CHECK(std::fabs(w.params.q - 1.5) <= 0.05);
        CHECK(std::fabs(w.params.B / B - 1.0) <= 0.10);
    }
}

TEST_CASE("fit: centre-only fit of a Student mixture with q = 1.2") {
    // Gaussian scale mixture with inverse chi-square variance = Student t with nu = 9, i.e. q = 1.2
    Rng rng(31);
    std::vector<double> x(400000);
    for (auto& v : x) {
        double chi2 = 0.0;
        for (int k = 0; k < 9; ++k) {
            const double z = rng.normal();
            chi2 += z * z;
        }
        v = rng.normal() / std::sqrt(chi2 / 9.0);
    }
    const double sd = population_stddev(x);
    for (auto& v : x) v /= sd;
    FitOptions opt;
    opt.range_hi = 3.0;
    const auto f = fit(EmpiricalCdf(x), opt);
    CHECK(std::fabs(f.left.params.q - 1.2) <= 0.1);
    CHECK(std::fabs(f.right.params.q - 1.2) <= 0.1);
}

TEST_CASE("fit: deterministic") {
    const auto x = normal_sample(20000, 5);
    const auto a = fit_wing(EmpiricalCdf(x), Wing::right);
    const auto b = fit_wing(EmpiricalCdf(x), Wing::right);
    CHECK(a.params.q == b.params.q);
    CHECK(a.params.B == b.params.B);
    CHECK(a.objective == b.objective);
}

TEST_CASE("fit: too few points and budget exhaustion") {
    const auto small = normal_sample(60, 1);
    CHECK_THROWS_AS(fit_wing(EmpiricalCdf(small), Wing::right), UsageError);

    const auto x = normal_sample(20000, 2);
    FitOptions opt;
    opt.max_iterations = 1;
    opt.gradient_tolerance = 1e-300;
    opt.refine_q = false;
    try {
        fit_wing(EmpiricalCdf(x), Wing::left, opt);
        FAIL("expected non-convergence");
    } catch (const FitNonConvergence& e) {
        CHECK(std::isfinite(e.best().objective));
        CHECK(e.best().params.B > 0.0);
        CHECK_FALSE(e.best().converged);
    }
}

TEST_CASE("wing objective is zero on exact model probabilities") {
    const QGaussianParams p{1.4, 1.1, 0.0};
    std::vector<EmpiricalCdf::Point> pts;
    for (int i = 1; i <= 60; ++i) {
        const double x = 0.1 * i;
        pts.push_back({x, cdf_wing(x, p, Wing::right)});
    }
    CHECK(wing_objective(pts, p, Wing::right) <= 1e-24);
}
