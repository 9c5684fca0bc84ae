#pragma once

// Slow, obviously-correct reference implementations used to pin down the
// fast library code. Nothing here calls into the library's numerics.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace oracle {

inline double mean(std::span<const double> x) {
    long double s = 0.0L;
    for (double v : x) s += v;
    return static_cast<double>(s / x.size());
}

// Double-loop autocorrelation of the standardised series.
inline std::vector<double> naive_acf(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    const double m = mean(x);
    long double ss = 0.0L;
    for (double v : x) ss += (v - m) * (v - m);
    const double sd = std::sqrt(static_cast<double>(ss / n));
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = (x[i] - m) / sd;
    std::vector<double> c(max_lag + 1);
    for (std::size_t tau = 0; tau <= max_lag; ++tau) {
        long double s = 0.0L;
        for (std::size_t t = 0; t + tau < n; ++t) s += static_cast<long double>(g[t]) * g[t + tau];
        c[tau] = static_cast<double>(s / (n - tau));
    }
    return c;
}

// Segment variances of the profile after a polynomial fit done with a plain
// Householder QR on the raw Vandermonde matrix (centred abscissa).
inline std::vector<double> naive_segment_variances(std::span<const double> x, std::size_t n, int order) {
    const std::size_t N = x.size();
    const double m = mean(x);
    std::vector<double> Y(N);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < N; ++i) {
        acc += x[i] - m;
        Y[i] = static_cast<double>(acc);
    }
    const std::size_t Mn = N / n;
    Eigen::MatrixXd V(n, order + 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = (static_cast<double>(j) - 0.5 * (n - 1)) / static_cast<double>(n);
        for (int k = 0; k <= order; ++k) V(j, k) = std::pow(t, k);
    }
    const auto qr = V.colPivHouseholderQr();
    std::vector<double> out;
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t v = 0; v < Mn; ++v) {
            const std::size_t start = pass == 0 ? v * n : N - (v + 1) * n;
            Eigen::VectorXd y(n);
            for (std::size_t j = 0; j < n; ++j) y(j) = Y[start + j];
            const Eigen::VectorXd coef = qr.solve(y);
            const Eigen::VectorXd res = y - V * coef;
            out.push_back(res.squaredNorm() / static_cast<double>(n));
        }
    }
    return out;
}

// F_r(n) straight from the defining sum; r = 0 is the logarithmic average.
inline double naive_fluctuation(std::span<const double> x, std::size_t n, int order, double r) {
    const auto f2 = naive_segment_variances(x, n, order);
    long double s = 0.0L;
    if (r == 0.0) {
        for (double v : f2) s += std::log(v);
        return std::exp(0.5 * static_cast<double>(s / f2.size()));
    }
    for (double v : f2) s += std::pow(v, 0.5 * r);
    return std::pow(static_cast<double>(s / f2.size()), 1.0 / r);
}

// Generalised Hurst exponent of the binomial cascade with weights a, 1 - a.
inline double cascade_h(double r, double a) {
    if (r == 0.0) return -0.5 * (std::log2(a) + std::log2(1.0 - a));  // limit r -> 0
    return 1.0 / r - std::log2(std::pow(a, r) + std::pow(1.0 - a, r)) / r;
}

// Least-squares slope of y on x.
inline double slope(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace oracle
